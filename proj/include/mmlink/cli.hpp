// SPDX-License-Identifier: Apache-2.0
//
// mmlink: trace-driven mmWave link simulator with NR SS-burst beam tracking
// Copyright (C) 2026 mmlink contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMLINK_CLI_HPP
#define MMLINK_CLI_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmlink/config.hpp"
#include "mmlink/sim.hpp"

namespace mmlink {

/// Everything one invocation needs: channel source, architectures, module
/// configs, seed and output location. Flags override file values which
/// override built-in defaults.
struct RunConfig {
    std::string scenario_path;            ///< scenario/config document, or
    std::string scenario_name = "paper_fig6"; ///< bundled fallback when no file given
    std::string trace_path;               ///< measured-trace CSV alternative
    SimTime trace_interval = SimTime::from_ms(1);
    std::vector<UeArchitecture> archs = {UeArchitecture::Digital, UeArchitecture::Analog,
                                         UeArchitecture::NoTracking};
    std::uint64_t seed = 1;
    std::string out_dir = "mmlink_out";
    SimConfig sim;
    std::string loaded_scenario_label; ///< filled in while resolving the source
};

inline std::vector<UeArchitecture> parse_arch_list(const std::string& csv);

/// [run] keys are defaults for the matching command-line flags.
inline void apply_run_section(const ConfigDoc& doc, RunConfig& cfg) {
    const auto* sec = doc.section("run");
    if (sec == nullptr)
        return;
    detail::TableView v(doc, *sec, "run");
    cfg.seed = static_cast<std::uint64_t>(
        v.integer("seed", static_cast<std::int64_t>(cfg.seed)));
    std::string archs = v.text("arch", "");
    if (!archs.empty())
        cfg.archs = parse_arch_list(archs);
    cfg.out_dir = v.text("out", cfg.out_dir);
}

inline std::vector<UeArchitecture> parse_arch_list(const std::string& csv) {
    std::vector<UeArchitecture> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto a = parse_architecture(item);
        if (!a.has_value())
            throw ConfigError("unknown architecture '" + item +
                              "' (expected digital, analog or none)");
        out.push_back(*a);
    }
    if (out.empty())
        throw ConfigError("empty architecture list");
    return out;
}

/// Resolve the channel ground truth: load a measured trace, render the
/// referenced scenario document, or fall back to the named bundled scenario.
/// A trace given alongside a scenario document replaces the synthetic
/// channel but must agree with the document's declared duration.
inline ChannelTrace resolve_trace(RunConfig& cfg) {
    if (!cfg.trace_path.empty()) {
        cfg.loaded_scenario_label = cfg.trace_path;
        ChannelTrace trace = load_trace(cfg.trace_path, cfg.trace_interval);
        if (!cfg.scenario_path.empty()) {
            ConfigDoc doc = ConfigDoc::parse_file(cfg.scenario_path);
            ScenarioSpec spec = scenario_from_document(doc);
            cfg.sim = sim_config_from_document(doc, cfg.sim);
            apply_run_section(doc, cfg);
            if (spec.scenario.duration != trace.duration())
                throw ConfigError("trace/schedule mismatch: scenario '" + spec.scenario.name +
                                  "' declares " +
                                  detail::format_seconds(spec.scenario.duration) +
                                  " s but trace '" + cfg.trace_path + "' spans " +
                                  detail::format_seconds(trace.duration()) + " s");
        }
        return trace;
    }
    ScenarioSpec spec;
    if (!cfg.scenario_path.empty()) {
        ConfigDoc doc = ConfigDoc::parse_file(cfg.scenario_path);
        spec = scenario_from_document(doc);
        cfg.sim = sim_config_from_document(doc, cfg.sim);
        apply_run_section(doc, cfg);
    } else {
        spec = bundled_scenario(cfg.scenario_name);
    }
    cfg.loaded_scenario_label = spec.scenario.name;
    return generate_synthetic(spec.scenario, spec.sample_interval);
}

struct ArchOutput {
    UeArchitecture arch = UeArchitecture::Digital;
    SimResult result;
    ArchSummary summary;
    std::string csv_path;
};

struct SweepOutput {
    std::vector<ArchOutput> runs;
    std::string summary_path;
};

/// Run every requested architecture over one shared trace, write one
/// time-series CSV per architecture plus a summary document. Runs share
/// nothing mutable, so per-architecture output is identical whether the
/// architecture runs alone or in a sweep.
inline SweepOutput run_sweep(RunConfig cfg, const ChannelTrace& trace) {
    namespace fs = std::filesystem;
    if (cfg.sim.sample_window > trace.duration())
        throw ConfigError("trace/schedule mismatch: sample window " +
                          detail::format_millis(cfg.sim.sample_window) +
                          " ms exceeds the trace span " +
                          detail::format_millis(trace.duration()) + " ms");
    fs::create_directories(cfg.out_dir);

    // blockage context of the run: events visible on the initial best pair
    auto t0_peak = trace.sample_at(SimTime{0}).peak();
    auto detected = detect_blockage_events(trace, t0_peak.tx, t0_peak.rx, 6.0,
                                           SimTime::from_ms(50));

    SweepOutput out;
    nlohmann::ordered_json summary;
    summary["schema"] = "mmlink-summary-1";
    summary["scenario"] = cfg.loaded_scenario_label;
    summary["seed"] = cfg.seed;
    summary["window_ms"] = cfg.sim.sample_window.millis();
    summary["architectures"] = nlohmann::ordered_json::object();

    for (UeArchitecture arch : cfg.archs) {
        Simulation sim(trace, arch, cfg.sim);
        ArchOutput ao;
        ao.arch = arch;
        ao.result = sim.run();
        ao.summary = summarize(ao.result.rows, ao.result.counters.rlc_dropped_bytes,
                               static_cast<int>(detected.size()));
        ao.csv_path =
            (fs::path(cfg.out_dir) / ("timeseries_" + to_string(arch) + ".csv")).string();
        write_timeseries_csv(ao.result.rows, ao.csv_path);

        nlohmann::ordered_json a;
        a["csv"] = fs::path(ao.csv_path).filename().string();
        a["mean_sinr_db"] = ao.summary.mean_sinr_db;
        a["min_sinr_db"] = ao.summary.min_sinr_db;
        a["mean_goodput_bps"] = ao.summary.mean_goodput_bps;
        a["rtt_p50_ms"] = ao.summary.rtt_p50_ms;
        a["rtt_p95_ms"] = ao.summary.rtt_p95_ms;
        a["blockage_events"] = ao.summary.blockage_events;
        a["max_rlc_bytes"] = ao.summary.max_rlc_bytes;
        a["dropped_bytes"] = ao.summary.dropped_bytes;
        a["beam_switches"] = ao.result.counters.beam_switches;
        summary["architectures"][to_string(arch)] = a;

        out.runs.push_back(std::move(ao));
    }

    out.summary_path = (fs::path(cfg.out_dir) / "summary.json").string();
    std::ofstream js(out.summary_path, std::ios::binary);
    if (!js)
        throw std::runtime_error("run_sweep: cannot open '" + out.summary_path + "'");
    js << summary.dump(2) << '\n';
    return out;
}

inline SweepOutput run_sweep(RunConfig cfg) {
    ChannelTrace trace = resolve_trace(cfg);
    return run_sweep(std::move(cfg), trace);
}

} // namespace mmlink

#endif // MMLINK_CLI_HPP
