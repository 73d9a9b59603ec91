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

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmlink/cli.hpp"
#include "mmlink/config.hpp"
#include "mmlink/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct RunArgs {
    std::string scenario;
    std::string trace;
    double interval_ms = 1.0;
    std::string arch = "digital,analog,none";
    std::uint64_t seed = 1;
    std::string out = "mmlink_out";
    double window_ms = 0.0; // 0: keep the file/default value
};

int cmd_run(const CLI::App* cmd, const RunArgs& args) {
    mmlink::RunConfig cfg;
    cfg.scenario_path = args.scenario;
    cfg.trace_path = args.trace;
    cfg.trace_interval = mmlink::SimTime::from_millis(args.interval_ms);

    // file [run] section provides defaults; explicit flags win
    mmlink::ChannelTrace trace = mmlink::resolve_trace(cfg);
    if (cmd->count("--arch") > 0)
        cfg.archs = mmlink::parse_arch_list(args.arch);
    if (cmd->count("--seed") > 0)
        cfg.seed = args.seed;
    if (cmd->count("--out") > 0)
        cfg.out_dir = args.out;
    if (cmd->count("--window-ms") > 0)
        cfg.sim.sample_window = mmlink::SimTime::from_millis(args.window_ms);

    mmlink::SweepOutput sw = mmlink::run_sweep(cfg, trace);
    for (const auto& run : sw.runs) {
        std::printf("%-8s mean SINR %6.2f dB  mean goodput %8.2f Mb/s  p95 RTT %7.3f ms  "
                    "drops %llu B\n",
                    mmlink::to_string(run.arch).c_str(), run.summary.mean_sinr_db,
                    run.summary.mean_goodput_bps / 1e6, run.summary.rtt_p95_ms,
                    static_cast<unsigned long long>(run.summary.dropped_bytes));
    }
    std::printf("wrote %s\n", sw.summary_path.c_str());
    return kExitOk;
}

int cmd_make_scenario(const std::string& name, std::string out_path) {
    mmlink::ScenarioSpec spec = mmlink::bundled_scenario(name);
    if (out_path.empty())
        out_path = name + ".toml";
    mmlink::write_scenario_file(spec, out_path);
    std::printf("wrote %s\n", out_path.c_str());
    return kExitOk;
}

int cmd_detect_events(const std::string& scenario, const std::string& trace_path,
                      double interval_ms, int tx, int rx, double threshold_db,
                      double min_duration_ms) {
    mmlink::ChannelTrace trace = [&] {
        if (!trace_path.empty())
            return mmlink::load_trace(trace_path, mmlink::SimTime::from_millis(interval_ms));
        mmlink::ScenarioSpec spec =
            scenario.empty() ? mmlink::bundled_scenario("paper_fig6")
                             : mmlink::scenario_from_document(
                                   mmlink::ConfigDoc::parse_file(scenario));
        return mmlink::generate_synthetic(spec.scenario, spec.sample_interval);
    }();

    if (tx < 0 || rx < 0) {
        auto peak = trace.sample_at(mmlink::SimTime{0}).peak();
        tx = peak.tx;
        rx = peak.rx;
    }
    auto events = mmlink::detect_blockage_events(trace, tx, rx, threshold_db,
                                                 mmlink::SimTime::from_millis(min_duration_ms));
    std::printf("# pac tx%d rx%d\n", tx, rx);
    std::printf("start_s,end_s,max_depth_db\n");
    for (const auto& e : events)
        std::printf("%s,%s,%s\n", mmlink::detail::format_seconds(e.start).c_str(),
                    mmlink::detail::format_seconds(e.end).c_str(),
                    mmlink::detail::format_double(e.max_depth_db).c_str());
    std::printf("# %zu event(s)\n", events.size());
    return kExitOk;
}

int cmd_validate(const std::string& path) {
    mmlink::ConfigDoc doc = mmlink::ConfigDoc::parse_file(path);
    mmlink::ScenarioSpec spec = mmlink::scenario_from_document(doc);
    mmlink::SimConfig cfg = mmlink::sim_config_from_document(doc);
    cfg.ssburst.validate();
    cfg.link.validate();
    cfg.core.validate();
    std::printf("%s: OK (scenario '%s', %zu path(s), %zu event(s))\n", path.c_str(),
                spec.scenario.name.c_str(), spec.scenario.paths.size(),
                spec.scenario.events.size());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmlink: trace-driven mmWave link simulator with NR SS-burst beam tracking"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Simulate TCP over a blockage trace");
    run->add_option("--scenario", run_args.scenario, "Scenario/config document");
    run->add_option("--trace", run_args.trace, "Measured trace CSV instead of a scenario");
    run->add_option("--interval-ms", run_args.interval_ms, "Trace scan interval (with --trace)");
    run->add_option("--arch", run_args.arch, "Comma list: digital,analog,none");
    run->add_option("--seed", run_args.seed, "Random seed recorded with the outputs");
    run->add_option("--out", run_args.out, "Output directory");
    run->add_option("--window-ms", run_args.window_ms, "Time-series sample window");

    std::string ms_name, ms_out;
    auto* mk = app.add_subcommand("make-scenario", "Write a bundled scenario file");
    mk->add_option("name", ms_name, "Scenario name")->required();
    mk->add_option("--out", ms_out, "Output path (default <name>.toml)");

    std::string de_scenario, de_trace;
    double de_interval = 1.0, de_threshold = 6.0, de_min_ms = 50.0;
    int de_tx = -1, de_rx = -1;
    auto* de = app.add_subcommand("detect-events", "List blockage events on one beam pair");
    de->add_option("--scenario", de_scenario, "Scenario document");
    de->add_option("--trace", de_trace, "Trace CSV");
    de->add_option("--interval-ms", de_interval, "Trace scan interval (with --trace)");
    de->add_option("--tx", de_tx, "TX beam index (default: strongest pair at t=0)");
    de->add_option("--rx", de_rx, "RX beam index (default: strongest pair at t=0)");
    de->add_option("--threshold-db", de_threshold, "Depth threshold below the p95 level");
    de->add_option("--min-duration-ms", de_min_ms, "Shortest event to keep");

    std::string vc_path;
    auto* vc = app.add_subcommand("validate-config", "Parse and validate a document");
    vc->add_option("file", vc_path, "Scenario/config document")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed())
            return cmd_run(run, run_args);
        if (mk->parsed())
            return cmd_make_scenario(ms_name, ms_out);
        if (de->parsed())
            return cmd_detect_events(de_scenario, de_trace, de_interval, de_tx, de_rx,
                                     de_threshold, de_min_ms);
        if (vc->parsed())
            return cmd_validate(vc_path);
    } catch (const mmlink::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
