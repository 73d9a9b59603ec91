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

#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "mmlink/cli.hpp"
#include "mmlink/config.hpp"

using namespace mmlink;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "mmlink_cfg_test";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("document parser: sections, arrays, values, comments") {
    const std::string text = R"(# comment
[scenario]
name = "demo"        # trailing comment
duration_s = 1.5
noise_floor_db = -55

[[path]]
tx = 1
rx = 2
peak_db = -3.5

[[path]]
tx = 3
rx = 4
peak_db = -9

[flags]
enabled = true
)";
    ConfigDoc doc = ConfigDoc::parse_string(text, "demo.toml");
    REQUIRE(doc.section("scenario") != nullptr);
    REQUIRE(doc.tables("path").size() == 2);
    detail::TableView s(doc, *doc.section("scenario"), "scenario");
    REQUIRE(s.text("name", "") == "demo");
    REQUIRE(s.number("duration_s", 0) == 1.5);
    REQUIRE(s.number("noise_floor_db", 0) == -55.0);
}

TEST_CASE("document parser: line-numbered diagnostics") {
    REQUIRE_THROWS_WITH(ConfigDoc::parse_string("[s]\nkey value\n", "bad.toml"),
                        Catch::Contains("bad.toml:2"));
    REQUIRE_THROWS_WITH(ConfigDoc::parse_string("key = 1\n", "bad.toml"),
                        Catch::Contains("before any section"));
    REQUIRE_THROWS_WITH(ConfigDoc::parse_string("[s]\nk = 1\nk = 2\n", "bad.toml"),
                        Catch::Contains("duplicate key"));
    REQUIRE_THROWS_WITH(ConfigDoc::parse_string("[s]\nk = nonsense\n", "bad.toml"),
                        Catch::Contains("bad.toml:2"));
}

TEST_CASE("scenario round trip through its file form") {
    ScenarioSpec spec = bundled_scenario("paper_fig6");
    fs::path p = temp_dir() / "fig6.toml";
    write_scenario_file(spec, p.string());

    ConfigDoc doc = ConfigDoc::parse_file(p.string());
    ScenarioSpec back = scenario_from_document(doc);
    REQUIRE(back.scenario.name == "paper_fig6");
    REQUIRE(back.scenario.duration == spec.scenario.duration);
    REQUIRE(back.scenario.paths.size() == 2);
    REQUIRE(back.scenario.events.size() == 3);
    REQUIRE(back.scenario.events[0].depth_db == 14.0);
    REQUIRE(back.scenario.events[1].ramp == SimTime::from_ms(50));
    REQUIRE(back.sample_interval == SimTime::from_ms(1));

    // identical traces from the original and the round-tripped scenario
    ChannelTrace a = generate_synthetic(spec.scenario, spec.sample_interval);
    ChannelTrace b = generate_synthetic(back.scenario, back.sample_interval);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); k += 97)
        REQUIRE(a.matrices()[k] == b.matrices()[k]);
}

TEST_CASE("config sections override simulator defaults") {
    const std::string text = R"([scenario]
name = "t"
duration_s = 0.5

[[path]]
tx = 0
rx = 0
peak_db = 0

[link]
peak_sinr_db = 25
harq_rtt_slots = 2

[stack]
mss = 1200
tcp = "cubic"

[run]
window_ms = 50
)";
    ConfigDoc doc = ConfigDoc::parse_string(text, "t.toml");
    SimConfig cfg = sim_config_from_document(doc);
    REQUIRE(cfg.link.peak_sinr_db == 25.0);
    REQUIRE(cfg.link.harq_rtt_slots == 2);
    REQUIRE(cfg.link.bandwidth_hz == 4.0e8); // untouched default
    REQUIRE(cfg.tcp.mss == 1200);
    REQUIRE(cfg.tcp.variant == TcpVariant::Cubic);
    REQUIRE(cfg.sample_window == SimTime::from_ms(50));
}

TEST_CASE("unknown keys are rejected with their location") {
    const std::string text = "[link]\nbandwidt_hz = 1\n";
    ConfigDoc doc = ConfigDoc::parse_string(text, "x.toml");
    REQUIRE_THROWS_WITH(sim_config_from_document(doc),
                        Catch::Contains("x.toml:2") && Catch::Contains("bandwidt_hz"));
}

TEST_CASE("bundled scenario names are stable; unknown names list the options") {
    for (const auto& n : bundled_scenario_names())
        REQUIRE(bundled_scenario(n).scenario.name == n);
    REQUIRE_THROWS_WITH(bundled_scenario("nope"), Catch::Contains("paper_fig6"));
}

TEST_CASE("architecture list parsing") {
    auto archs = parse_arch_list("digital,analog,none");
    REQUIRE(archs.size() == 3);
    REQUIRE(archs[0] == UeArchitecture::Digital);
    REQUIRE(archs[2] == UeArchitecture::NoTracking);
    REQUIRE_THROWS_AS(parse_arch_list("digital,warp"), ConfigError);
}

TEST_CASE("run_sweep writes one CSV per architecture plus a summary") {
    fs::path out = temp_dir() / "sweep";
    fs::remove_all(out);

    RunConfig cfg;
    cfg.scenario_name = "static";
    cfg.out_dir = out.string();
    cfg.archs = {UeArchitecture::Digital, UeArchitecture::NoTracking};
    SweepOutput sw = run_sweep(cfg);

    REQUIRE(sw.runs.size() == 2);
    REQUIRE(fs::exists(out / "timeseries_digital.csv"));
    REQUIRE(fs::exists(out / "timeseries_none.csv"));
    REQUIRE(fs::exists(out / "summary.json"));

    // summary fields reproduce from the rows they describe
    const ArchOutput& digital = sw.runs[0];
    ArchSummary redo = summarize(digital.result.rows,
                                 digital.result.counters.rlc_dropped_bytes,
                                 digital.summary.blockage_events);
    REQUIRE(redo.mean_sinr_db == digital.summary.mean_sinr_db);
    REQUIRE(redo.mean_goodput_bps == digital.summary.mean_goodput_bps);
    REQUIRE(redo.rtt_p95_ms == digital.summary.rtt_p95_ms);

    // and from the CSV file itself, within print precision
    std::ifstream in(digital.csv_path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line); // header
    double sinr_sum = 0, good_sum = 0, min_sinr = 1e9;
    std::vector<double> rtts;
    std::uint64_t max_rlc = 0;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ss, f, ','))
            fields.push_back(f);
        REQUIRE(fields.size() == 8);
        sinr_sum += std::stod(fields[1]);
        min_sinr = std::min(min_sinr, std::stod(fields[1]));
        good_sum += std::stod(fields[3]);
        rtts.push_back(std::stod(fields[4]));
        max_rlc = std::max<std::uint64_t>(max_rlc, std::stoull(fields[7]));
        ++n;
    }
    REQUIRE(n == digital.result.rows.size());
    REQUIRE(sinr_sum / n == Approx(digital.summary.mean_sinr_db).epsilon(1e-9));
    REQUIRE(min_sinr == Approx(digital.summary.min_sinr_db).epsilon(1e-9));
    REQUIRE(good_sum / n == Approx(digital.summary.mean_goodput_bps).epsilon(1e-9));
    REQUIRE(percentile_nearest_rank(rtts, 0.95) ==
            Approx(digital.summary.rtt_p95_ms).epsilon(1e-9));
    REQUIRE(max_rlc == digital.summary.max_rlc_bytes);

    // a static channel carries no blockage events
    REQUIRE(digital.summary.blockage_events == 0);
    REQUIRE(digital.summary.dropped_bytes == 0);
}

TEST_CASE("summary blockage-event count matches the flagship scenario") {
    fs::path out = temp_dir() / "events";
    fs::remove_all(out);
    RunConfig cfg;
    cfg.scenario_name = "paper_fig6";
    cfg.out_dir = out.string();
    cfg.archs = {UeArchitecture::NoTracking};
    SweepOutput sw = run_sweep(cfg);
    REQUIRE(sw.runs[0].summary.blockage_events == 3);
}
