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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mmlink/channel.hpp"
#include "mmlink/engine.hpp"

using namespace mmlink;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "mmlink_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string csv_header() {
    std::string h = "time_s";
    for (int t = 0; t < 12; ++t)
        for (int r = 0; r < 12; ++r)
            h += ",tx" + std::to_string(t) + "rx" + std::to_string(r);
    return h + "\n";
}

std::string zero_row(double t) {
    std::string row = std::to_string(t);
    for (int i = 0; i < 144; ++i)
        row += ",0.0";
    return row + "\n";
}

BlockageScenario single_path_scenario(SimTime duration) {
    BlockageScenario sc;
    sc.name = "test";
    sc.duration = duration;
    sc.paths.push_back(PathSpec{0, 0, 0.0, 0, 3.0});
    return sc;
}

} // namespace

TEST_CASE("load_trace: two all-zero rows give two all-zero scans") {
    auto p = temp_file("zeros.csv");
    write_file(p, csv_header() + zero_row(0.0) + zero_row(0.001));
    ChannelTrace t = load_trace(p.string(), SimTime::from_ms(1));
    REQUIRE(t.size() == 2);
    REQUIRE(t.codebook_size_tx() == 12);
    for (const auto& m : t.matrices())
        for (double v : m.cells())
            REQUIRE(v == 0.0);
}

TEST_CASE("load_trace: short row reported with its row number") {
    auto p = temp_file("short.csv");
    std::string row = "0.0";
    for (int i = 0; i < 143; ++i)
        row += ",0.0";
    write_file(p, csv_header() + row + "\n");
    REQUIRE_THROWS_WITH(load_trace(p.string(), SimTime::from_ms(1)),
                        Catch::Contains("row 2") && Catch::Contains("144"));
}

TEST_CASE("load_trace: non-numeric field reported with its row number") {
    auto p = temp_file("nan.csv");
    std::string row = "0.0";
    for (int i = 0; i < 143; ++i)
        row += ",0.0";
    row += ",oops";
    write_file(p, csv_header() + row + "\n");
    REQUIRE_THROWS_WITH(load_trace(p.string(), SimTime::from_ms(1)), Catch::Contains("row 2"));
}

TEST_CASE("load_trace: missing file and empty file are errors") {
    REQUIRE_THROWS_WITH(load_trace("/nonexistent/nowhere.csv", SimTime::from_ms(1)),
                        Catch::Contains("cannot open"));
    auto p = temp_file("headeronly.csv");
    write_file(p, csv_header());
    REQUIRE_THROWS_WITH(load_trace(p.string(), SimTime::from_ms(1)),
                        Catch::Contains("no data rows"));
}

TEST_CASE("load_trace: 5600 rows at 1 ms spans 5.6 s") {
    auto p = temp_file("long.csv");
    std::string text = csv_header();
    for (int i = 0; i < 5600; ++i)
        text += zero_row(i * 0.001);
    write_file(p, text);
    ChannelTrace t = load_trace(p.string(), SimTime::from_ms(1));
    REQUIRE(t.size() == 5600);
    REQUIRE(t.duration() == SimTime::from_ms(5600));
}

TEST_CASE("sample_at: floor semantics over a half-open interval") {
    std::vector<PowerMatrix> ms;
    for (int k = 0; k < 3; ++k) {
        PowerMatrix m(12, 12, 0.0);
        m.set(0, 0, -k);
        ms.push_back(m);
    }
    ChannelTrace t(SimTime::from_ms(1), std::move(ms));
    REQUIRE(t.sample_at(SimTime{0}).at(0, 0) == 0.0);
    REQUIRE(t.sample_at(SimTime::from_us(1500)).at(0, 0) == -1.0);
    REQUIRE_THROWS_AS(t.sample_at(SimTime::from_ms(3)), std::out_of_range);
}

TEST_CASE("sample_at is piecewise constant within one interval") {
    BlockageScenario sc = single_path_scenario(SimTime::from_ms(100));
    sc.events.push_back(BlockageEventSpec{0, SimTime::from_ms(20), SimTime::from_ms(80), 10.0,
                                          SimTime::from_ms(25)});
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));
    SplitRng rng(3, 0);
    for (int trial = 0; trial < 200; ++trial) {
        std::int64_t k = static_cast<std::int64_t>(rng.next_below(100));
        SimTime base = SimTime::from_ms(k);
        SimTime jitter{static_cast<std::int64_t>(rng.next_below(1'000'000))};
        REQUIRE(t.sample_at(base + jitter) == t.sample_at(base));
    }
}

TEST_CASE("generate_synthetic: one clean path, everything else at the floor") {
    BlockageScenario sc = single_path_scenario(SimTime::from_ms(10));
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));
    REQUIRE(t.size() == 10);
    for (const auto& m : t.matrices())
        for (int tx = 0; tx < 12; ++tx)
            for (int rx = 0; rx < 12; ++rx)
                REQUIRE(m.at(tx, rx) == ((tx == 0 && rx == 0) ? 0.0 : -60.0));
}

TEST_CASE("generate_synthetic: 14 dB square event holds exactly on [2,3) s") {
    BlockageScenario sc = single_path_scenario(SimTime::from_sec(4));
    sc.events.push_back(
        BlockageEventSpec{0, SimTime::from_sec(2), SimTime::from_sec(3), 14.0, SimTime{0}});
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));
    REQUIRE(t.sample_at(SimTime::from_ms(1999)).at(0, 0) == 0.0);
    REQUIRE(t.sample_at(SimTime::from_ms(2000)).at(0, 0) == -14.0);
    REQUIRE(t.sample_at(SimTime::from_ms(2500)).at(0, 0) == -14.0);
    REQUIRE(t.sample_at(SimTime::from_ms(2999)).at(0, 0) == -14.0);
    REQUIRE(t.sample_at(SimTime::from_ms(3000)).at(0, 0) == 0.0);
}

TEST_CASE("generate_synthetic: blocked LOS hands the argmax to the NLOS pair") {
    BlockageScenario sc = single_path_scenario(SimTime::from_sec(4));
    sc.paths.push_back(PathSpec{4, 7, -9.0, 0, 3.0});
    sc.events.push_back(
        BlockageEventSpec{0, SimTime::from_sec(2), SimTime::from_sec(3), 14.0, SimTime{0}});
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));

    // brute-force argmax over all 144 entries at 2.5 s
    const PowerMatrix& m = t.sample_at(SimTime::from_millis(2500.0));
    int best_tx = 0, best_rx = 0;
    double best = m.at(0, 0);
    for (int tx = 0; tx < 12; ++tx)
        for (int rx = 0; rx < 12; ++rx)
            if (m.at(tx, rx) > best) {
                best = m.at(tx, rx);
                best_tx = tx;
                best_rx = rx;
            }
    REQUIRE(best_tx == 4);
    REQUIRE(best_rx == 7);
    REQUIRE(best == -9.0);
    REQUIRE(m.peak().tx == 4);
    REQUIRE(m.peak().rx == 7);
}

TEST_CASE("generate_synthetic: angular spread rolls off per index step") {
    BlockageScenario sc;
    sc.name = "spread";
    sc.duration = SimTime::from_ms(2);
    sc.paths.push_back(PathSpec{5, 5, -1.0, 2, 4.0});
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));
    const PowerMatrix& m = t.sample_at(SimTime{0});
    REQUIRE(m.at(5, 5) == -1.0);
    REQUIRE(m.at(5, 6) == -5.0);
    REQUIRE(m.at(4, 4) == -5.0);
    REQUIRE(m.at(7, 5) == -9.0);
    REQUIRE(m.at(7, 7) == -9.0);
    REQUIRE(m.at(8, 5) == -60.0); // outside the half-width
}

TEST_CASE("generate_synthetic: overlapping events add in dB") {
    BlockageScenario sc = single_path_scenario(SimTime::from_ms(100));
    sc.events.push_back(
        BlockageEventSpec{0, SimTime::from_ms(10), SimTime::from_ms(60), 5.0, SimTime{0}});
    sc.events.push_back(
        BlockageEventSpec{0, SimTime::from_ms(40), SimTime::from_ms(90), 7.0, SimTime{0}});
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));
    REQUIRE(t.sample_at(SimTime::from_ms(20)).at(0, 0) == -5.0);
    REQUIRE(t.sample_at(SimTime::from_ms(50)).at(0, 0) == -12.0);
    REQUIRE(t.sample_at(SimTime::from_ms(70)).at(0, 0) == -7.0);
}

TEST_CASE("generate_synthetic: deepening an event never raises any entry") {
    SplitRng rng(21, 5);
    for (int trial = 0; trial < 20; ++trial) {
        BlockageScenario sc = single_path_scenario(SimTime::from_ms(200));
        sc.paths.push_back(PathSpec{3, 9, -6.0, 1, 2.0});
        double depth = rng.next_range(1.0, 20.0);
        SimTime start = SimTime::from_ms(static_cast<std::int64_t>(rng.next_below(80)));
        SimTime end = start + SimTime::from_ms(20 + static_cast<std::int64_t>(rng.next_below(80)));
        sc.events.push_back(BlockageEventSpec{0, start, end, depth, SimTime::from_ms(5)});

        BlockageScenario deeper = sc;
        deeper.events[0].depth_db = depth + rng.next_range(0.5, 10.0);

        ChannelTrace a = generate_synthetic(sc, SimTime::from_ms(1));
        ChannelTrace b = generate_synthetic(deeper, SimTime::from_ms(1));
        for (std::size_t k = 0; k < a.size(); ++k)
            for (std::size_t i = 0; i < a.matrices()[k].cells().size(); ++i)
                REQUIRE(b.matrices()[k].cells()[i] <= a.matrices()[k].cells()[i]);
    }
}

TEST_CASE("trace round-trip through CSV is bit exact") {
    BlockageScenario sc = single_path_scenario(SimTime::from_ms(500));
    sc.paths.push_back(PathSpec{4, 7, -9.0, 1, 3.3});
    sc.events.push_back(BlockageEventSpec{0, SimTime::from_ms(100), SimTime::from_ms(300), 13.7,
                                          SimTime::from_ms(37)});
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));

    auto p = temp_file("roundtrip.csv");
    save_trace(t, p.string());
    ChannelTrace back = load_trace(p.string(), t.sample_interval());
    REQUIRE(back.size() == t.size());
    for (std::size_t k = 0; k < t.size(); ++k)
        REQUIRE(back.matrices()[k] == t.matrices()[k]);
}

TEST_CASE("detect_blockage_events: constant trace yields nothing") {
    BlockageScenario sc = single_path_scenario(SimTime::from_ms(400));
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));
    REQUIRE(detect_blockage_events(t, 0, 0, 6.0, SimTime::from_ms(50)).empty());
}

TEST_CASE("detect_blockage_events: square 14 dB event recovered exactly") {
    BlockageScenario sc = single_path_scenario(SimTime::from_sec(4));
    sc.events.push_back(
        BlockageEventSpec{0, SimTime::from_sec(2), SimTime::from_sec(3), 14.0, SimTime{0}});
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));
    auto events = detect_blockage_events(t, 0, 0, 6.0, SimTime::from_ms(50));
    REQUIRE(events.size() == 1);
    REQUIRE(events[0].start == SimTime::from_sec(2));
    REQUIRE(events[0].end == SimTime::from_sec(3));
    REQUIRE(events[0].max_depth_db == Approx(14.0));
}

TEST_CASE("detect_blockage_events: a short gap does not merge neighbours") {
    BlockageScenario sc = single_path_scenario(SimTime::from_sec(2));
    sc.events.push_back(
        BlockageEventSpec{0, SimTime::from_ms(400), SimTime::from_ms(700), 12.0, SimTime{0}});
    sc.events.push_back(
        BlockageEventSpec{0, SimTime::from_ms(800), SimTime::from_ms(1100), 12.0, SimTime{0}});
    ChannelTrace t = generate_synthetic(sc, SimTime::from_ms(1));
    auto events = detect_blockage_events(t, 0, 0, 6.0, SimTime::from_ms(200));
    REQUIRE(events.size() == 2);
    REQUIRE(events[0].end == SimTime::from_ms(700));
    REQUIRE(events[1].start == SimTime::from_ms(800));
}

TEST_CASE("scenario validation rejects bad shapes") {
    BlockageScenario sc = single_path_scenario(SimTime::from_ms(100));

    SECTION("ramp larger than half the window") {
        sc.events.push_back(BlockageEventSpec{0, SimTime::from_ms(10), SimTime::from_ms(30),
                                              5.0, SimTime::from_ms(11)});
        REQUIRE_THROWS_AS(sc.validate(), std::invalid_argument);
    }
    SECTION("event outside the scenario") {
        sc.events.push_back(
            BlockageEventSpec{0, SimTime::from_ms(90), SimTime::from_ms(120), 5.0, SimTime{0}});
        REQUIRE_THROWS_AS(sc.validate(), std::invalid_argument);
    }
    SECTION("unknown path id") {
        sc.events.push_back(
            BlockageEventSpec{3, SimTime::from_ms(10), SimTime::from_ms(20), 5.0, SimTime{0}});
        REQUIRE_THROWS_AS(sc.validate(), std::invalid_argument);
    }
    SECTION("beam index out of range") {
        sc.paths.push_back(PathSpec{12, 0, 0.0, 0, 1.0});
        REQUIRE_THROWS_AS(sc.validate(), std::invalid_argument);
    }
}
