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

#ifndef MMLINK_CONFIG_HPP
#define MMLINK_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmlink/channel.hpp"
#include "mmlink/sim.hpp"

namespace mmlink {

/// Malformed or semantically invalid configuration input. Messages carry
/// "<source>:<line>:" prefixes where a location is known.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Minimal TOML-subset document: `[section]` tables, `[[name]]` arrays of
/// tables, `key = value` pairs with number, quoted-string and boolean
/// values, `#` comments. This one format carries both scenarios and
/// simulator configuration.
class ConfigDoc {
  public:
    struct Value {
        enum class Kind { Number, String, Boolean };
        Kind kind = Kind::Number;
        double number = 0.0;
        std::string text;
        bool boolean = false;
        std::size_t line = 0;
    };

    struct Table {
        std::map<std::string, Value> kv;
        std::size_t line = 0;
    };

    static ConfigDoc parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    static ConfigDoc parse_string(const std::string& text, const std::string& source) {
        ConfigDoc doc;
        doc.source_ = source;
        Table* current = nullptr;
        std::size_t line_no = 0;
        std::istringstream in(text);
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string line = strip(raw);
            if (line.empty())
                continue;
            if (line.rfind("[[", 0) == 0) {
                std::size_t close = line.find("]]");
                if (close == std::string::npos)
                    doc.fail(line_no, "unterminated [[table]] header");
                std::string name = strip(line.substr(2, close - 2));
                if (name.empty())
                    doc.fail(line_no, "empty table name");
                doc.arrays_[name].push_back(Table{{}, line_no});
                current = &doc.arrays_[name].back();
            } else if (line[0] == '[') {
                std::size_t close = line.find(']');
                if (close == std::string::npos)
                    doc.fail(line_no, "unterminated [section] header");
                std::string name = strip(line.substr(1, close - 1));
                if (name.empty())
                    doc.fail(line_no, "empty section name");
                if (doc.sections_.count(name))
                    doc.fail(line_no, "duplicate section [" + name + "]");
                doc.sections_[name] = Table{{}, line_no};
                current = &doc.sections_[name];
            } else {
                std::size_t eq = line.find('=');
                if (eq == std::string::npos)
                    doc.fail(line_no, "expected 'key = value'");
                std::string key = strip(line.substr(0, eq));
                std::string val = strip(line.substr(eq + 1));
                if (key.empty())
                    doc.fail(line_no, "empty key");
                if (current == nullptr)
                    doc.fail(line_no, "key '" + key + "' appears before any section");
                if (current->kv.count(key))
                    doc.fail(line_no, "duplicate key '" + key + "'");
                current->kv[key] = doc.parse_value(val, line_no);
            }
        }
        return doc;
    }

    const std::string& source() const { return source_; }

    const Table* section(const std::string& name) const {
        auto it = sections_.find(name);
        return it == sections_.end() ? nullptr : &it->second;
    }

    const std::vector<Table>& tables(const std::string& name) const {
        static const std::vector<Table> empty;
        auto it = arrays_.find(name);
        return it == arrays_.end() ? empty : it->second;
    }

    std::vector<std::string> section_names() const {
        std::vector<std::string> out;
        for (const auto& [k, _] : sections_)
            out.push_back(k);
        return out;
    }
    std::vector<std::string> array_names() const {
        std::vector<std::string> out;
        for (const auto& [k, _] : arrays_)
            out.push_back(k);
        return out;
    }

    [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
    }

  private:
    Value parse_value(const std::string& text, std::size_t line_no) const {
        Value v;
        v.line = line_no;
        if (text.empty())
            fail(line_no, "empty value");
        if (text.front() == '"') {
            if (text.size() < 2 || text.back() != '"')
                fail(line_no, "unterminated string");
            v.kind = Value::Kind::String;
            v.text = text.substr(1, text.size() - 2);
            return v;
        }
        if (text == "true" || text == "false") {
            v.kind = Value::Kind::Boolean;
            v.boolean = text == "true";
            return v;
        }
        double num = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), num);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
            fail(line_no, "cannot parse value '" + text + "'");
        v.kind = Value::Kind::Number;
        v.number = num;
        return v;
    }

    // Trim whitespace and a trailing comment. A '#' inside a quoted string
    // does not start a comment.
    static std::string strip(const std::string& s) {
        std::string out;
        bool in_string = false;
        for (char c : s) {
            if (c == '"')
                in_string = !in_string;
            if (c == '#' && !in_string)
                break;
            out.push_back(c);
        }
        std::size_t b = out.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            return "";
        std::size_t e = out.find_last_not_of(" \t\r");
        return out.substr(b, e - b + 1);
    }

    std::string source_;
    std::map<std::string, Table> sections_;
    std::map<std::string, std::vector<Table>> arrays_;
};

namespace detail {

/// Typed access into one table with line-numbered diagnostics and unknown
/// key rejection.
class TableView {
  public:
    TableView(const ConfigDoc& doc, const ConfigDoc::Table& table, std::string name)
        : doc_(&doc), table_(&table), name_(std::move(name)) {}

    bool has(const std::string& key) const { return table_->kv.count(key) > 0; }

    double number(const std::string& key, double fallback) const {
        auto it = table_->kv.find(key);
        if (it == table_->kv.end())
            return fallback;
        if (it->second.kind != ConfigDoc::Value::Kind::Number)
            doc_->fail(it->second.line, name_ + "." + key + ": expected a number");
        return it->second.number;
    }

    double number_required(const std::string& key) const {
        auto it = table_->kv.find(key);
        if (it == table_->kv.end())
            doc_->fail(table_->line, name_ + ": missing required key '" + key + "'");
        if (it->second.kind != ConfigDoc::Value::Kind::Number)
            doc_->fail(it->second.line, name_ + "." + key + ": expected a number");
        return it->second.number;
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        auto it = table_->kv.find(key);
        if (it == table_->kv.end())
            return fallback;
        double n = number(key, 0.0);
        if (n != std::floor(n))
            doc_->fail(it->second.line, name_ + "." + key + ": expected an integer");
        return static_cast<std::int64_t>(n);
    }

    std::int64_t integer_required(const std::string& key) const {
        double n = number_required(key);
        auto it = table_->kv.find(key);
        if (n != std::floor(n))
            doc_->fail(it->second.line, name_ + "." + key + ": expected an integer");
        return static_cast<std::int64_t>(n);
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        auto it = table_->kv.find(key);
        if (it == table_->kv.end())
            return fallback;
        if (it->second.kind != ConfigDoc::Value::Kind::String)
            doc_->fail(it->second.line, name_ + "." + key + ": expected a quoted string");
        return it->second.text;
    }

    void reject_unknown(const std::set<std::string>& allowed) const {
        for (const auto& [key, value] : table_->kv)
            if (!allowed.count(key))
                doc_->fail(value.line, name_ + ": unknown key '" + key + "'");
    }

  private:
    const ConfigDoc* doc_;
    const ConfigDoc::Table* table_;
    std::string name_;
};

} // namespace detail

/// Scenario plus the sample interval it should be rendered at.
struct ScenarioSpec {
    BlockageScenario scenario;
    SimTime sample_interval = SimTime::from_ms(1);
};

inline ScenarioSpec scenario_from_document(const ConfigDoc& doc) {
    const auto* sec = doc.section("scenario");
    if (sec == nullptr)
        throw ConfigError(doc.source() + ": missing [scenario] section");
    detail::TableView s(doc, *sec, "scenario");
    s.reject_unknown({"name", "duration_s", "sample_interval_ms", "noise_floor_db"});

    ScenarioSpec spec;
    spec.scenario.name = s.text("name", "unnamed");
    spec.scenario.duration = SimTime::from_seconds(s.number_required("duration_s"));
    spec.sample_interval = SimTime::from_millis(s.number("sample_interval_ms", 1.0));
    spec.scenario.noise_floor_db = s.number("noise_floor_db", -60.0);

    for (const auto& t : doc.tables("path")) {
        detail::TableView p(doc, t, "path");
        p.reject_unknown({"tx", "rx", "peak_db", "spread", "rolloff_db"});
        PathSpec path;
        path.tx_index = static_cast<int>(p.integer_required("tx"));
        path.rx_index = static_cast<int>(p.integer_required("rx"));
        path.peak_power_db = p.number_required("peak_db");
        path.angular_spread = static_cast<int>(p.integer("spread", 0));
        path.spread_rolloff_db = p.number("rolloff_db", 3.0);
        spec.scenario.paths.push_back(path);
    }
    for (const auto& t : doc.tables("event")) {
        detail::TableView e(doc, t, "event");
        e.reject_unknown({"path", "start_s", "end_s", "depth_db", "ramp_ms"});
        BlockageEventSpec ev;
        ev.path_id = static_cast<std::size_t>(e.integer_required("path"));
        ev.start = SimTime::from_seconds(e.number_required("start_s"));
        ev.end = SimTime::from_seconds(e.number_required("end_s"));
        ev.depth_db = e.number_required("depth_db");
        ev.ramp = SimTime::from_millis(e.number("ramp_ms", 0.0));
        spec.scenario.events.push_back(ev);
    }

    try {
        spec.scenario.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(doc.source() + ": " + e.what());
    }
    if (spec.sample_interval.ns <= 0)
        throw ConfigError(doc.source() + ": sample_interval_ms must be positive");
    return spec;
}

/// Fold optional [ssburst]/[link]/[beam]/[stack] sections over defaults.
inline SimConfig sim_config_from_document(const ConfigDoc& doc, SimConfig base = {}) {
    if (const auto* sec = doc.section("ssburst")) {
        detail::TableView v(doc, *sec, "ssburst");
        v.reject_unknown({"period_ms", "burst_ms", "n_blocks"});
        base.ssburst.set_period = SimTime::from_millis(v.number("period_ms", 20.0));
        base.ssburst.burst_duration = SimTime::from_millis(v.number("burst_ms", 5.0));
        base.ssburst.n_tx_blocks = static_cast<int>(v.integer("n_blocks", 12));
    }
    if (const auto* sec = doc.section("link")) {
        detail::TableView v(doc, *sec, "link");
        v.reject_unknown({"bandwidth_hz", "peak_sinr_db", "slot_us", "overhead",
                          "ss_symbol_fraction", "harq_processes", "harq_rtt_slots",
                          "max_harq_tx", "cqi_delay_slots", "mcs_table"});
        base.link.bandwidth_hz = v.number("bandwidth_hz", base.link.bandwidth_hz);
        base.link.peak_sinr_db = v.number("peak_sinr_db", base.link.peak_sinr_db);
        base.link.slot_duration =
            SimTime{static_cast<std::int64_t>(std::llround(v.number("slot_us", 125.0) * 1e3))};
        base.link.overhead_fraction = v.number("overhead", base.link.overhead_fraction);
        base.link.ss_symbol_fraction =
            v.number("ss_symbol_fraction", base.link.ss_symbol_fraction);
        base.link.harq_processes =
            static_cast<int>(v.integer("harq_processes", base.link.harq_processes));
        base.link.harq_rtt_slots =
            static_cast<int>(v.integer("harq_rtt_slots", base.link.harq_rtt_slots));
        base.link.max_harq_tx = static_cast<int>(v.integer("max_harq_tx", base.link.max_harq_tx));
        base.link.cqi_delay_slots =
            static_cast<int>(v.integer("cqi_delay_slots", base.link.cqi_delay_slots));
        std::string mcs_path = v.text("mcs_table", "");
        if (!mcs_path.empty())
            base.mcs_table = load_mcs_table(mcs_path);
    }
    if (const auto* sec = doc.section("beam")) {
        detail::TableView v(doc, *sec, "beam");
        v.reject_unknown({"hysteresis_db"});
        base.hysteresis_db = v.number("hysteresis_db", base.hysteresis_db);
    }
    if (const auto* sec = doc.section("stack")) {
        detail::TableView v(doc, *sec, "stack");
        v.reject_unknown({"rlc_buffer_bytes", "core_one_way_ms", "mss", "min_rto_ms",
                          "initial_rto_ms", "initial_cwnd_segments", "initial_ssthresh_bytes",
                          "tcp"});
        base.rlc_capacity_bytes =
            static_cast<std::uint64_t>(v.integer("rlc_buffer_bytes",
                                                 static_cast<std::int64_t>(base.rlc_capacity_bytes)));
        base.core.one_way_delay = SimTime::from_millis(
            v.number("core_one_way_ms", base.core.one_way_delay.millis()));
        base.tcp.mss = static_cast<std::uint64_t>(
            v.integer("mss", static_cast<std::int64_t>(base.tcp.mss)));
        base.tcp.min_rto = SimTime::from_millis(v.number("min_rto_ms", base.tcp.min_rto.millis()));
        base.tcp.initial_rto =
            SimTime::from_millis(v.number("initial_rto_ms", base.tcp.initial_rto.millis()));
        base.tcp.initial_cwnd_segments = static_cast<std::uint64_t>(v.integer(
            "initial_cwnd_segments", static_cast<std::int64_t>(base.tcp.initial_cwnd_segments)));
        base.tcp.initial_ssthresh_bytes = static_cast<std::uint64_t>(v.integer(
            "initial_ssthresh_bytes", static_cast<std::int64_t>(base.tcp.initial_ssthresh_bytes)));
        std::string variant = v.text("tcp", "newreno");
        if (variant == "newreno")
            base.tcp.variant = TcpVariant::NewReno;
        else if (variant == "cubic")
            base.tcp.variant = TcpVariant::Cubic;
        else
            doc.fail(sec->line, "stack.tcp: unknown variant '" + variant +
                                    "' (expected \"newreno\" or \"cubic\")");
    }
    if (const auto* sec = doc.section("run")) {
        detail::TableView v(doc, *sec, "run");
        v.reject_unknown({"seed", "window_ms", "arch", "out"});
        base.sample_window = SimTime::from_millis(v.number("window_ms", 100.0));
    }
    return base;
}

/// Names accepted by make-scenario.
inline std::vector<std::string> bundled_scenario_names() {
    return {"paper_fig6", "static", "worst_case_analog"};
}

/// Built-in scenarios. `paper_fig6` reconstructs the measured three-event
/// human-blockage structure: a LOS path plus a 9 dB weaker reflected path,
/// with the LOS attenuated 14 dB over [2,3], [3.2,3.3] and [3.4,3.6] s.
/// `worst_case_analog` places the pre- and post-change best pairs in the
/// same RX column so an analog UE needs the full 12-set sweep to react.
inline ScenarioSpec bundled_scenario(const std::string& name) {
    ScenarioSpec spec;
    spec.sample_interval = SimTime::from_ms(1);
    BlockageScenario& sc = spec.scenario;
    sc.name = name;
    sc.noise_floor_db = -60.0;
    if (name == "paper_fig6") {
        sc.duration = SimTime::from_millis(5600.0);
        sc.paths.push_back(PathSpec{0, 0, 0.0, 0, 3.0});
        sc.paths.push_back(PathSpec{4, 7, -9.0, 0, 3.0});
        sc.events.push_back(BlockageEventSpec{0, SimTime::from_ms(2000), SimTime::from_ms(3000),
                                              14.0, SimTime::from_ms(100)});
        sc.events.push_back(BlockageEventSpec{0, SimTime::from_ms(3200), SimTime::from_ms(3300),
                                              14.0, SimTime::from_ms(50)});
        sc.events.push_back(BlockageEventSpec{0, SimTime::from_ms(3400), SimTime::from_ms(3600),
                                              14.0, SimTime::from_ms(100)});
    } else if (name == "static") {
        sc.duration = SimTime::from_ms(2000);
        sc.paths.push_back(PathSpec{0, 0, 0.0, 0, 3.0});
    } else if (name == "worst_case_analog") {
        sc.duration = SimTime::from_ms(1000);
        sc.paths.push_back(PathSpec{0, 0, 0.0, 0, 3.0});
        sc.paths.push_back(PathSpec{5, 0, -3.0, 0, 3.0});
        // the reflected path is hidden until the LOS breaks at 246 ms, one
        // millisecond after burst set 12 rescanned RX column 0
        sc.events.push_back(
            BlockageEventSpec{1, SimTime{0}, SimTime::from_ms(246), 25.0, SimTime{0}});
        sc.events.push_back(
            BlockageEventSpec{0, SimTime::from_ms(246), SimTime::from_ms(1000), 30.0, SimTime{0}});
    } else {
        std::string names;
        for (const auto& n : bundled_scenario_names())
            names += (names.empty() ? "" : ", ") + n;
        throw ConfigError("unknown scenario '" + name + "' (available: " + names + ")");
    }
    sc.validate();
    return spec;
}

/// Serialize a scenario document, config sections spelled out with their
/// defaults so every constant of the experiment is visible in one file.
inline std::string scenario_document_text(const ScenarioSpec& spec) {
    const SimConfig defaults;
    std::ostringstream os;
    os << "# mmlink scenario\n";
    os << "[scenario]\n";
    os << "name = \"" << spec.scenario.name << "\"\n";
    os << "duration_s = " << detail::format_seconds(spec.scenario.duration) << "\n";
    os << "sample_interval_ms = " << detail::format_millis(spec.sample_interval)
       << "\n";
    os << "noise_floor_db = " << detail::format_double(spec.scenario.noise_floor_db) << "\n";
    for (const auto& p : spec.scenario.paths) {
        os << "\n[[path]]\n";
        os << "tx = " << p.tx_index << "\n";
        os << "rx = " << p.rx_index << "\n";
        os << "peak_db = " << detail::format_double(p.peak_power_db) << "\n";
        os << "spread = " << p.angular_spread << "\n";
        os << "rolloff_db = " << detail::format_double(p.spread_rolloff_db) << "\n";
    }
    for (const auto& e : spec.scenario.events) {
        os << "\n[[event]]\n";
        os << "path = " << e.path_id << "\n";
        os << "start_s = " << detail::format_seconds(e.start) << "\n";
        os << "end_s = " << detail::format_seconds(e.end) << "\n";
        os << "depth_db = " << detail::format_double(e.depth_db) << "\n";
        os << "ramp_ms = " << detail::format_millis(e.ramp) << "\n";
    }
    os << "\n[ssburst]\n";
    os << "period_ms = " << detail::format_millis(defaults.ssburst.set_period) << "\n";
    os << "burst_ms = " << detail::format_millis(defaults.ssburst.burst_duration)
       << "\n";
    os << "n_blocks = " << defaults.ssburst.n_tx_blocks << "\n";
    os << "\n[link]\n";
    os << "bandwidth_hz = " << detail::format_double(defaults.link.bandwidth_hz) << "\n";
    os << "peak_sinr_db = " << detail::format_double(defaults.link.peak_sinr_db) << "\n";
    os << "slot_us = " << detail::format_double(defaults.link.slot_duration.ns / 1e3) << "\n";
    os << "overhead = " << detail::format_double(defaults.link.overhead_fraction) << "\n";
    os << "harq_processes = " << defaults.link.harq_processes << "\n";
    os << "harq_rtt_slots = " << defaults.link.harq_rtt_slots << "\n";
    os << "max_harq_tx = " << defaults.link.max_harq_tx << "\n";
    os << "cqi_delay_slots = " << defaults.link.cqi_delay_slots << "\n";
    os << "\n[beam]\n";
    os << "hysteresis_db = " << detail::format_double(defaults.hysteresis_db) << "\n";
    os << "\n[stack]\n";
    os << "rlc_buffer_bytes = " << defaults.rlc_capacity_bytes << "\n";
    os << "core_one_way_ms = " << detail::format_millis(defaults.core.one_way_delay)
       << "\n";
    os << "mss = " << defaults.tcp.mss << "\n";
    os << "min_rto_ms = " << detail::format_millis(defaults.tcp.min_rto) << "\n";
    os << "initial_cwnd_segments = " << defaults.tcp.initial_cwnd_segments << "\n";
    os << "initial_ssthresh_bytes = " << defaults.tcp.initial_ssthresh_bytes << "\n";
    os << "tcp = \"newreno\"\n";
    os << "\n[run]\n";
    os << "seed = 1\n";
    os << "window_ms = 100\n";
    return os.str();
}

inline void write_scenario_file(const ScenarioSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_scenario_file: cannot open '" + path + "'");
    out << scenario_document_text(spec);
    if (!out)
        throw std::runtime_error("write_scenario_file: write to '" + path + "' failed");
}

} // namespace mmlink

#endif // MMLINK_CONFIG_HPP
