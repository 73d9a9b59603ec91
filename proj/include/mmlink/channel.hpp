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

#ifndef MMLINK_CHANNEL_HPP
#define MMLINK_CHANNEL_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmlink/engine.hpp"

namespace mmlink {

/// One full pointing-angle-combination scan collapsed to per-PAC received
/// power, relative dB (0 dB = strongest unblocked level, entries <= 0 by
/// convention). Row index = TX steering vector, column = RX steering vector.
class PowerMatrix {
  public:
    PowerMatrix() : PowerMatrix(12, 12, 0.0) {}
    PowerMatrix(int n_tx, int n_rx, double fill = 0.0)
        : n_tx_(n_tx), n_rx_(n_rx), cells_(static_cast<std::size_t>(n_tx) * n_rx, fill) {
        if (n_tx <= 0 || n_rx <= 0)
            throw std::invalid_argument("PowerMatrix: codebook sizes must be positive");
    }

    int n_tx() const { return n_tx_; }
    int n_rx() const { return n_rx_; }

    double at(int tx, int rx) const { return cells_[index(tx, rx)]; }
    void set(int tx, int rx, double db) { cells_[index(tx, rx)] = db; }

    const std::vector<double>& cells() const { return cells_; }

    struct Peak {
        int tx;
        int rx;
        double db;
    };

    /// Exhaustive argmax over all entries; ties resolve to the lowest
    /// (tx, rx) pair lexicographically.
    Peak peak() const {
        Peak best{0, 0, cells_[0]};
        for (int t = 0; t < n_tx_; ++t)
            for (int r = 0; r < n_rx_; ++r)
                if (at(t, r) > best.db)
                    best = Peak{t, r, at(t, r)};
        return best;
    }

    bool operator==(const PowerMatrix&) const = default;

  private:
    std::size_t index(int tx, int rx) const {
        if (tx < 0 || tx >= n_tx_ || rx < 0 || rx >= n_rx_)
            throw std::out_of_range("PowerMatrix: beam index out of range");
        return static_cast<std::size_t>(tx) * n_rx_ + rx;
    }

    int n_tx_;
    int n_rx_;
    std::vector<double> cells_;
};

/// Time-indexed sequence of PAC scans sampled at a fixed interval. The trace
/// is the simulator's ground-truth channel; it is immutable once built.
class ChannelTrace {
  public:
    ChannelTrace(SimTime sample_interval, std::vector<PowerMatrix> matrices)
        : interval_(sample_interval), matrices_(std::move(matrices)) {
        if (interval_.ns <= 0)
            throw std::invalid_argument("ChannelTrace: sample interval must be positive");
        if (matrices_.empty())
            throw std::invalid_argument("ChannelTrace: at least one scan required");
        for (const auto& m : matrices_)
            if (m.n_tx() != matrices_[0].n_tx() || m.n_rx() != matrices_[0].n_rx())
                throw std::invalid_argument("ChannelTrace: scans disagree on codebook size");
    }

    SimTime sample_interval() const { return interval_; }
    SimTime duration() const { return interval_ * static_cast<std::int64_t>(matrices_.size()); }
    std::size_t size() const { return matrices_.size(); }
    int codebook_size_tx() const { return matrices_[0].n_tx(); }
    int codebook_size_rx() const { return matrices_[0].n_rx(); }
    const std::vector<PowerMatrix>& matrices() const { return matrices_; }

    /// Zero-order hold: the scan covering t, for 0 <= t < duration.
    const PowerMatrix& sample_at(SimTime t) const {
        if (t.ns < 0 || t >= duration())
            throw std::out_of_range("ChannelTrace::sample_at: time outside trace");
        return matrices_[static_cast<std::size_t>(t.ns / interval_.ns)];
    }

  private:
    SimTime interval_;
    std::vector<PowerMatrix> matrices_;
};

namespace detail {

inline double parse_power_field(std::string_view field, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) {
        std::ostringstream os;
        os << "row " << row << ", field " << col + 1 << ": not a finite number: '"
           << std::string(field) << "'";
        throw std::runtime_error(os.str());
    }
    return v;
}

inline void split_csv_line(const std::string& line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.emplace_back(line.data() + start, line.size() - start);
            return;
        }
        out.emplace_back(line.data() + start, comma - start);
        start = comma + 1;
    }
}

/// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_time(std::int64_t ns, std::int64_t unit_ns, int frac_digits) {
    bool neg = ns < 0;
    std::uint64_t mag = neg ? static_cast<std::uint64_t>(-ns) : static_cast<std::uint64_t>(ns);
    std::uint64_t unit = static_cast<std::uint64_t>(unit_ns);
    std::uint64_t whole = mag / unit;
    std::uint64_t frac = mag % unit;
    std::string out = neg ? "-" : "";
    out += std::to_string(whole);
    if (frac != 0) {
        std::string digits(static_cast<std::size_t>(frac_digits), '0');
        for (int i = frac_digits - 1; i >= 0; --i) {
            digits[static_cast<std::size_t>(i)] = static_cast<char>('0' + frac % 10);
            frac /= 10;
        }
        while (!digits.empty() && digits.back() == '0')
            digits.pop_back();
        out += "." + digits;
    }
    return out;
}

/// Exact decimal seconds of an integer-nanosecond time (no float artifacts).
inline std::string format_seconds(SimTime t) { return format_time(t.ns, 1'000'000'000, 9); }
inline std::string format_millis(SimTime t) { return format_time(t.ns, 1'000'000, 6); }

} // namespace detail

/// Parse a trace CSV: header row, then one row per scan with a time field
/// followed by n_tx*n_rx power values in dB, TX-major. Row numbers in
/// diagnostics count from 1 at the header.
inline ChannelTrace load_trace(const std::string& path, SimTime sample_interval,
                               int n_tx = 12, int n_rx = 12) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_trace: cannot open '" + path + "'");
    const std::size_t fields_expected = static_cast<std::size_t>(n_tx) * n_rx + 1;

    std::string line;
    std::vector<std::string_view> fields;
    std::vector<PowerMatrix> scans;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (!header_seen) {
            header_seen = true; // header row is required but its names are not validated
            continue;
        }
        detail::split_csv_line(line, fields);
        if (fields.size() != fields_expected) {
            std::ostringstream os;
            os << "load_trace: row " << row << ": expected " << fields_expected
               << " fields, found " << fields.size();
            throw std::runtime_error(os.str());
        }
        PowerMatrix m(n_tx, n_rx);
        try {
            detail::parse_power_field(fields[0], row, 0); // time column: numeric check only
            for (int t = 0; t < n_tx; ++t)
                for (int r = 0; r < n_rx; ++r) {
                    std::size_t col = 1 + static_cast<std::size_t>(t) * n_rx + r;
                    m.set(t, r, detail::parse_power_field(fields[col], row, col));
                }
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(std::string("load_trace: ") + e.what());
        }
        scans.push_back(std::move(m));
    }
    if (scans.empty())
        throw std::runtime_error("load_trace: '" + path + "' contains no data rows");
    return ChannelTrace(sample_interval, std::move(scans));
}

/// Serialize a trace so that load_trace reproduces every dB value exactly.
inline void save_trace(const ChannelTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("save_trace: cannot open '" + path + "' for writing");
    out << "time_s";
    for (int t = 0; t < trace.codebook_size_tx(); ++t)
        for (int r = 0; r < trace.codebook_size_rx(); ++r)
            out << ",tx" << t << "rx" << r;
    out << '\n';
    for (std::size_t k = 0; k < trace.size(); ++k) {
        SimTime t = trace.sample_interval() * static_cast<std::int64_t>(k);
        out << detail::format_seconds(t);
        for (double v : trace.matrices()[k].cells())
            out << ',' << detail::format_double(v);
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("save_trace: write to '" + path + "' failed");
}

/// A propagation path visible at one PAC, leaking into neighbouring beam
/// indices within `angular_spread` steps at `spread_rolloff` dB per step.
struct PathSpec {
    int tx_index = 0;
    int rx_index = 0;
    double peak_power_db = 0.0;
    int angular_spread = 0;
    double spread_rolloff_db = 3.0;
};

/// One obstruction window on one path: `depth` dB of extra attenuation,
/// entered and left over a linear ramp.
struct BlockageEventSpec {
    std::size_t path_id = 0;
    SimTime start{0};
    SimTime end{0};
    double depth_db = 0.0;
    SimTime ramp{0};
};

struct BlockageScenario {
    std::string name;
    SimTime duration{0};
    double noise_floor_db = -60.0;
    std::vector<PathSpec> paths;
    std::vector<BlockageEventSpec> events;

    void validate(int n_tx = 12, int n_rx = 12) const {
        if (duration.ns <= 0)
            throw std::invalid_argument("scenario '" + name + "': duration must be positive");
        for (std::size_t i = 0; i < paths.size(); ++i) {
            const auto& p = paths[i];
            if (p.tx_index < 0 || p.tx_index >= n_tx || p.rx_index < 0 || p.rx_index >= n_rx)
                throw std::invalid_argument("scenario '" + name + "': path " +
                                            std::to_string(i) + ": beam index out of range");
            if (p.spread_rolloff_db < 0 || p.angular_spread < 0)
                throw std::invalid_argument("scenario '" + name + "': path " +
                                            std::to_string(i) + ": negative spread/rolloff");
            if (!std::isfinite(p.peak_power_db) || p.peak_power_db > 0.0)
                throw std::invalid_argument("scenario '" + name + "': path " +
                                            std::to_string(i) + ": peak power must be <= 0 dB");
        }
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& e = events[i];
            if (e.path_id >= paths.size())
                throw std::invalid_argument("scenario '" + name + "': event " +
                                            std::to_string(i) + ": unknown path id");
            if (e.start >= e.end)
                throw std::invalid_argument("scenario '" + name + "': event " +
                                            std::to_string(i) + ": start must precede end");
            if (e.start.ns < 0 || e.end > duration)
                throw std::invalid_argument("scenario '" + name + "': event " +
                                            std::to_string(i) + ": window outside [0, duration]");
            if (e.depth_db < 0)
                throw std::invalid_argument("scenario '" + name + "': event " +
                                            std::to_string(i) + ": negative depth");
            if (e.ramp.ns < 0 || (e.ramp * 2) > (e.end - e.start))
                throw std::invalid_argument("scenario '" + name + "': event " +
                                            std::to_string(i) +
                                            ": ramp must fit twice inside the window");
        }
    }
};

namespace detail {

/// Attenuation contributed by one event at time t: 0 outside [start, end),
/// `depth` in the flat interior, linear over `ramp` at each edge.
inline double event_attenuation_db(const BlockageEventSpec& e, SimTime t) {
    if (t < e.start || t >= e.end)
        return 0.0;
    if (e.ramp.ns <= 0)
        return e.depth_db;
    double up = static_cast<double>((t - e.start).ns) / static_cast<double>(e.ramp.ns);
    double down = static_cast<double>((e.end - t).ns) / static_cast<double>(e.ramp.ns);
    return e.depth_db * std::min({1.0, up, down});
}

} // namespace detail

/// Render a scenario to a trace. Each PAC's power at time t is the max over
/// paths of (peak - rolloff * Chebyshev index distance - active blockage
/// attenuation), floored at the scenario noise floor. Overlapping events on
/// one path add their attenuations in dB.
inline ChannelTrace generate_synthetic(const BlockageScenario& scenario, SimTime sample_interval,
                                       int n_tx = 12, int n_rx = 12) {
    scenario.validate(n_tx, n_rx);
    if (sample_interval.ns <= 0)
        throw std::invalid_argument("generate_synthetic: sample interval must be positive");

    const std::size_t n_samples =
        static_cast<std::size_t>((scenario.duration.ns + sample_interval.ns - 1) /
                                 sample_interval.ns);
    std::vector<PowerMatrix> scans;
    scans.reserve(n_samples);
    std::vector<double> path_att(scenario.paths.size());

    for (std::size_t k = 0; k < n_samples; ++k) {
        SimTime t = sample_interval * static_cast<std::int64_t>(k);
        std::fill(path_att.begin(), path_att.end(), 0.0);
        for (const auto& e : scenario.events)
            path_att[e.path_id] += detail::event_attenuation_db(e, t);

        PowerMatrix m(n_tx, n_rx, scenario.noise_floor_db);
        for (std::size_t p = 0; p < scenario.paths.size(); ++p) {
            const auto& path = scenario.paths[p];
            int s = path.angular_spread;
            for (int dt = -s; dt <= s; ++dt)
                for (int dr = -s; dr <= s; ++dr) {
                    int tx = path.tx_index + dt;
                    int rx = path.rx_index + dr;
                    if (tx < 0 || tx >= n_tx || rx < 0 || rx >= n_rx)
                        continue;
                    int dist = std::max(std::abs(dt), std::abs(dr));
                    double power = path.peak_power_db - path.spread_rolloff_db * dist -
                                   path_att[p];
                    power = std::max(power, scenario.noise_floor_db);
                    if (power > m.at(tx, rx))
                        m.set(tx, rx, power);
                }
        }
        scans.push_back(std::move(m));
    }
    return ChannelTrace(sample_interval, std::move(scans));
}

struct DetectedBlockage {
    SimTime start{0};
    SimTime end{0};
    double max_depth_db = 0.0;
};

/// Maximal intervals where one PAC's power sits at least `threshold_db`
/// below its trace-wide 95th-percentile level, keeping intervals no shorter
/// than `min_duration`. Depth is measured from the same reference level.
inline std::vector<DetectedBlockage> detect_blockage_events(const ChannelTrace& trace, int tx,
                                                            int rx, double threshold_db,
                                                            SimTime min_duration) {
    if (threshold_db <= 0)
        throw std::invalid_argument("detect_blockage_events: threshold must be positive");

    std::vector<double> series;
    series.reserve(trace.size());
    for (const auto& m : trace.matrices())
        series.push_back(m.at(tx, rx));

    std::vector<double> sorted = series;
    std::sort(sorted.begin(), sorted.end());
    // nearest-rank 95th percentile
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(sorted.size())));
    double reference = sorted[std::min(sorted.size() - 1, rank == 0 ? 0 : rank - 1)];
    double cutoff = reference - threshold_db;

    std::vector<DetectedBlockage> out;
    const SimTime dt = trace.sample_interval();
    std::size_t i = 0;
    while (i < series.size()) {
        if (series[i] > cutoff) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double worst = series[i];
        while (j + 1 < series.size() && series[j + 1] <= cutoff) {
            ++j;
            worst = std::min(worst, series[j]);
        }
        DetectedBlockage ev;
        ev.start = dt * static_cast<std::int64_t>(i);
        ev.end = dt * static_cast<std::int64_t>(j + 1);
        ev.max_depth_db = reference - worst;
        if (ev.end - ev.start >= min_duration)
            out.push_back(ev);
        i = j + 1;
    }
    return out;
}

} // namespace mmlink

#endif // MMLINK_CHANNEL_HPP
