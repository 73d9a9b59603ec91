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

#ifndef MMLINK_BEAM_HPP
#define MMLINK_BEAM_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mmlink/channel.hpp"
#include "mmlink/engine.hpp"

namespace mmlink {

/// (gNB TX steering index, UE RX steering index).
struct BeamPair {
    int tx = 0;
    int rx = 0;
    bool operator==(const BeamPair&) const = default;
    auto operator<=>(const BeamPair&) const = default;
};

/// SS burst set timing: the gNB sweeps one pilot block per TX direction
/// inside each burst, and the burst set repeats every `set_period`.
struct SsBurstConfig {
    SimTime set_period = SimTime::from_ms(20);
    SimTime burst_duration = SimTime::from_ms(5);
    int n_tx_blocks = 12;

    SimTime block_spacing() const { return SimTime{burst_duration.ns / n_tx_blocks}; }

    void validate() const {
        if (n_tx_blocks <= 0)
            throw std::invalid_argument("SsBurstConfig: need at least one SS block");
        if (!(set_period > burst_duration))
            throw std::invalid_argument("SsBurstConfig: set period must exceed burst duration");
        if (block_spacing() * n_tx_blocks > burst_duration)
            throw std::invalid_argument("SsBurstConfig: blocks do not fit in the burst");
    }
};

enum class UeArchitecture {
    Digital,    ///< observes all RX directions each burst set
    Analog,     ///< observes one RX direction per burst set, round-robin
    NoTracking, ///< keeps the initial-access pair for the whole run
};

inline std::string to_string(UeArchitecture a) {
    switch (a) {
    case UeArchitecture::Digital: return "digital";
    case UeArchitecture::Analog: return "analog";
    case UeArchitecture::NoTracking: return "none";
    }
    return "?";
}

inline std::optional<UeArchitecture> parse_architecture(const std::string& s) {
    if (s == "digital")
        return UeArchitecture::Digital;
    if (s == "analog")
        return UeArchitecture::Analog;
    if (s == "none" || s == "no-tracking" || s == "notracking")
        return UeArchitecture::NoTracking;
    return std::nullopt;
}

/// The node's possibly stale per-PAC view built from SS-burst pilots.
/// Unmeasured entries never win selection while any measured entry exists.
class MeasurementStore {
  public:
    struct Entry {
        double power_db = 0.0;
        SimTime measured_at{0};
        bool measured = false;
    };

    MeasurementStore(int n_tx = 12, int n_rx = 12)
        : n_tx_(n_tx), n_rx_(n_rx),
          entries_(static_cast<std::size_t>(n_tx) * n_rx) {}

    int n_tx() const { return n_tx_; }
    int n_rx() const { return n_rx_; }

    const Entry& at(int tx, int rx) const { return entries_[index(tx, rx)]; }

    void update(int tx, int rx, double power_db, SimTime t) {
        Entry& e = entries_[index(tx, rx)];
        e.power_db = power_db;
        e.measured_at = t;
        e.measured = true;
    }

    bool any_measured() const {
        for (const auto& e : entries_)
            if (e.measured)
                return true;
        return false;
    }

  private:
    std::size_t index(int tx, int rx) const {
        if (tx < 0 || tx >= n_tx_ || rx < 0 || rx >= n_rx_)
            throw std::out_of_range("MeasurementStore: beam index out of range");
        return static_cast<std::size_t>(tx) * n_rx_ + rx;
    }

    int n_tx_;
    int n_rx_;
    std::vector<Entry> entries_;
};

/// Burst set start times [0, period, 2*period, ...] up to and including
/// `horizon`. The burst at t=0 models the initial-access measurement.
inline std::vector<SimTime> burst_set_times(const SsBurstConfig& cfg, SimTime horizon) {
    cfg.validate();
    if (horizon.ns < 0)
        throw std::invalid_argument("burst_set_times: negative horizon");
    std::vector<SimTime> out;
    for (SimTime t{0}; t <= horizon; t += cfg.set_period)
        out.push_back(t);
    return out;
}

/// SS block k fires at burst_start + k*burst/n carrying TX direction k, so
/// all 12 gNB directions are swept once, spread evenly across the burst.
inline std::vector<std::pair<SimTime, int>> ss_block_schedule(const SsBurstConfig& cfg,
                                                              SimTime burst_start) {
    cfg.validate();
    std::vector<std::pair<SimTime, int>> out;
    out.reserve(cfg.n_tx_blocks);
    for (int k = 0; k < cfg.n_tx_blocks; ++k) {
        SimTime offset{k * cfg.burst_duration.ns / cfg.n_tx_blocks};
        out.emplace_back(burst_start + offset, k);
    }
    return out;
}

/// The analog UE listens on one RX direction per burst set, round-robin, so
/// a full spatial sweep takes n_rx burst sets (12 x 20 ms = 240 ms).
inline int analog_rx_direction(std::int64_t burst_set_index, int n_rx = 12) {
    if (burst_set_index < 0)
        throw std::invalid_argument("analog_rx_direction: negative burst set index");
    return static_cast<int>(burst_set_index % n_rx);
}

/// Fold one SS block's pilot into the store. A digital front end hears all
/// RX directions of the swept TX beam at once; an analog front end hears
/// only the burst set's round-robin RX direction; a no-tracking UE measures
/// nothing after the initial-access set (index 0).
inline void measure_ss_block(UeArchitecture arch, MeasurementStore& store,
                             const ChannelTrace& trace, SimTime t, int tx,
                             std::int64_t burst_set_index) {
    if (arch == UeArchitecture::NoTracking && burst_set_index != 0)
        return;
    if (t.ns < 0 || t >= trace.duration())
        return;
    const PowerMatrix& m = trace.sample_at(t);
    if (arch == UeArchitecture::Analog) {
        int rx = analog_rx_direction(burst_set_index, store.n_rx());
        store.update(tx, rx, m.at(tx, rx), t);
    } else {
        for (int rx = 0; rx < store.n_rx(); ++rx)
            store.update(tx, rx, m.at(tx, rx), t);
    }
}

/// Fold one whole burst set's pilots into the store.
inline void acquire_measurements(UeArchitecture arch, MeasurementStore& store,
                                 const ChannelTrace& trace, const SsBurstConfig& cfg,
                                 SimTime burst_start, std::int64_t burst_set_index) {
    for (const auto& [t, tx] : ss_block_schedule(cfg, burst_start))
        measure_ss_block(arch, store, trace, t, tx, burst_set_index);
}

/// One-shot exhaustive measurement of every PAC at time t; models the
/// initial-access stage in which the best pair is detected before tracking
/// begins.
inline void initial_access(MeasurementStore& store, const ChannelTrace& trace, SimTime t) {
    const PowerMatrix& m = trace.sample_at(t);
    for (int tx = 0; tx < store.n_tx(); ++tx)
        for (int rx = 0; rx < store.n_rx(); ++rx)
            store.update(tx, rx, m.at(tx, rx), t);
}

/// Beam-pair update rule: switch only when a strictly stronger power than
/// the current pair's stored value (plus hysteresis) has been measured.
/// Among equals the current pair wins, then the lowest (tx, rx) pair.
inline BeamPair select_beam_pair(const MeasurementStore& store, BeamPair current,
                                 double hysteresis_db = 0.0) {
    if (!store.any_measured())
        throw std::logic_error("select_beam_pair: no measured entries");

    BeamPair best{-1, -1};
    double best_db = 0.0;
    for (int tx = 0; tx < store.n_tx(); ++tx)
        for (int rx = 0; rx < store.n_rx(); ++rx) {
            const auto& e = store.at(tx, rx);
            if (!e.measured)
                continue;
            if (best.tx < 0 || e.power_db > best_db) {
                best = BeamPair{tx, rx};
                best_db = e.power_db;
            }
        }

    const auto& cur = store.at(current.tx, current.rx);
    if (cur.measured && cur.power_db + hysteresis_db >= best_db)
        return current;
    return best;
}

} // namespace mmlink

#endif // MMLINK_BEAM_HPP
