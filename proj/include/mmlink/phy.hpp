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

#ifndef MMLINK_PHY_HPP
#define MMLINK_PHY_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmlink/beam.hpp"
#include "mmlink/channel.hpp"
#include "mmlink/engine.hpp"
#include "mmlink/rlc.hpp"

namespace mmlink {

/// Radio abstraction parameters. peak_sinr anchors the trace's 0 dB relative
/// power to an absolute SINR; everything else shapes per-slot capacity and
/// HARQ behaviour.
struct LinkConfig {
    double bandwidth_hz = 4.0e8;
    double peak_sinr_db = 30.0;
    SimTime slot_duration = SimTime::from_us(125);
    double overhead_fraction = 0.14;
    double ss_symbol_fraction = 2.0 / 14.0; ///< capacity lost in SS-carrying slots
    int harq_processes = 8;
    int harq_rtt_slots = 4;
    int max_harq_tx = 3;
    int cqi_delay_slots = 4; ///< staleness of the SINR used for MCS selection

    void validate() const {
        if (bandwidth_hz <= 0)
            throw std::invalid_argument("LinkConfig: bandwidth must be positive");
        if (overhead_fraction < 0 || overhead_fraction >= 1)
            throw std::invalid_argument("LinkConfig: overhead fraction must be in [0, 1)");
        if (ss_symbol_fraction < 0 || ss_symbol_fraction >= 1)
            throw std::invalid_argument("LinkConfig: SS symbol fraction must be in [0, 1)");
        if (slot_duration.ns <= 0)
            throw std::invalid_argument("LinkConfig: slot duration must be positive");
        if (harq_processes < harq_rtt_slots)
            throw std::invalid_argument("LinkConfig: need at least harq_rtt_slots processes");
        if (max_harq_tx < 1 || harq_rtt_slots < 1 || harq_processes < 1 || cqi_delay_slots < 0)
            throw std::invalid_argument("LinkConfig: bad HARQ/CQI parameters");
    }
};

struct McsEntry {
    int index = 0;
    double min_sinr_db = 0.0;
    double spectral_efficiency = 0.0; ///< bits/s/Hz
};

/// SINR-threshold rate ladder, sorted by strictly increasing threshold and
/// efficiency.
class McsTable {
  public:
    explicit McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries)) {
        if (entries_.empty())
            throw std::invalid_argument("McsTable: empty table");
        for (std::size_t i = 1; i < entries_.size(); ++i) {
            if (!(entries_[i].min_sinr_db > entries_[i - 1].min_sinr_db))
                throw std::invalid_argument("McsTable: thresholds must be strictly increasing");
            if (!(entries_[i].spectral_efficiency > entries_[i - 1].spectral_efficiency))
                throw std::invalid_argument("McsTable: efficiencies must be strictly increasing");
        }
    }

    const std::vector<McsEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

  private:
    std::vector<McsEntry> entries_;
};

/// CQI-like default ladder: 29 entries, thresholds -6..+22 dB in 1 dB steps,
/// efficiencies 0.15..5.55 bits/s/Hz, linear in the index.
inline McsTable default_mcs_table() {
    std::vector<McsEntry> e;
    e.reserve(29);
    for (int i = 0; i < 29; ++i)
        e.push_back(McsEntry{i, -6.0 + i, 0.15 + 5.4 * i / 28.0});
    return McsTable(std::move(e));
}

/// Parse `index,min_sinr_db,spectral_efficiency` CSV (header optional).
inline McsTable load_mcs_table(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_mcs_table: cannot open '" + path + "'");
    std::vector<McsEntry> entries;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string_view> fields;
        detail::split_csv_line(line, fields);
        if (fields.size() != 3)
            throw std::runtime_error("load_mcs_table: row " + std::to_string(row) +
                                     ": expected 3 fields");
        McsEntry e;
        auto parse_int = [&](std::string_view f) {
            int v = 0;
            auto r = std::from_chars(f.data(), f.data() + f.size(), v);
            if (r.ec != std::errc{} || r.ptr != f.data() + f.size())
                throw std::runtime_error("load_mcs_table: row " + std::to_string(row) +
                                         ": bad integer '" + std::string(f) + "'");
            return v;
        };
        if (row == 1 && fields[0] == "index")
            continue;
        e.index = parse_int(fields[0]);
        e.min_sinr_db = detail::parse_power_field(fields[1], row, 1);
        e.spectral_efficiency = detail::parse_power_field(fields[2], row, 2);
        entries.push_back(e);
    }
    return McsTable(std::move(entries));
}

/// SINR of one pointing-angle pair at trace time t: the configured peak plus
/// the pair's relative power. Single link, so no interference term.
inline double compute_sinr(const ChannelTrace& trace, SimTime t, BeamPair pair,
                           const LinkConfig& cfg) {
    return cfg.peak_sinr_db + trace.sample_at(t).at(pair.tx, pair.rx);
}

/// Highest-rate entry whose threshold the SINR meets (inclusive); nullptr
/// means outage.
inline const McsEntry* select_mcs(double sinr_db, const McsTable& table) {
    const auto& e = table.entries();
    auto it = std::upper_bound(e.begin(), e.end(), sinr_db,
                               [](double s, const McsEntry& m) { return s < m.min_sinr_db; });
    if (it == e.begin())
        return nullptr;
    return &*(it - 1);
}

/// Transport block payload for one slot. SS-carrying slots lose the SS
/// symbol fraction of their capacity.
inline std::uint64_t slot_capacity_bytes(const McsEntry* mcs, const LinkConfig& cfg,
                                         bool slot_is_ss_overlap) {
    if (mcs == nullptr)
        return 0;
    double penalty = slot_is_ss_overlap ? 1.0 - cfg.ss_symbol_fraction : 1.0;
    double bytes = cfg.bandwidth_hz * mcs->spectral_efficiency *
                   (static_cast<double>(cfg.slot_duration.ns) * 1e-9) *
                   (1.0 - cfg.overhead_fraction) * penalty / 8.0;
    // The exact real value can be integral; nudge so FP rounding cannot
    // floor one byte low.
    return static_cast<std::uint64_t>(std::floor(bytes + 1e-6));
}

enum class HarqState { Idle, AwaitingRetransmit };

struct HarqProcess {
    int id = 0;
    HarqState state = HarqState::Idle;
    int tx_count = 0;
    std::uint64_t payload_bytes = 0;
    double mcs_min_sinr_db = 0.0;
    int mcs_index = -1;
    SimTime retransmit_due{0};
    std::vector<RlcChunk> chunks;
};

struct PhyCounters {
    std::uint64_t offered_bytes = 0;     ///< bytes placed into new transport blocks
    std::uint64_t delivered_bytes = 0;   ///< bytes in decoded transport blocks
    std::uint64_t surrendered_bytes = 0; ///< bytes given up after max_harq_tx
    std::uint64_t new_blocks = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t surrendered_blocks = 0;
    std::uint64_t idle_slots = 0;
};

/// Per-slot MAC/PHY: link adaptation on the reported (stale) SINR, one
/// transport block per slot, step-function BLER at the transmit-time MCS
/// threshold, synchronous HARQ with a fixed feedback RTT, surrender to RLC
/// after max_harq_tx attempts.
class PhyLink {
  public:
    PhyLink(const LinkConfig& cfg, const McsTable& table) : cfg_(cfg), table_(&table) {
        cfg_.validate();
        processes_.resize(static_cast<std::size_t>(cfg_.harq_processes));
        for (int i = 0; i < cfg_.harq_processes; ++i)
            processes_[static_cast<std::size_t>(i)].id = i;
    }

    struct SlotOutcome {
        std::uint64_t delivered_bytes = 0;
        std::vector<RlcChunk> delivered;   ///< decoded this slot
        std::vector<RlcChunk> surrendered; ///< give back to RLC after one HARQ RTT
        int retransmissions = 0;
        int mcs_index = -1; ///< MCS of the block transmitted this slot, -1 if none
    };

    /// Advance one slot. `sinr_actual_db` decides decode success;
    /// `sinr_reported_db` (stale by cqi_delay_slots) drives MCS selection
    /// for new blocks.
    SlotOutcome step(SimTime slot_t, double sinr_actual_db, double sinr_reported_db,
                     bool ss_overlap, RlcAmBuffer& rlc) {
        SlotOutcome out;

        HarqProcess* proc = due_retransmission(slot_t);
        if (proc != nullptr) {
            ++proc->tx_count;
            ++counters_.retransmissions;
            ++out.retransmissions;
            out.mcs_index = proc->mcs_index;
            if (sinr_actual_db >= proc->mcs_min_sinr_db) {
                counters_.delivered_bytes += proc->payload_bytes;
                out.delivered_bytes += proc->payload_bytes;
                out.delivered = std::move(proc->chunks);
                release(*proc);
            } else if (proc->tx_count >= cfg_.max_harq_tx) {
                counters_.surrendered_bytes += proc->payload_bytes;
                ++counters_.surrendered_blocks;
                out.surrendered = std::move(proc->chunks);
                release(*proc);
            } else {
                proc->retransmit_due = slot_t + cfg_.slot_duration * cfg_.harq_rtt_slots;
            }
            return out;
        }

        HarqProcess* free_proc = idle_process();
        if (free_proc == nullptr) {
            ++counters_.idle_slots;
            return out;
        }
        const McsEntry* mcs = select_mcs(sinr_reported_db, *table_);
        std::uint64_t cap = slot_capacity_bytes(mcs, cfg_, ss_overlap);
        if (cap == 0) {
            ++counters_.idle_slots;
            return out;
        }
        std::vector<RlcChunk> chunks = rlc.serve(cap);
        if (chunks.empty()) {
            ++counters_.idle_slots;
            return out;
        }
        std::uint64_t bytes = 0;
        for (const auto& c : chunks)
            bytes += c.bytes;
        counters_.offered_bytes += bytes;
        ++counters_.new_blocks;
        out.mcs_index = mcs->index;

        if (sinr_actual_db >= mcs->min_sinr_db) {
            counters_.delivered_bytes += bytes;
            out.delivered_bytes += bytes;
            out.delivered = std::move(chunks);
        } else if (cfg_.max_harq_tx <= 1) {
            counters_.surrendered_bytes += bytes;
            ++counters_.surrendered_blocks;
            out.surrendered = std::move(chunks);
        } else {
            free_proc->state = HarqState::AwaitingRetransmit;
            free_proc->tx_count = 1;
            free_proc->payload_bytes = bytes;
            free_proc->mcs_min_sinr_db = mcs->min_sinr_db;
            free_proc->mcs_index = mcs->index;
            free_proc->retransmit_due = slot_t + cfg_.slot_duration * cfg_.harq_rtt_slots;
            free_proc->chunks = std::move(chunks);
        }
        return out;
    }

    std::uint64_t in_flight_bytes() const {
        std::uint64_t b = 0;
        for (const auto& p : processes_)
            if (p.state != HarqState::Idle)
                b += p.payload_bytes;
        return b;
    }

    const PhyCounters& counters() const { return counters_; }

    /// offered == delivered + surrendered + in flight, exactly.
    bool conservation_holds() const {
        return counters_.offered_bytes ==
               counters_.delivered_bytes + counters_.surrendered_bytes + in_flight_bytes();
    }

  private:
    HarqProcess* due_retransmission(SimTime now) {
        HarqProcess* best = nullptr;
        for (auto& p : processes_) {
            if (p.state != HarqState::AwaitingRetransmit || p.retransmit_due > now)
                continue;
            if (best == nullptr || p.retransmit_due < best->retransmit_due ||
                (p.retransmit_due == best->retransmit_due && p.id < best->id))
                best = &p;
        }
        return best;
    }

    HarqProcess* idle_process() {
        for (auto& p : processes_)
            if (p.state == HarqState::Idle)
                return &p;
        return nullptr;
    }

    void release(HarqProcess& p) {
        p.state = HarqState::Idle;
        p.tx_count = 0;
        p.payload_bytes = 0;
        p.mcs_min_sinr_db = 0.0;
        p.mcs_index = -1;
        p.chunks.clear();
    }

    LinkConfig cfg_;
    const McsTable* table_;
    std::vector<HarqProcess> processes_;
    PhyCounters counters_;
};

} // namespace mmlink

#endif // MMLINK_PHY_HPP
