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

#ifndef MMLINK_SIM_HPP
#define MMLINK_SIM_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mmlink/beam.hpp"
#include "mmlink/channel.hpp"
#include "mmlink/engine.hpp"
#include "mmlink/phy.hpp"
#include "mmlink/rlc.hpp"
#include "mmlink/stack.hpp"

namespace mmlink {

struct SimConfig {
    SsBurstConfig ssburst;
    LinkConfig link;
    McsTable mcs_table = default_mcs_table();
    double hysteresis_db = 0.0;
    std::uint64_t rlc_capacity_bytes = 5ull << 20;
    CoreNetwork core;
    TcpConfig tcp;
    SimTime sample_window = SimTime::from_ms(100);
};

struct SimCounters {
    PhyCounters phy;
    std::uint64_t phy_in_flight_end = 0;

    std::uint64_t rlc_accepted = 0;
    std::uint64_t rlc_delivered = 0;
    std::uint64_t rlc_dropped_bytes = 0;
    std::uint64_t rlc_dropped_segments = 0;
    std::uint64_t rlc_requeued = 0;
    std::uint64_t rlc_occupancy_end = 0;
    std::uint64_t rlc_at_phy_end = 0;
    std::uint64_t max_rlc_occupancy = 0;

    std::uint64_t tcp_offered = 0;       ///< sender bytes emitted, retransmissions included
    std::uint64_t tcp_acked = 0;         ///< unique bytes cumulatively acknowledged
    std::uint64_t tcp_raw_delivered = 0; ///< receiver arrivals, duplicates included
    std::uint64_t tcp_app_delivered = 0; ///< in-order bytes handed to the application
    std::uint64_t tcp_fast_retransmits = 0;
    std::uint64_t tcp_timeouts = 0;

    std::uint64_t events_scheduled = 0;
    std::uint64_t events_dispatched = 0;
    std::uint64_t events_pending = 0;
    std::uint64_t ss_bursts_dispatched = 0;
    std::uint64_t beam_switches = 0;

    bool phy_conservation_ok = false;
    bool rlc_conservation_ok = false;
};

struct SimResult {
    UeArchitecture arch = UeArchitecture::Digital;
    std::vector<TimeSeriesRecord> rows;
    SimCounters counters;
};

/// One end-to-end run: full-buffer TCP through a fixed-delay core into the
/// gNB RLC, slot-clocked PHY with HARQ over the trace channel, SS-burst
/// measurement and beam selection per UE architecture. Single-threaded; one
/// instance per run.
class Simulation {
  public:
    Simulation(const ChannelTrace& trace, UeArchitecture arch, SimConfig cfg)
        : trace_(trace), arch_(arch), cfg_(std::move(cfg)),
          store_(trace.codebook_size_tx(), trace.codebook_size_rx()),
          rlc_(cfg_.rlc_capacity_bytes), phy_(cfg_.link, cfg_.mcs_table) {
        cfg_.ssburst.validate();
        cfg_.link.validate();
        cfg_.core.validate();
        sender_ = std::make_unique<TcpSender>(
            cfg_.tcp, [this](std::uint64_t seq, std::uint64_t len, bool) {
                SimTime arrival = engine_.now() + cfg_.core.one_way_delay;
                engine_.schedule(arrival, EventKind::PacketArrival, [this, seq, len] {
                    rlc_.enqueue(seq, len, engine_.now());
                });
            });
    }

    // event handlers capture `this`
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    SimResult run() {
        const SimTime duration = trace_.duration();

        initial_access(store_, trace_, SimTime{0});
        active_pair_ = select_beam_pair(store_, BeamPair{0, 0}, 0.0);

        std::int64_t set_index = 0;
        for (SimTime b{0}; b < duration; b += cfg_.ssburst.set_period, ++set_index) {
            engine_.schedule(b, EventKind::SsBurstStart, [this, b, set_index] {
                on_burst_start(b, set_index);
            });
            engine_.schedule(b + cfg_.ssburst.burst_duration, EventKind::TimerExpiry,
                             [this] { on_burst_end(); });
        }
        for (SimTime s = cfg_.sample_window; s <= duration; s += cfg_.sample_window)
            engine_.schedule(s, EventKind::TimerExpiry, [this, s] { on_sample(s); });
        engine_.schedule(duration, EventKind::TraceEnd, [] {});
        engine_.schedule(SimTime{0}, EventKind::SlotBoundary, [this] { on_slot(); });
        engine_.schedule(SimTime{0}, EventKind::TimerExpiry, [this] {
            sender_->start(engine_.now());
            sync_tcp_timer();
        });

        engine_.run_until(duration);

        SimResult res;
        res.arch = arch_;
        res.rows = std::move(rows_);
        fill_counters(res.counters);
        return res;
    }

    const Engine& engine() const { return engine_; }

  private:
    void on_burst_start(SimTime burst_start, std::int64_t set_index) {
        for (const auto& [t, tx] : ss_block_schedule(cfg_.ssburst, burst_start)) {
            if (t >= trace_.duration())
                continue;
            int tx_index = tx;
            SimTime bt = t;
            engine_.schedule(bt, EventKind::SsBlock, [this, bt, tx_index, set_index] {
                measure_ss_block(arch_, store_, trace_, bt, tx_index, set_index);
            });
        }
    }

    void on_burst_end() {
        BeamPair next = select_beam_pair(store_, active_pair_, cfg_.hysteresis_db);
        if (!(next == active_pair_)) {
            active_pair_ = next;
            ++beam_switches_;
        }
    }

    void on_slot() {
        const SimTime t = engine_.now();
        const SimTime slot = cfg_.link.slot_duration;

        double sinr = compute_sinr(trace_, t, active_pair_, cfg_.link);
        last_sinr_ = sinr;
        sinr_history_.push_back(sinr);
        if (sinr_history_.size() > static_cast<std::size_t>(cfg_.link.cqi_delay_slots) + 1)
            sinr_history_.pop_front();
        double reported = sinr_history_.front();

        auto outcome = phy_.step(t, sinr, reported, slot_has_ss(t), rlc_);
        if (!outcome.delivered.empty()) {
            engine_.schedule(t + slot, EventKind::PacketArrival,
                             [this, chunks = std::move(outcome.delivered)] {
                                 on_tb_delivered(chunks);
                             });
        }
        if (!outcome.surrendered.empty()) {
            SimTime due = t + slot * cfg_.link.harq_rtt_slots;
            engine_.schedule(due, EventKind::TimerExpiry,
                             [this, chunks = std::move(outcome.surrendered)] {
                                 rlc_.requeue(chunks);
                             });
        }
        max_occupancy_ = std::max(max_occupancy_, rlc_.occupancy());

        SimTime next = t + slot;
        if (next < trace_.duration())
            engine_.schedule(next, EventKind::SlotBoundary, [this] { on_slot(); });
    }

    void on_tb_delivered(const std::vector<RlcChunk>& chunks) {
        rlc_.mark_delivered(chunks);

        // One cumulative ACK per TCP-visible chunk the RLC reassembly
        // releases; chunks the RLC holds back produce no TCP signal at all.
        std::vector<std::uint64_t> acks;
        for (const auto& c : chunks)
            for (const auto& rc : rlc_rx_.push(c)) {
                tcp_rx_.on_bytes(rc.seq, rc.bytes);
                acks.push_back(tcp_rx_.ack_seq());
            }
        if (acks.empty())
            return;

        // Ideal slot-granular uplink: ACKs leave at the next slot boundary,
        // occupy one slot, then cross the core.
        const SimTime slot = cfg_.link.slot_duration;
        SimTime ul_start = ceil_to_slot(engine_.now(), slot);
        SimTime arrival = ul_start + slot + cfg_.core.one_way_delay;
        engine_.schedule(arrival, EventKind::PacketArrival, [this, acks = std::move(acks)] {
            for (std::uint64_t a : acks)
                sender_->on_ack(engine_.now(), a);
            sync_tcp_timer();
        });
    }

    void sync_tcp_timer() {
        if (!sender_->timer_deadline().has_value())
            return;
        std::uint64_t gen = sender_->timer_generation();
        if (gen == armed_generation_)
            return;
        armed_generation_ = gen;
        SimTime at = std::max(*sender_->timer_deadline(), engine_.now());
        engine_.schedule(at, EventKind::TimerExpiry, [this, gen] {
            sender_->on_timer(engine_.now(), gen);
            sync_tcp_timer();
        });
    }

    void on_sample(SimTime s) {
        TimeSeriesRecord r;
        r.t = s;
        r.sinr_db = s < trace_.duration()
                        ? compute_sinr(trace_, s, active_pair_, cfg_.link)
                        : last_sinr_;
        double wsec = cfg_.sample_window.seconds();
        std::uint64_t phy_now = phy_.counters().delivered_bytes;
        std::uint64_t app_now = tcp_rx_.in_order_bytes();
        r.phy_rate_bps = static_cast<double>(phy_now - phy_mark_) * 8.0 / wsec;
        r.tcp_goodput_bps = static_cast<double>(app_now - app_mark_) * 8.0 / wsec;
        phy_mark_ = phy_now;
        app_mark_ = app_now;
        r.rtt = sender_->last_rtt_sample().value_or(SimTime{0});
        r.beam_pair = active_pair_;
        r.rlc_occupancy_bytes = rlc_.occupancy();
        rows_.push_back(r);
    }

    bool slot_has_ss(SimTime t) const {
        const std::int64_t period = cfg_.ssburst.set_period.ns;
        const std::int64_t slot = cfg_.link.slot_duration.ns;
        std::int64_t r = t.ns % period;
        for (int k = 0; k < cfg_.ssburst.n_tx_blocks; ++k) {
            std::int64_t off =
                static_cast<std::int64_t>(k) * cfg_.ssburst.burst_duration.ns /
                cfg_.ssburst.n_tx_blocks;
            if ((off >= r && off < r + slot) ||
                (off + period >= r && off + period < r + slot))
                return true;
        }
        return false;
    }

    static SimTime ceil_to_slot(SimTime t, SimTime slot) {
        return SimTime{(t.ns + slot.ns - 1) / slot.ns * slot.ns};
    }

    void fill_counters(SimCounters& c) const {
        c.phy = phy_.counters();
        c.phy_in_flight_end = phy_.in_flight_bytes();
        c.rlc_accepted = rlc_.accepted_bytes();
        c.rlc_delivered = rlc_.delivered_bytes();
        c.rlc_dropped_bytes = rlc_.dropped_bytes();
        c.rlc_dropped_segments = rlc_.dropped_segments();
        c.rlc_requeued = rlc_.requeued_bytes();
        c.rlc_occupancy_end = rlc_.occupancy();
        c.rlc_at_phy_end = rlc_.bytes_at_phy();
        c.max_rlc_occupancy = max_occupancy_;
        c.tcp_offered = sender_->offered_bytes();
        c.tcp_acked = sender_->high_ack();
        c.tcp_raw_delivered = tcp_rx_.raw_bytes();
        c.tcp_app_delivered = tcp_rx_.in_order_bytes();
        c.tcp_fast_retransmits = sender_->fast_retransmits();
        c.tcp_timeouts = sender_->timeouts();
        c.events_scheduled = engine_.scheduled_count();
        c.events_dispatched = engine_.dispatched_count();
        c.events_pending = engine_.pending_count();
        c.ss_bursts_dispatched = engine_.dispatched_count(EventKind::SsBurstStart);
        c.beam_switches = beam_switches_;
        c.phy_conservation_ok = phy_.conservation_holds();
        c.rlc_conservation_ok = rlc_.conservation_holds();
    }

    const ChannelTrace& trace_;
    UeArchitecture arch_;
    SimConfig cfg_;

    Engine engine_;
    MeasurementStore store_;
    BeamPair active_pair_{0, 0};
    RlcAmBuffer rlc_;
    PhyLink phy_;
    RlcReceiver rlc_rx_;
    TcpReceiver tcp_rx_;
    std::unique_ptr<TcpSender> sender_;

    std::deque<double> sinr_history_;
    double last_sinr_ = 0.0;
    std::uint64_t armed_generation_ = 0;
    std::uint64_t beam_switches_ = 0;
    std::uint64_t max_occupancy_ = 0;
    std::uint64_t phy_mark_ = 0;
    std::uint64_t app_mark_ = 0;
    std::vector<TimeSeriesRecord> rows_;
};

/// Write rows in the documented output schema:
/// t_s,sinr_db,phy_rate_bps,tcp_goodput_bps,rtt_ms,tx_beam,rx_beam,rlc_bytes
inline void write_timeseries_csv(const std::vector<TimeSeriesRecord>& rows,
                                 const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_timeseries_csv: cannot open '" + path + "'");
    out << "t_s,sinr_db,phy_rate_bps,tcp_goodput_bps,rtt_ms,tx_beam,rx_beam,rlc_bytes\n";
    for (const auto& r : rows) {
        out << detail::format_seconds(r.t) << ','
            << detail::format_double(r.sinr_db) << ','
            << detail::format_double(r.phy_rate_bps) << ','
            << detail::format_double(r.tcp_goodput_bps) << ','
            << detail::format_millis(r.rtt) << ','
            << r.beam_pair.tx << ',' << r.beam_pair.rx << ','
            << r.rlc_occupancy_bytes << '\n';
    }
    if (!out)
        throw std::runtime_error("write_timeseries_csv: write to '" + path + "' failed");
}

/// Per-architecture aggregate statistics, all recomputable from the rows.
struct ArchSummary {
    double mean_sinr_db = 0.0;
    double min_sinr_db = 0.0;
    double mean_goodput_bps = 0.0;
    double rtt_p50_ms = 0.0;
    double rtt_p95_ms = 0.0;
    std::uint64_t max_rlc_bytes = 0;
    std::uint64_t dropped_bytes = 0;
    int blockage_events = 0;
};

inline double percentile_nearest_rank(std::vector<double> v, double p) {
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(v.size())));
    return v[std::min(v.size() - 1, rank == 0 ? 0 : rank - 1)];
}

inline ArchSummary summarize(const std::vector<TimeSeriesRecord>& rows,
                             std::uint64_t dropped_bytes, int blockage_events) {
    ArchSummary s;
    s.dropped_bytes = dropped_bytes;
    s.blockage_events = blockage_events;
    if (rows.empty())
        return s;
    double sinr_sum = 0.0, good_sum = 0.0;
    s.min_sinr_db = rows.front().sinr_db;
    std::vector<double> rtts;
    rtts.reserve(rows.size());
    for (const auto& r : rows) {
        sinr_sum += r.sinr_db;
        good_sum += r.tcp_goodput_bps;
        s.min_sinr_db = std::min(s.min_sinr_db, r.sinr_db);
        s.max_rlc_bytes = std::max(s.max_rlc_bytes, r.rlc_occupancy_bytes);
        rtts.push_back(r.rtt.millis());
    }
    s.mean_sinr_db = sinr_sum / static_cast<double>(rows.size());
    s.mean_goodput_bps = good_sum / static_cast<double>(rows.size());
    s.rtt_p50_ms = percentile_nearest_rank(rtts, 0.50);
    s.rtt_p95_ms = percentile_nearest_rank(rtts, 0.95);
    return s;
}

} // namespace mmlink

#endif // MMLINK_SIM_HPP
