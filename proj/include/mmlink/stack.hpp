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

#ifndef MMLINK_STACK_HPP
#define MMLINK_STACK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mmlink/beam.hpp"
#include "mmlink/engine.hpp"
#include "mmlink/rlc.hpp"

namespace mmlink {

/// Fixed-delay core network between the TCP endpoint and the gNB.
struct CoreNetwork {
    SimTime one_way_delay = SimTime::from_ms(5);

    void validate() const {
        if (one_way_delay.ns <= 0)
            throw std::invalid_argument("CoreNetwork: delay must be positive");
    }
};

enum class TcpVariant { NewReno, Cubic };

enum class TcpState { SlowStart, CongestionAvoidance, FastRecovery };

struct TcpConfig {
    std::uint64_t mss = 1400;
    std::uint64_t initial_cwnd_segments = 10;
    std::uint64_t initial_ssthresh_bytes = 3'000'000;
    SimTime min_rto = SimTime::from_ms(200);
    SimTime initial_rto = SimTime::from_sec(1);
    SimTime max_rto = SimTime::from_sec(60);
    TcpVariant variant = TcpVariant::NewReno;
};

/// Full-buffer downlink TCP sender. NewReno congestion control (RFC 5681 /
/// 6582 rules, byte counted), RFC 6298 RTT estimation with Karn's algorithm,
/// exponential RTO backoff. The host wires `send` to the core-network path
/// and drives the retransmission timer through timer_deadline() /
/// on_timer().
class TcpSender {
  public:
    /// send(seq, len, is_retransmission)
    using SendFn = std::function<void(std::uint64_t, std::uint64_t, bool)>;

    TcpSender(const TcpConfig& cfg, SendFn send) : cfg_(cfg), send_(std::move(send)) {
        cwnd_ = cfg_.mss * cfg_.initial_cwnd_segments;
        ssthresh_ = cfg_.initial_ssthresh_bytes;
        rto_ = cfg_.initial_rto;
    }

    void start(SimTime now) { try_send(now); }

    std::uint64_t cwnd() const { return cwnd_; }
    std::uint64_t ssthresh() const { return ssthresh_; }
    TcpState state() const { return state_; }
    std::uint64_t bytes_in_flight() const { return next_seq_ - high_ack_; }
    std::uint64_t high_ack() const { return high_ack_; }
    std::uint64_t next_seq() const { return next_seq_; }
    std::uint64_t offered_bytes() const { return offered_; }
    std::uint64_t fast_retransmits() const { return fast_retransmits_; }
    std::uint64_t timeouts() const { return timeouts_; }
    int dup_ack_count() const { return dup_acks_; }
    SimTime srtt() const { return srtt_; }
    SimTime rto() const { return rto_; }
    std::optional<SimTime> last_rtt_sample() const { return last_rtt_sample_; }

    /// Retransmission timer the host must arm: fire on_timer(generation) at
    /// the returned deadline. A changed generation invalidates older arms.
    std::optional<SimTime> timer_deadline() const { return timer_deadline_; }
    std::uint64_t timer_generation() const { return timer_generation_; }

    void on_ack(SimTime now, std::uint64_t ack_seq) {
        if (ack_seq > next_seq_ || ack_seq < high_ack_)
            return; // stale or nonsense
        if (ack_seq == high_ack_) {
            on_duplicate_ack(now);
            return;
        }

        std::uint64_t acked = ack_seq - high_ack_;
        high_ack_ = ack_seq;
        sample_rtt(now, ack_seq);

        if (state_ == TcpState::FastRecovery) {
            if (ack_seq >= recover_) {
                cwnd_ = std::max(ssthresh_, cfg_.mss);
                state_ = cwnd_ < ssthresh_ ? TcpState::SlowStart
                                           : TcpState::CongestionAvoidance;
                dup_acks_ = 0;
            } else {
                // partial ACK: the next hole is lost too
                retransmit_from(high_ack_);
                cwnd_ = (cwnd_ > acked ? cwnd_ - acked : 0) + cfg_.mss;
                cwnd_ = std::max(cwnd_, cfg_.mss);
            }
        } else {
            dup_acks_ = 0;
            grow_window(now, acked);
        }

        arm_timer(now);
        try_send(now);
    }

    /// RTO expiry for a given arm generation; stale generations are ignored.
    void on_timer(SimTime now, std::uint64_t generation) {
        if (generation != timer_generation_ || !timer_deadline_.has_value())
            return;
        if (bytes_in_flight() == 0) {
            timer_deadline_.reset();
            return;
        }
        ++timeouts_;
        ssthresh_ = std::max(bytes_in_flight() / 2, 2 * cfg_.mss);
        cwnd_ = cfg_.mss;
        rto_ = std::min(SimTime{rto_.ns * 2}, cfg_.max_rto);
        state_ = TcpState::SlowStart;
        dup_acks_ = 0;
        cubic_epoch_valid_ = false;
        retransmit_from(high_ack_);
        arm_timer(now);
        try_send(now);
    }

  private:
    void on_duplicate_ack(SimTime now) {
        if (bytes_in_flight() == 0)
            return;
        ++dup_acks_;
        if (state_ == TcpState::FastRecovery) {
            cwnd_ += cfg_.mss; // window inflation per extra duplicate
        } else if (dup_acks_ == 3) {
            ssthresh_ = std::max(bytes_in_flight() / 2, 2 * cfg_.mss);
            recover_ = next_seq_;
            retransmit_from(high_ack_);
            cwnd_ = ssthresh_ + 3 * cfg_.mss;
            state_ = TcpState::FastRecovery;
            ++fast_retransmits_;
            on_congestion_for_cubic();
        }
        try_send(now);
    }

    void grow_window(SimTime now, std::uint64_t acked_bytes) {
        if (cwnd_ < ssthresh_) {
            state_ = TcpState::SlowStart;
            cwnd_ += cfg_.mss; // one MSS per ACK that covers new data
            return;
        }
        state_ = TcpState::CongestionAvoidance;
        if (cfg_.variant == TcpVariant::NewReno) {
            std::uint64_t add = std::max<std::uint64_t>(1, cfg_.mss * cfg_.mss / cwnd_);
            cwnd_ += add;
        } else {
            cubic_growth(now, acked_bytes);
        }
    }

    // Cubic window growth (RFC 8312 shape, simplified): w(t) = C(t-K)^3 + Wmax,
    // computed in MSS units.
    void cubic_growth(SimTime now, std::uint64_t) {
        constexpr double kC = 0.4;
        constexpr double kBeta = 0.7;
        double mss = static_cast<double>(cfg_.mss);
        if (!cubic_epoch_valid_) {
            cubic_epoch_ = now;
            cubic_wmax_ = std::max(cubic_wmax_, static_cast<double>(cwnd_) / mss);
            cubic_k_ = std::cbrt(cubic_wmax_ * (1.0 - kBeta) / kC);
            cubic_epoch_valid_ = true;
        }
        double t = (now - cubic_epoch_).seconds();
        double target = cubic_wmax_ + kC * (t - cubic_k_) * (t - cubic_k_) * (t - cubic_k_);
        double cur = static_cast<double>(cwnd_) / mss;
        double add = target > cur ? (target - cur) / cur : 0.01 / cur;
        cwnd_ += static_cast<std::uint64_t>(std::max(1.0, add * mss));
    }

    void on_congestion_for_cubic() {
        if (cfg_.variant != TcpVariant::Cubic)
            return;
        cubic_wmax_ = static_cast<double>(cwnd_) / static_cast<double>(cfg_.mss);
        cubic_epoch_valid_ = false;
    }

    void try_send(SimTime now) {
        while (bytes_in_flight() + cfg_.mss <= cwnd_) {
            sent_.push_back(SentSegment{next_seq_, next_seq_ + cfg_.mss, now, false});
            send_(next_seq_, cfg_.mss, false);
            offered_ += cfg_.mss;
            next_seq_ += cfg_.mss;
            if (!timer_deadline_.has_value())
                arm_timer(now);
        }
    }

    void retransmit_from(std::uint64_t seq) {
        if (seq >= next_seq_)
            return;
        std::uint64_t len = std::min(cfg_.mss, next_seq_ - seq);
        for (auto& s : sent_)
            if (s.seq_start < seq + len && seq < s.seq_end)
                s.retransmitted = true;
        send_(seq, len, true);
        offered_ += len;
    }

    void sample_rtt(SimTime now, std::uint64_t ack_seq) {
        std::optional<SentSegment> newest;
        while (!sent_.empty() && sent_.front().seq_end <= ack_seq) {
            if (!sent_.front().retransmitted)
                newest = sent_.front();
            sent_.pop_front();
        }
        if (!newest.has_value())
            return; // Karn: covered segments were all retransmitted
        SimTime r = now - newest->sent_at;
        last_rtt_sample_ = r;
        if (!srtt_valid_) {
            srtt_ = r;
            rttvar_ = SimTime{r.ns / 2};
            srtt_valid_ = true;
        } else {
            std::int64_t err = std::llabs(srtt_.ns - r.ns);
            rttvar_ = SimTime{(3 * rttvar_.ns + err) / 4};
            srtt_ = SimTime{(7 * srtt_.ns + r.ns) / 8};
        }
        std::int64_t rto = srtt_.ns + std::max<std::int64_t>(4 * rttvar_.ns, 1'000'000);
        rto_ = SimTime{std::clamp(rto, cfg_.min_rto.ns, cfg_.max_rto.ns)};
    }

    void arm_timer(SimTime now) {
        if (bytes_in_flight() == 0) {
            timer_deadline_.reset();
            ++timer_generation_;
            return;
        }
        timer_deadline_ = now + rto_;
        ++timer_generation_;
    }

    struct SentSegment {
        std::uint64_t seq_start;
        std::uint64_t seq_end;
        SimTime sent_at;
        bool retransmitted;
    };

    TcpConfig cfg_;
    SendFn send_;

    TcpState state_ = TcpState::SlowStart;
    std::uint64_t cwnd_ = 0;
    std::uint64_t ssthresh_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t high_ack_ = 0;
    std::uint64_t recover_ = 0;
    int dup_acks_ = 0;
    std::uint64_t offered_ = 0;
    std::uint64_t fast_retransmits_ = 0;
    std::uint64_t timeouts_ = 0;

    std::deque<SentSegment> sent_;

    bool srtt_valid_ = false;
    SimTime srtt_{0};
    SimTime rttvar_{0};
    SimTime rto_{0};
    std::optional<SimTime> last_rtt_sample_;

    std::optional<SimTime> timer_deadline_;
    std::uint64_t timer_generation_ = 0;

    bool cubic_epoch_valid_ = false;
    SimTime cubic_epoch_{0};
    double cubic_wmax_ = 0.0;
    double cubic_k_ = 0.0;
};

/// Receiver-side RLC AM reassembly: restores transmission order by RLC
/// stream offset so HARQ and ARQ retransmissions are invisible above.
class RlcReceiver {
  public:
    /// Returns the chunks released in order by this arrival.
    std::vector<RlcChunk> push(const RlcChunk& c) {
        std::vector<RlcChunk> out;
        if (c.rlc_offset < expected_)
            throw std::logic_error("RlcReceiver: duplicate RLC stream offset");
        if (c.rlc_offset == expected_) {
            expected_ += c.bytes;
            out.push_back(c);
            auto it = held_.begin();
            while (it != held_.end() && it->first == expected_) {
                expected_ += it->second.bytes;
                out.push_back(it->second);
                it = held_.erase(it);
            }
        } else {
            held_.emplace(c.rlc_offset, c);
        }
        return out;
    }

    std::uint64_t in_order_bytes() const { return expected_; }
    std::uint64_t held_bytes() const {
        std::uint64_t b = 0;
        for (const auto& [_, c] : held_)
            b += c.bytes;
        return b;
    }

  private:
    std::uint64_t expected_ = 0;
    std::map<std::uint64_t, RlcChunk> held_;
};

/// Cumulative-ACK TCP receive machine with an out-of-order reorder buffer.
class TcpReceiver {
  public:
    void on_bytes(std::uint64_t seq, std::uint64_t len) {
        raw_bytes_ += len;
        std::uint64_t end = seq + len;
        if (end <= expected_)
            return; // entirely duplicate
        std::uint64_t start = std::max(seq, expected_);
        insert_range(start, end);
        auto it = ranges_.begin();
        while (it != ranges_.end() && it->first <= expected_) {
            expected_ = std::max(expected_, it->second);
            it = ranges_.erase(it);
        }
    }

    /// Next cumulative ACK to emit.
    std::uint64_t ack_seq() const { return expected_; }
    /// Bytes handed to the application in order.
    std::uint64_t in_order_bytes() const { return expected_; }
    std::uint64_t raw_bytes() const { return raw_bytes_; }

  private:
    void insert_range(std::uint64_t start, std::uint64_t end) {
        auto it = ranges_.lower_bound(start);
        if (it != ranges_.begin()) {
            auto prev = std::prev(it);
            if (prev->second >= start) {
                start = prev->first;
                end = std::max(end, prev->second);
                it = ranges_.erase(prev);
            }
        }
        while (it != ranges_.end() && it->first <= end) {
            end = std::max(end, it->second);
            it = ranges_.erase(it);
        }
        ranges_.emplace(start, end);
    }

    std::uint64_t expected_ = 0;
    std::uint64_t raw_bytes_ = 0;
    std::map<std::uint64_t, std::uint64_t> ranges_;
};

/// One output row: instantaneous SINR and beam pair, windowed rates, the
/// latest RTT sample, and RLC occupancy.
struct TimeSeriesRecord {
    SimTime t{0};
    double sinr_db = 0.0;
    double phy_rate_bps = 0.0;
    double tcp_goodput_bps = 0.0;
    SimTime rtt{0};
    BeamPair beam_pair;
    std::uint64_t rlc_occupancy_bytes = 0;
};

} // namespace mmlink

#endif // MMLINK_STACK_HPP
