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

#ifndef MMLINK_RLC_HPP
#define MMLINK_RLC_HPP

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "mmlink/engine.hpp"

namespace mmlink {

/// A contiguous slice of the downlink byte stream in RLC custody. `seq` is
/// the transport-layer sequence of the first byte; `rlc_offset` is the
/// position in the RLC transmission byte stream, assigned at first service
/// and kept across retransmissions so the receiver can restore order.
struct RlcChunk {
    std::uint64_t seq = 0;
    std::uint64_t bytes = 0;
    std::uint64_t rlc_offset = 0;
    SimTime enqueue_time{0};
    std::uint64_t occupancy_at_enqueue = 0;
};

/// Acknowledged-mode link-layer queue: byte-conserving, FIFO within each of
/// the new-data and retransmit queues, retransmit served first. Admission is
/// judged against total custody (queued + at PHY + awaiting requeue) so the
/// occupancy bound survives retransmission re-entry.
class RlcAmBuffer {
  public:
    explicit RlcAmBuffer(std::uint64_t capacity_bytes = 5ull << 20)
        : capacity_(capacity_bytes) {}

    std::uint64_t capacity() const { return capacity_; }

    /// Bytes sitting in the two queues (excludes bytes at the PHY).
    std::uint64_t occupancy() const { return queued_new_ + queued_retx_; }

    /// Bytes accepted and not yet delivered, wherever they sit.
    std::uint64_t custody() const { return accepted_ - delivered_; }

    /// Tail-drop admission for a new transport-layer segment.
    bool enqueue(std::uint64_t seq, std::uint64_t segment_bytes, SimTime t) {
        if (segment_bytes == 0)
            throw std::invalid_argument("RlcAmBuffer::enqueue: empty segment");
        if (custody() + segment_bytes > capacity_) {
            dropped_bytes_ += segment_bytes;
            ++dropped_segments_;
            return false;
        }
        RlcChunk c;
        c.seq = seq;
        c.bytes = segment_bytes;
        c.enqueue_time = t;
        c.occupancy_at_enqueue = occupancy();
        new_data_.push_back(c);
        queued_new_ += segment_bytes;
        accepted_ += segment_bytes;
        return true;
    }

    /// Dequeue up to `grant_bytes`, retransmit queue first, splitting the
    /// head chunk when the grant ends inside it. Served chunks move to PHY
    /// custody until delivered (mark_delivered) or surrendered back
    /// (requeue).
    std::vector<RlcChunk> serve(std::uint64_t grant_bytes) {
        std::vector<RlcChunk> out;
        std::uint64_t remaining = grant_bytes;
        take_from(retransmit_, queued_retx_, remaining, out, /*assign_offset=*/false);
        take_from(new_data_, queued_new_, remaining, out, /*assign_offset=*/true);
        for (const auto& c : out)
            at_phy_ += c.bytes;
        return out;
    }

    /// HARQ gave up on these chunks; they re-enter the retransmit queue
    /// ahead of new data, keeping their original stream offsets.
    void requeue(const std::vector<RlcChunk>& chunks) {
        for (const auto& c : chunks) {
            if (at_phy_ < c.bytes)
                throw std::logic_error("RlcAmBuffer::requeue: bytes not in PHY custody");
            at_phy_ -= c.bytes;
            retransmit_.push_back(c);
            queued_retx_ += c.bytes;
            requeued_bytes_ += c.bytes;
        }
    }

    /// PHY delivered these chunks to the far end; custody released.
    void mark_delivered(const std::vector<RlcChunk>& chunks) {
        for (const auto& c : chunks) {
            if (at_phy_ < c.bytes)
                throw std::logic_error("RlcAmBuffer::mark_delivered: bytes not in PHY custody");
            at_phy_ -= c.bytes;
            delivered_ += c.bytes;
        }
    }

    std::uint64_t accepted_bytes() const { return accepted_; }
    std::uint64_t delivered_bytes() const { return delivered_; }
    std::uint64_t dropped_bytes() const { return dropped_bytes_; }
    std::uint64_t dropped_segments() const { return dropped_segments_; }
    std::uint64_t requeued_bytes() const { return requeued_bytes_; }
    std::uint64_t bytes_at_phy() const { return at_phy_; }
    std::uint64_t retransmit_queue_bytes() const { return queued_retx_; }

    /// accepted == delivered + queued + at PHY, exactly, at all times.
    bool conservation_holds() const {
        return accepted_ == delivered_ + queued_new_ + queued_retx_ + at_phy_;
    }

  private:
    void take_from(std::deque<RlcChunk>& q, std::uint64_t& queued, std::uint64_t& remaining,
                   std::vector<RlcChunk>& out, bool assign_offset) {
        while (remaining > 0 && !q.empty()) {
            RlcChunk& head = q.front();
            if (assign_offset) {
                head.rlc_offset = next_offset_;
            }
            if (head.bytes <= remaining) {
                RlcChunk c = head;
                q.pop_front();
                queued -= c.bytes;
                remaining -= c.bytes;
                if (assign_offset)
                    next_offset_ += c.bytes;
                out.push_back(c);
            } else {
                RlcChunk c = head;
                c.bytes = remaining;
                head.seq += remaining;
                head.bytes -= remaining;
                head.rlc_offset += remaining; // remainder starts later in the stream
                if (assign_offset)
                    next_offset_ += remaining;
                queued -= remaining;
                remaining = 0;
                out.push_back(c);
            }
        }
    }

    std::uint64_t capacity_;
    std::deque<RlcChunk> new_data_;
    std::deque<RlcChunk> retransmit_;
    std::uint64_t queued_new_ = 0;
    std::uint64_t queued_retx_ = 0;
    std::uint64_t at_phy_ = 0;
    std::uint64_t accepted_ = 0;
    std::uint64_t delivered_ = 0;
    std::uint64_t dropped_bytes_ = 0;
    std::uint64_t dropped_segments_ = 0;
    std::uint64_t requeued_bytes_ = 0;
    std::uint64_t next_offset_ = 0;
};

} // namespace mmlink

#endif // MMLINK_RLC_HPP
