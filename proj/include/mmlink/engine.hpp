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

#ifndef MMLINK_ENGINE_HPP
#define MMLINK_ENGINE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mmlink {

/// Integer-nanosecond simulation time. Every protocol constant the simulator
/// uses (20 ms burst period, 5 ms burst, 125 us slots, 10 ms core RTT) is
/// exactly representable, so event ordering never depends on floating point.
struct SimTime {
    std::int64_t ns = 0;

    static constexpr SimTime from_ns(std::int64_t v) { return SimTime{v}; }
    static constexpr SimTime from_us(std::int64_t v) { return SimTime{v * 1000}; }
    static constexpr SimTime from_ms(std::int64_t v) { return SimTime{v * 1'000'000}; }
    static constexpr SimTime from_sec(std::int64_t v) { return SimTime{v * 1'000'000'000}; }
    static SimTime from_seconds(double s) { return SimTime{std::llround(s * 1e9)}; }
    static SimTime from_millis(double ms) { return SimTime{std::llround(ms * 1e6)}; }

    constexpr double seconds() const { return static_cast<double>(ns) * 1e-9; }
    constexpr double millis() const { return static_cast<double>(ns) * 1e-6; }

    constexpr auto operator<=>(const SimTime&) const = default;
    constexpr SimTime operator+(SimTime o) const { return SimTime{ns + o.ns}; }
    constexpr SimTime operator-(SimTime o) const { return SimTime{ns - o.ns}; }
    constexpr SimTime& operator+=(SimTime o) { ns += o.ns; return *this; }
    constexpr SimTime operator*(std::int64_t k) const { return SimTime{ns * k}; }
    /// Number of whole periods of `o` contained in this time.
    constexpr std::int64_t operator/(SimTime o) const { return ns / o.ns; }
};

constexpr SimTime operator*(std::int64_t k, SimTime t) { return SimTime{k * t.ns}; }

enum class EventKind : int {
    SsBurstStart = 0,
    SsBlock,
    SlotBoundary,
    PacketArrival,
    TimerExpiry,
    TraceEnd,
};

constexpr std::size_t kEventKindCount = 6;

/// Single-threaded discrete-event core: virtual clock plus an ordered event
/// queue. Ties on fire time are broken by insertion sequence, so dispatch
/// order is reproducible regardless of the underlying heap.
class Engine {
  public:
    using Handler = std::function<void()>;

    SimTime now() const { return now_; }

    /// Queue a handler at absolute time `at`. Scheduling in the past is a
    /// logic bug in the caller, not a recoverable condition.
    std::uint64_t schedule(SimTime at, EventKind kind, Handler fn) {
        if (at < now_)
            throw std::logic_error("Engine::schedule: event scheduled in the past");
        std::uint64_t seq = next_seq_++;
        queue_.push(Event{at, seq, kind, std::move(fn)});
        ++scheduled_;
        return seq;
    }

    /// Dispatch every event with fire time <= t_end (boundary inclusive),
    /// then advance the clock to t_end. Returns the dispatch count.
    std::size_t run_until(SimTime t_end) {
        if (t_end < now_)
            throw std::logic_error("Engine::run_until: end time precedes clock");
        std::size_t n = 0;
        while (!queue_.empty() && queue_.top().at <= t_end) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.at;
            ++dispatched_;
            ++dispatched_by_kind_[static_cast<std::size_t>(ev.kind)];
            ++n;
            ev.fn();
        }
        now_ = t_end;
        return n;
    }

    std::uint64_t scheduled_count() const { return scheduled_; }
    std::uint64_t dispatched_count() const { return dispatched_; }
    std::uint64_t pending_count() const { return static_cast<std::uint64_t>(queue_.size()); }
    std::uint64_t dispatched_count(EventKind k) const {
        return dispatched_by_kind_[static_cast<std::size_t>(k)];
    }

  private:
    struct Event {
        SimTime at;
        std::uint64_t seq;
        EventKind kind;
        Handler fn;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at != b.at)
                return b.at < a.at;
            return b.seq < a.seq;
        }
    };

    SimTime now_{0};
    std::uint64_t next_seq_ = 0;
    std::uint64_t scheduled_ = 0;
    std::uint64_t dispatched_ = 0;
    std::array<std::uint64_t, kEventKindCount> dispatched_by_kind_{};
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

/// Counter-based pseudo-random source keyed by (seed, stream). Draws are a
/// pure function of (key, counter), so adding a consumer with its own stream
/// id never perturbs another stream's sequence.
class SplitRng {
  public:
    SplitRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(mix(seed + kGamma) ^ mix(stream * kGamma + 1))) {}

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

    /// Uniform in [0, 1), 53 mantissa bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double next_range(double lo, double hi) { return lo + next_unit() * (hi - lo); }

  private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

    // splitmix64 finalizer
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace mmlink

#endif // MMLINK_ENGINE_HPP
