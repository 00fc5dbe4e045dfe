/*
 * Copyright 2026 The vimasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file simcore.hpp
 * @brief Global time base, clock domains and the deterministic event queue.
 *
 * Every component shares one integer picosecond time line. Clock domains
 * only convert between their own cycles and picoseconds; there is no
 * component-local notion of "now".
 */

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

namespace vima {

/// Absolute or relative simulated time in picoseconds.
struct Time {
    std::uint64_t ps = 0;

    constexpr Time() = default;
    constexpr explicit Time(std::uint64_t picoseconds) : ps(picoseconds) {}

    constexpr auto operator<=>(const Time&) const = default;

    constexpr Time& operator+=(Time o) {
        ps += o.ps;
        return *this;
    }
    friend constexpr Time operator+(Time a, Time b) { return Time{a.ps + b.ps}; }
    friend constexpr Time operator-(Time a, Time b) { return Time{a.ps - b.ps}; }

    constexpr double seconds() const { return static_cast<double>(ps) * 1e-12; }
};

constexpr Time max(Time a, Time b) { return a < b ? b : a; }
constexpr Time min(Time a, Time b) { return a < b ? a : b; }

class ClockDomain {
public:
    ClockDomain(std::string name, std::uint64_t frequency_hz);

    const std::string& name() const { return name_; }
    std::uint64_t frequency_hz() const { return frequency_hz_; }
    /// round(1e12 / f) picoseconds.
    Time period() const { return period_; }

    Time cycles(std::uint64_t n) const { return Time{n * period_.ps}; }
    /// Whole cycles elapsed at t (floor).
    std::uint64_t cycle_at(Time t) const { return t.ps / period_.ps; }
    /// First clock edge at or after t.
    Time next_edge(Time t) const;

private:
    std::string name_;
    std::uint64_t frequency_hz_;
    Time period_;
};

Time cycles_to_time(std::uint64_t n, const ClockDomain& d);

using ComponentId = std::uint32_t;

struct Event {
    Time due;
    std::uint64_t sequence = 0;
    ComponentId target = 0;
    std::function<void()> action;
};

/**
 * Single shared event queue. Firing order is the total order (due, sequence),
 * where sequence is the insertion counter, so runs are bit-reproducible.
 */
class EventQueue {
public:
    Time now() const { return now_; }

    /// Throws std::logic_error when due < now().
    void schedule(Time due, ComponentId target, std::function<void()> action);

    /// Fires the next event. Returns false when the queue is empty.
    bool advance();
    /// Fires events until the queue drains.
    void run();
    /// Fires every event with due <= limit.
    void run_until(Time limit);

    bool empty() const { return heap_.empty(); }
    std::size_t pending() const { return heap_.size(); }
    std::uint64_t fired() const { return fired_; }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.due != b.due) return a.due > b.due;
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    Time now_{};
    std::uint64_t next_sequence_ = 0;
    std::uint64_t fired_ = 0;
};

/**
 * Busy intervals of one shared resource. Requests may arrive out of time
 * order (the host core model runs ahead of the event queue), so a late
 * request can still use an earlier idle gap.
 */
class Calendar {
public:
    /// Earliest t >= from with [t, t + len) free.
    Time find(Time from, Time len) const;
    /// Marks [start, start + len) busy. The span must be free.
    void reserve(Time start, Time len);
    /// Forgets intervals that end before `t`; requests must not reach back past it.
    void prune(Time t);
    std::size_t intervals() const { return busy_.size() - head_; }

private:
    struct Span {
        std::uint64_t start, end;
    };
    // Sorted, disjoint, coalesced; entries before head_ are pruned. Most
    // reservations land at the tail, so a flat array beats a tree here.
    std::vector<Span> busy_;
    std::size_t head_ = 0;
};

}  // namespace vima
