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

#include "vimasim/simcore.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <utility>

namespace vima {

ClockDomain::ClockDomain(std::string name, std::uint64_t frequency_hz)
    : name_(std::move(name)), frequency_hz_(frequency_hz) {
    if (frequency_hz_ == 0) throw std::invalid_argument("clock domain '" + name_ + "' has zero frequency");
    // round-half-up of 1e12 / f in integer arithmetic
    constexpr std::uint64_t kPsPerSecond = 1'000'000'000'000ULL;
    period_ = Time{(kPsPerSecond + frequency_hz_ / 2) / frequency_hz_};
    if (period_.ps == 0) throw std::invalid_argument("clock domain '" + name_ + "' is faster than 1 THz");
}

Time ClockDomain::next_edge(Time t) const {
    const std::uint64_t p = period_.ps;
    return Time{(t.ps + p - 1) / p * p};
}

Time cycles_to_time(std::uint64_t n, const ClockDomain& d) { return d.cycles(n); }

void EventQueue::schedule(Time due, ComponentId target, std::function<void()> action) {
    if (due < now_) {
        throw std::logic_error("event scheduled in the past: due=" + std::to_string(due.ps) +
                               "ps now=" + std::to_string(now_.ps) + "ps");
    }
    heap_.push(Event{due, next_sequence_++, target, std::move(action)});
}

bool EventQueue::advance() {
    if (heap_.empty()) return false;
    // top() is const; the action is moved out through a copy of the handle
    Event ev = heap_.top();
    heap_.pop();
    now_ = ev.due;
    ++fired_;
    if (ev.action) ev.action();
    return true;
}

void EventQueue::run() {
    while (advance()) {
    }
}

void EventQueue::run_until(Time limit) {
    while (!heap_.empty() && heap_.top().due <= limit) advance();
}

Time Calendar::find(Time from, Time len) const {
    std::uint64_t t = from.ps;
    // First span ending after t; earlier ones cannot collide.
    auto it = std::upper_bound(busy_.begin() + static_cast<std::ptrdiff_t>(head_), busy_.end(), t,
                               [](std::uint64_t v, const Span& sp) { return v < sp.end; });
    for (; it != busy_.end() && it->start < t + len.ps; ++it) t = std::max(t, it->end);
    return Time{t};
}

void Calendar::reserve(Time start, Time len) {
    if (len.ps == 0) return;
    const std::uint64_t s = start.ps, e = start.ps + len.ps;
    auto first = busy_.begin() + static_cast<std::ptrdiff_t>(head_);
    auto it = std::lower_bound(first, busy_.end(), s, [](const Span& sp, std::uint64_t v) { return sp.start < v; });
    const bool join_prev = it != first && std::prev(it)->end == s;
    const bool join_next = it != busy_.end() && it->start == e;
    if ((it != first && std::prev(it)->end > s) || (it != busy_.end() && it->start < e))
        throw std::logic_error("calendar: overlapping reservation");
    if (join_prev && join_next) {
        std::prev(it)->end = it->end;
        busy_.erase(it);
    } else if (join_prev) {
        std::prev(it)->end = e;
    } else if (join_next) {
        it->start = s;
    } else {
        busy_.insert(it, Span{s, e});
    }
}

void Calendar::prune(Time t) {
    while (head_ < busy_.size() && busy_[head_].end < t.ps) ++head_;
    if (head_ > 64 && head_ * 2 > busy_.size()) {
        busy_.erase(busy_.begin(), busy_.begin() + static_cast<std::ptrdiff_t>(head_));
        head_ = 0;
    }
}

}  // namespace vima
