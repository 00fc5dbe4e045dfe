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

// Shared between the kernel reference code and the stream generators.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "vimasim/dram.hpp"
#include "vimasim/host.hpp"

namespace vima::detail {

template <typename T>
std::vector<T> read_array(const BackingStore& mem, std::uint64_t base, std::uint64_t count);
template <typename T>
void write_array(BackingStore& mem, std::uint64_t base, const std::vector<T>& v);

float relu(float v);

/// K smallest (distance, index) pairs; ties go to the lower index.
struct TopK {
    explicit TopK(std::uint64_t k) : k(k) {}
    void offer(float d, std::uint32_t idx);
    std::uint64_t k;
    std::vector<std::pair<float, std::uint32_t>> best;
};

/// Appends ops and turns absolute producer positions into back-distances.
class Emitter {
public:
    static constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();

    Emitter(std::vector<HostOp>& out, std::uint64_t& pos) : out_(out), pos_(pos) {}

    std::uint64_t push(HostOp op, std::uint64_t d0 = kNone, std::uint64_t d1 = kNone) {
        op.dep[0] = dist(d0);
        op.dep[1] = dist(d1);
        out_.push_back(std::move(op));
        return pos_++;
    }
    std::uint64_t load(std::uint64_t addr, std::uint64_t d0 = kNone) { return push(HostOp::mem(HostOpKind::load, addr), d0); }
    std::uint64_t store(std::uint64_t addr, std::uint64_t d0 = kNone, std::uint64_t d1 = kNone) {
        return push(HostOp::mem(HostOpKind::store, addr), d0, d1);
    }
    std::uint64_t op(HostOpKind k, std::uint64_t d0 = kNone, std::uint64_t d1 = kNone) {
        return push(HostOp::compute(k), d0, d1);
    }
    std::uint64_t vima(const VimaInstruction& in, std::uint64_t d0 = kNone) { return push(HostOp::vector(in), d0); }
    std::uint64_t hook(std::function<void()> fn) { return push(HostOp::barrier(std::move(fn))); }

private:
    std::uint16_t dist(std::uint64_t d) const {
        if (d == kNone || d >= pos_ || pos_ - d > 0xFFFF) return 0;
        return static_cast<std::uint16_t>(pos_ - d);
    }

    std::vector<HostOp>& out_;
    std::uint64_t& pos_;
};

/// Produces ops one outer iteration at a time.
class LazySource : public OpSource {
public:
    using EmitFn = std::function<void(std::uint64_t iter, Emitter& e)>;

    LazySource(EmitFn emit, std::uint64_t begin, std::uint64_t end, std::function<void(Emitter&)> tail = {})
        : emit_(std::move(emit)), tail_(std::move(tail)), it_(begin), end_(end) {}

    bool next(HostOp& out) override {
        while (at_ == buf_.size()) {
            buf_.clear();
            at_ = 0;
            Emitter e(buf_, pos_);
            if (it_ < end_) {
                emit_(it_++, e);
            } else if (tail_) {
                tail_(e);
                tail_ = nullptr;
            } else {
                return false;
            }
        }
        out = std::move(buf_[at_++]);
        return true;
    }

private:
    EmitFn emit_;
    std::function<void(Emitter&)> tail_;
    std::uint64_t it_, end_;
    std::vector<HostOp> buf_;
    std::size_t at_ = 0;
    std::uint64_t pos_ = 0;
};

}  // namespace vima::detail
