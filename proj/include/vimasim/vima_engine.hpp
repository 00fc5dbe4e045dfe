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
 * @file vima_engine.hpp
 * @brief The near-data vector engine: sequencer, vector cache, fill buffer.
 *
 * One instruction is in flight at a time. Its life is split in phases:
 *
 *   tag check  ceil(tags / ports) tag cycles
 *   fetch      every missing covering line, all sub-requests issued at once;
 *              arriving lines enter the cache through the fill path
 *   transfer   transfer_beats cycles, both operands in parallel
 *   execute    functional-unit latency of the op class
 *   signal     status leaves for the host; the result sits in the fill
 *              buffer and drains into the cache over transfer_beats cycles
 *
 * The cache keeps tags and state only. Operand values live in the
 * BackingStore, which is updated when an instruction signals success, so a
 * faulting instruction never leaves a trace in memory.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vimasim/config.hpp"
#include "vimasim/dram.hpp"
#include "vimasim/isa.hpp"
#include "vimasim/simcore.hpp"

namespace vima {

/// Aligned vector tags covering [base, base + len): one tag when base is
/// aligned, otherwise the two neighbouring windows.
std::vector<std::uint64_t> covering_lines(std::uint64_t base, std::uint64_t len, std::uint64_t vector_bytes);

struct VimaCacheLine {
    std::uint64_t tag = 0;
    bool valid = false;
    bool dirty = false;
    bool pinned = false;  // operand of the instruction in flight
    std::uint64_t lru_stamp = 0;
};

/// Fully associative, LRU. Stamps come from a monotonic counter, so ties
/// cannot occur between valid lines.
class VimaCache {
public:
    VimaCache(std::size_t lines, std::uint64_t vector_bytes);

    struct Access {
        bool hit = false;
        std::optional<std::uint64_t> evicted;
        bool evicted_dirty = false;
    };

    std::optional<std::size_t> find(std::uint64_t tag) const;
    /// Slot to (re)fill: an invalid line first, else the unpinned LRU line.
    std::optional<std::size_t> victim() const;
    void touch(std::size_t slot);
    void install(std::size_t slot, std::uint64_t tag);
    void invalidate(std::size_t slot) { lines_[slot] = VimaCacheLine{}; }

    /// Lookup-or-install in one step; what the sequencer does for a tag.
    Access access(std::uint64_t tag);

    VimaCacheLine& line(std::size_t slot) { return lines_[slot]; }
    const std::vector<VimaCacheLine>& lines() const { return lines_; }
    std::uint64_t vector_bytes() const { return vector_bytes_; }

private:
    std::vector<VimaCacheLine> lines_;
    std::uint64_t vector_bytes_;
    std::uint64_t clock_ = 0;
};

enum class VimaStatus : std::uint8_t { done, exception };

/// Absolute times at which each phase of one instruction ended.
struct PhaseTimes {
    Time arrive{};
    Time tag_done{};
    Time fetch_done{};
    Time transfer_done{};
    Time execute_done{};
    Time drain_done{};
};

struct VimaResult {
    VimaStatus status = VimaStatus::done;
    std::string fault;
    PhaseTimes phases;
    bool divide_by_zero = false;
};

enum class SnoopResult : std::uint8_t { none, supplied, invalidated };

struct VimaCounters {
    std::uint64_t instructions = 0;
    std::uint64_t exceptions = 0;
    std::uint64_t tag_checks = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t evictions = 0;
    std::uint64_t dirty_evictions = 0;
    std::uint64_t snoop_supplies = 0;
    std::uint64_t snoop_invalidations = 0;
    std::uint64_t snoop_writebacks = 0;
    std::uint64_t flush_writebacks = 0;
    std::uint64_t read_subrequests = 0;
    std::uint64_t write_subrequests = 0;
    /// 64 B line reads and writes inside the vector cache.
    std::uint64_t cache_line_accesses = 0;
    std::uint64_t operand_vectors = 0;
    std::uint64_t fetched_bytes = 0;
    Time fetch_time{};  // summed tag_done..fetch_done of instructions that missed
    Time gap_time{};    // summed signal..next arrival (sequencer idle between instructions)
    Time busy_time{};   // summed arrive..signal
};

class VimaEngine {
public:
    using SignalFn = std::function<void(const VimaResult&)>;

    VimaEngine(const SimConfig& cfg, EventQueue& q, VaultArray& dram, BackingStore& mem, ComponentId id = 1);

    bool busy() const { return busy_; }
    const ClockDomain& clock() const { return clock_; }
    const VimaCache& cache() const { return cache_; }
    const VimaCounters& counters() const { return counters_; }
    /// Fill-buffer drain end of the last executed instruction.
    Time drain_done() const { return drain_done_; }

    /// The instruction reaches the sequencer at q.now(); `on_signal` runs
    /// when its status leaves the engine. Throws if one is already in flight.
    void submit(const VimaInstruction& in, SignalFn on_signal);

    /// Host access to `addr` at q.now(). A read of a cached line is supplied
    /// by the engine; a write writes the line back if dirty and invalidates it.
    SnoopResult snoop(AccessKind kind, std::uint64_t addr);

    /// Writes back every dirty line at q.now(); returns the last completion.
    Time flush();

    /// Functional-unit cycles for the op class and element type.
    std::uint64_t fu_cycles(const VimaInstruction& in) const;
    std::uint64_t transfer_cycles() const { return beats_; }

private:
    std::optional<std::string> fault_of(const VimaInstruction& in) const;
    Time write_back(std::uint64_t tag, Time now);
    Time fetch(std::uint64_t tag, std::size_t slot, Time now);
    void tag_phase_done();
    void finish();
    // Dirty victims go to `victims` when given, otherwise straight to DRAM.
    std::size_t take_slot(Time now, std::vector<std::uint64_t>* victims = nullptr);

    const SimConfig& cfg_;
    EventQueue& q_;
    VaultArray& dram_;
    BackingStore& mem_;
    ComponentId id_;
    ClockDomain clock_;
    VimaCache cache_;
    std::uint64_t beats_;
    std::uint64_t lines_per_vector_;

    bool busy_ = false;
    VimaInstruction current_;
    SignalFn on_signal_;
    VimaResult result_;
    std::vector<std::uint64_t> tags_;
    std::vector<std::size_t> pinned_;
    Time drain_done_{};
    std::optional<Time> last_signal_;
    VimaCounters counters_;
};

}  // namespace vima
