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
 * @file host.hpp
 * @brief Host processor model: out-of-order window cores, a three-level
 *        inclusive cache hierarchy, and stop-and-go VIMA dispatch.
 *
 * Each core walks its op stream once, in program order, and assigns every
 * op a dispatch, issue, completion and retire cycle subject to: in-order
 * dispatch of at most issue_width ops per cycle, ROB and MOB capacity,
 * operand readiness, per-class unit counts and per-cycle issue width.
 * Memory ops resolve through L1 -> L2 -> LLC -> link -> DRAM when they
 * issue. Times are core cycles inside a core and picoseconds outside.
 *
 * A VIMA op issues once its operands are ready and the previous VIMA op
 * has retired; it reaches the engine instruction_dispatch_lat cycles later
 * and its status takes as long to come back. Ops that do not depend on an
 * unresolved VIMA op keep flowing until the ROB or a dependence blocks.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "vimasim/config.hpp"
#include "vimasim/dram.hpp"
#include "vimasim/isa.hpp"
#include "vimasim/simcore.hpp"
#include "vimasim/vima_engine.hpp"

namespace vima {

enum class HostOpKind : std::uint8_t { load, store, int_alu, int_mul, int_div, fp_alu, fp_mul, fp_div, vima, hook };

struct HostOp {
    HostOpKind kind = HostOpKind::int_alu;
    std::uint8_t width = 64;
    std::uint64_t addr = 0;
    /// Producers as distances back in the stream (1 = previous op); 0 = none.
    std::uint16_t dep[2] = {0, 0};
    VimaInstruction vima;  // kind == vima only
    /// kind == hook only: host-side functional work. Runs, at no cost, once
    /// every earlier VIMA op has signalled.
    std::function<void()> hook;

    static HostOp mem(HostOpKind k, std::uint64_t addr, std::uint16_t d0 = 0, std::uint16_t d1 = 0);
    static HostOp compute(HostOpKind k, std::uint16_t d0 = 0, std::uint16_t d1 = 0);
    static HostOp vector(const VimaInstruction& in, std::uint16_t d0 = 0);
    static HostOp barrier(std::function<void()> fn);
};

/// Lazily produced op stream of one core.
class OpSource {
public:
    virtual ~OpSource() = default;
    virtual bool next(HostOp& out) = 0;
};

class VectorSource : public OpSource {
public:
    explicit VectorSource(std::vector<HostOp> ops) : ops_(std::move(ops)) {}
    bool next(HostOp& out) override;

private:
    std::vector<HostOp> ops_;
    std::size_t pos_ = 0;
};

/// Set-associative LRU cache of line addresses. `ready` is the core cycle
/// at which an in-flight fill lands, so later hits to it wait (MSHR merge).
class SetAssocCache {
public:
    struct Way {
        std::uint64_t line = 0;
        bool valid = false;
        bool dirty = false;
        std::uint64_t stamp = 0;
        std::uint64_t ready = 0;
    };
    struct Victim {
        std::uint64_t line = 0;
        bool dirty = false;
    };

    SetAssocCache(std::uint64_t bytes, std::uint64_t ways, std::uint64_t line_bytes);

    Way* lookup(std::uint64_t line);  // touches on hit
    const Way* peek(std::uint64_t line) const;
    /// Installs `line` (must be absent); returns the displaced valid line.
    std::optional<Victim> insert(std::uint64_t line, std::uint64_t ready, bool dirty);
    /// Drops the line; returns whether it was dirty, or nullopt if absent.
    std::optional<bool> invalidate(std::uint64_t line);
    template <typename F>
    void for_each_valid(F&& f) const {
        for (const auto& w : ways_)
            if (w.valid) f(w);
    }

    std::uint64_t sets() const { return sets_; }
    std::uint64_t ways() const { return assoc_; }

private:
    std::uint64_t sets_;
    std::uint64_t assoc_;
    std::vector<Way> ways_;
    std::uint64_t clock_ = 0;
};

struct HostCounters {
    std::uint64_t ops = 0;
    std::uint64_t loads = 0;
    std::uint64_t stores = 0;
    std::uint64_t vima_ops = 0;
    std::uint64_t l1_hits = 0, l1_misses = 0;
    std::uint64_t l2_hits = 0, l2_misses = 0;
    std::uint64_t llc_hits = 0, llc_misses = 0;
    /// Line accesses charged dynamic energy, including writebacks received.
    std::uint64_t l1_accesses = 0, l2_accesses = 0, llc_accesses = 0;
    std::uint64_t dram_line_reads = 0, dram_line_writes = 0;
    std::uint64_t snoop_supplied = 0;
    std::uint64_t mshr_stall_cycles = 0;
    std::uint64_t vima_wait_cycles = 0;  // VIMA op ready but previous not yet retired
    std::uint64_t max_issue_per_cycle = 0;
    std::uint64_t prologue_writebacks = 0;
};

struct HostRunResult {
    Time elapsed{};
    std::vector<std::uint64_t> core_cycles;
    std::optional<std::string> fault;
    std::uint64_t fault_op = 0;  // stream position of the faulting VIMA op
};

struct AddressRange {
    std::uint64_t base = 0;
    std::uint64_t bytes = 0;
};

class HostSystem {
public:
    /// `engine` may be null for runs without VIMA ops.
    HostSystem(const SimConfig& cfg, EventQueue& q, VaultArray& dram, HostLinks& links, VimaEngine* engine,
               std::size_t cores);
    ~HostSystem();

    /// Runs every core's stream to completion (or to a VIMA fault) and drains the queue.
    HostRunResult run(std::vector<std::unique_ptr<OpSource>>& sources);

    /// Writes back dirty host lines intersecting `regions` and invalidates
    /// them in all levels. Returns the cost in core cycles.
    std::uint64_t coherence_prologue(const std::vector<AddressRange>& regions);

    const HostCounters& counters() const { return counters_; }
    const ClockDomain& clock() const { return clock_; }
    std::size_t cores() const;

    /// Single-access probes used by tests: latency in core cycles of one
    /// load or store issued by `core` at `cycle`.
    std::uint64_t access(std::size_t core, std::uint64_t addr, bool write, std::uint64_t cycle);

    const SetAssocCache& l1(std::size_t core) const;
    const SetAssocCache& l2(std::size_t core) const;
    const SetAssocCache& llc() const { return llc_; }

private:
    struct Core;
    friend struct Core;

    std::uint64_t to_cycles(Time t) const;
    Time to_time(std::uint64_t cycles) const { return clock_.cycles(cycles); }
    std::uint64_t dram_read(std::uint64_t line, std::uint64_t cycle);
    std::uint64_t dram_write(std::uint64_t line, std::uint64_t cycle);
    /// LLC miss: snoops the engine, then goes to DRAM; returns the fill cycle.
    std::uint64_t fill_from_memory(std::uint64_t line, bool write, std::uint64_t cycle);
    void write_into_llc(std::uint64_t line, std::uint64_t cycle);
    void llc_evicted(const SetAssocCache::Victim& v, std::uint64_t cycle);
    /// A VIMA result overwrote these bytes: host copies are stale.
    void drop_lines(std::uint64_t base, std::uint64_t bytes);

    const SimConfig& cfg_;
    EventQueue& q_;
    VaultArray& dram_;
    HostLinks& links_;
    VimaEngine* engine_;
    ClockDomain clock_;
    SetAssocCache llc_;
    std::vector<std::unique_ptr<Core>> cores_;
    HostCounters counters_;
    std::optional<std::string> fault_;
    std::uint64_t fault_op_ = 0;
};

}  // namespace vima
