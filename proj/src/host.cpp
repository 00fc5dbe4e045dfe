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

#include "vimasim/host.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>

namespace vima {

HostOp HostOp::mem(HostOpKind k, std::uint64_t addr, std::uint16_t d0, std::uint16_t d1) {
    HostOp op;
    op.kind = k;
    op.addr = addr;
    op.dep[0] = d0;
    op.dep[1] = d1;
    return op;
}

HostOp HostOp::compute(HostOpKind k, std::uint16_t d0, std::uint16_t d1) {
    HostOp op;
    op.kind = k;
    op.dep[0] = d0;
    op.dep[1] = d1;
    return op;
}

HostOp HostOp::vector(const VimaInstruction& in, std::uint16_t d0) {
    HostOp op;
    op.kind = HostOpKind::vima;
    op.vima = in;
    op.dep[0] = d0;
    return op;
}

HostOp HostOp::barrier(std::function<void()> fn) {
    HostOp op;
    op.kind = HostOpKind::hook;
    op.hook = std::move(fn);
    return op;
}

bool VectorSource::next(HostOp& out) {
    if (pos_ >= ops_.size()) return false;
    out = ops_[pos_++];
    return true;
}

SetAssocCache::SetAssocCache(std::uint64_t bytes, std::uint64_t ways, std::uint64_t line_bytes)
    : sets_(bytes / (ways * line_bytes)), assoc_(ways), ways_(sets_ * ways) {}

SetAssocCache::Way* SetAssocCache::lookup(std::uint64_t line) {
    Way* set = &ways_[(line % sets_) * assoc_];
    for (std::uint64_t i = 0; i < assoc_; ++i) {
        if (set[i].valid && set[i].line == line) {
            set[i].stamp = ++clock_;
            return &set[i];
        }
    }
    return nullptr;
}

const SetAssocCache::Way* SetAssocCache::peek(std::uint64_t line) const {
    const Way* set = &ways_[(line % sets_) * assoc_];
    for (std::uint64_t i = 0; i < assoc_; ++i)
        if (set[i].valid && set[i].line == line) return &set[i];
    return nullptr;
}

std::optional<SetAssocCache::Victim> SetAssocCache::insert(std::uint64_t line, std::uint64_t ready, bool dirty) {
    Way* set = &ways_[(line % sets_) * assoc_];
    Way* slot = nullptr;
    for (std::uint64_t i = 0; i < assoc_; ++i) {
        if (!set[i].valid) {
            slot = &set[i];
            break;
        }
        if (!slot || set[i].stamp < slot->stamp) slot = &set[i];
    }
    std::optional<Victim> out;
    if (slot->valid) out = Victim{slot->line, slot->dirty};
    *slot = Way{line, true, dirty, ++clock_, ready};
    return out;
}

std::optional<bool> SetAssocCache::invalidate(std::uint64_t line) {
    Way* set = &ways_[(line % sets_) * assoc_];
    for (std::uint64_t i = 0; i < assoc_; ++i) {
        if (set[i].valid && set[i].line == line) {
            const bool d = set[i].dirty;
            set[i] = Way{};
            return d;
        }
    }
    return std::nullopt;
}

namespace {

constexpr std::uint64_t kUnknown = std::numeric_limits<std::uint64_t>::max();

/// Per-cycle occupancy of a resource with `cap` slots per cycle. Cycles are
/// kept in a ring; a slot whose stored cycle differs from the queried one is
/// free.
class SlotCalendar {
public:
    explicit SlotCalendar(std::uint64_t cap) : cap_(cap), slots_(kSize) {}

    bool free(std::uint64_t c, std::uint64_t span = 1) const {
        for (std::uint64_t i = 0; i < span; ++i)
            if (count(c + i) >= cap_) return false;
        return true;
    }
    std::uint64_t book(std::uint64_t c, std::uint64_t span = 1) {
        std::uint64_t n = 0;
        for (std::uint64_t i = 0; i < span; ++i) {
            Slot& s = slots_[(c + i) & (kSize - 1)];
            if (s.cycle != c + i) s = Slot{c + i, 0};
            n = std::max(n, ++s.count);
        }
        return n;
    }

private:
    static constexpr std::uint64_t kSize = 1 << 16;
    struct Slot {
        std::uint64_t cycle = kUnknown;
        std::uint64_t count = 0;
    };
    std::uint64_t count(std::uint64_t c) const {
        const Slot& s = slots_[c & (kSize - 1)];
        return s.cycle == c ? s.count : 0;
    }

    std::uint64_t cap_;
    std::vector<Slot> slots_;
};

struct StoreEntry {
    std::uint64_t idx;
    std::uint64_t rfo_done;
};

}  // namespace

struct HostSystem::Core {
    Core(HostSystem& sys, std::size_t id)
        : sys(sys),
          id(id),
          l1(sys.cfg_.host.l1_bytes, sys.cfg_.host.l1_ways, sys.cfg_.topology.line_bytes),
          l2(sys.cfg_.host.l2_bytes, sys.cfg_.host.l2_ways, sys.cfg_.topology.line_bytes),
          hist_size(std::bit_ceil(std::max<std::uint64_t>(4096, 2 * sys.cfg_.timing.rob_entries))),
          done_at(hist_size, kUnknown),
          retire_at(hist_size, kUnknown),
          issue(sys.cfg_.timing.issue_width),
          load_units(sys.cfg_.host.load_units),
          store_units(sys.cfg_.host.store_units),
          int_alu(sys.cfg_.host.int_alu_units),
          int_mul(sys.cfg_.host.int_mul_units),
          int_div(sys.cfg_.host.int_div_units),
          fp_alu(sys.cfg_.host.fp_alu_units),
          fp_mul(sys.cfg_.host.fp_mul_units),
          fp_div(sys.cfg_.host.fp_div_units) {}

    HostSystem& sys;
    std::size_t id;
    SetAssocCache l1, l2;
    OpSource* source = nullptr;

    std::uint64_t hist_size;
    std::vector<std::uint64_t> done_at, retire_at;
    std::uint64_t n = 0;  // ops dispatched
    std::optional<HostOp> pending;

    std::uint64_t last_dispatch = 0, dispatched_in_cycle = 0;
    std::uint64_t retire_ptr = 0, last_retire = 0, retired_in_cycle = 0;
    std::deque<std::uint64_t> loads;
    std::deque<StoreEntry> stores;
    // Outstanding misses as occupancy steps (+1 at issue, -1 at fill),
    // sorted by cycle. Requests issue out of program order, so occupancy is
    // read at each request's own cycle rather than against a running clock.
    // Steps at or before the dispatch cycle are folded into mshr_base: every
    // later request starts at or after its dispatch cycle, which only grows.
    std::vector<std::pair<std::uint64_t, int>> mshr;
    std::size_t mshr_head = 0;
    std::int64_t mshr_base = 0;

    std::uint64_t mshr_slot(std::uint64_t s) {
        while (mshr_head < mshr.size() && mshr[mshr_head].first <= last_dispatch) mshr_base += mshr[mshr_head++].second;
        if (mshr_head > 256) {
            mshr.erase(mshr.begin(), mshr.begin() + static_cast<std::ptrdiff_t>(mshr_head));
            mshr_head = 0;
        }
        const auto limit = static_cast<std::int64_t>(sys.cfg_.host.mshr_limit);
        std::int64_t busy = mshr_base;
        std::size_t i = mshr_head;
        for (; i < mshr.size() && mshr[i].first <= s; ++i) busy += mshr[i].second;
        if (busy < limit) return s;
        while (i < mshr.size()) {
            const std::uint64_t t = mshr[i].first;
            for (; i < mshr.size() && mshr[i].first == t; ++i) busy += mshr[i].second;
            if (busy < limit) return t;
        }
        throw std::logic_error("host: MSHR occupancy never drops");
    }

    void mshr_hold(std::uint64_t from, std::uint64_t to) {
        for (const auto& step : {std::pair<std::uint64_t, int>{from, +1}, std::pair<std::uint64_t, int>{to, -1}}) {
            auto it = std::upper_bound(mshr.begin() + static_cast<std::ptrdiff_t>(mshr_head), mshr.end(), step);
            mshr.insert(it, step);
        }
    }

    std::optional<std::uint64_t> vima_unresolved;
    std::optional<std::uint64_t> last_vima;
    bool waiting = false;
    bool finished = false;
    std::uint64_t finish_cycle = 0;

    SlotCalendar issue, load_units, store_units, int_alu, int_mul, int_div, fp_alu, fp_mul, fp_div;

    std::uint64_t& done(std::uint64_t i) { return done_at[i & (hist_size - 1)]; }
    std::uint64_t& retired(std::uint64_t i) { return retire_at[i & (hist_size - 1)]; }

    void advance_retire() {
        const std::uint64_t width = sys.cfg_.timing.issue_width;
        while (retire_ptr < n && done(retire_ptr) != kUnknown) {
            std::uint64_t r = std::max(done(retire_ptr), last_retire);
            if (r == last_retire && retired_in_cycle == width) ++r;
            if (r != last_retire) retired_in_cycle = 0;
            ++retired_in_cycle;
            last_retire = r;
            retired(retire_ptr) = r;
            ++retire_ptr;
        }
    }

    // Retire cycle of op i, or kUnknown while it has not retired.
    std::uint64_t retire_of(std::uint64_t i) const { return i < retire_ptr ? retire_at[i & (hist_size - 1)] : kUnknown; }

    std::uint64_t book(SlotCalendar& unit, std::uint64_t ready, std::uint64_t span) {
        std::uint64_t c = ready;
        while (!unit.free(c, span) || !issue.free(c)) ++c;
        unit.book(c, span);
        sys.counters_.max_issue_per_cycle = std::max(sys.counters_.max_issue_per_cycle, issue.book(c));
        return c;
    }

    /// One op; false when it must wait for an unresolved VIMA op.
    bool step(const HostOp& op);
    void resolve_vima(std::uint64_t idx, const VimaResult& res, Time signal);
    std::uint64_t memory(std::uint64_t addr, bool write, std::uint64_t cycle);
};

bool HostSystem::Core::step(const HostOp& op) {
    const auto& tm = sys.cfg_.timing;
    const std::uint64_t j = n;
    const std::uint64_t rob = tm.rob_entries;

    // Everything that can block is checked before any state changes.
    std::uint64_t d = last_dispatch;
    if (j >= rob) {
        const std::uint64_t r = retire_of(j - rob);
        if (r == kUnknown) return false;
        d = std::max(d, r);
    }
    if (op.kind == HostOpKind::load && loads.size() >= tm.mob_read) {
        const std::uint64_t r = retire_of(loads.front());
        if (r == kUnknown) return false;
        d = std::max(d, r);
    }
    if (op.kind == HostOpKind::store && stores.size() >= tm.mob_write) {
        const std::uint64_t r = retire_of(stores.front().idx);
        if (r == kUnknown) return false;
        d = std::max(d, std::max(r, stores.front().rfo_done));
    }
    std::uint64_t ready = 0;
    for (std::uint16_t dist : op.dep) {
        if (dist == 0 || dist > j || dist > rob) continue;
        const std::uint64_t c = done(j - dist);
        if (c == kUnknown) return false;
        ready = std::max(ready, c);
    }
    if (op.kind == HostOpKind::hook && vima_unresolved) return false;
    std::uint64_t vima_floor = 0;
    if (op.kind == HostOpKind::vima && last_vima) {
        if (vima_unresolved) return false;
        const std::uint64_t r = retire_of(*last_vima);
        if (r == kUnknown) return false;
        vima_floor = r;
    }

    // Dispatch.
    if (d == last_dispatch && dispatched_in_cycle == tm.issue_width) ++d;
    if (d != last_dispatch) dispatched_in_cycle = 0;
    ++dispatched_in_cycle;
    last_dispatch = d;
    ready = std::max(ready, d);
    if (op.kind == HostOpKind::load) {
        if (loads.size() >= tm.mob_read) loads.pop_front();
        loads.push_back(j);
    }
    if (op.kind == HostOpKind::store && stores.size() >= tm.mob_write) stores.pop_front();

    const auto& h = sys.cfg_.host;
    std::uint64_t complete = 0;
    auto& ctr = sys.counters_;
    if (op.kind != HostOpKind::hook) ++ctr.ops;
    switch (op.kind) {
        case HostOpKind::load: {
            ++ctr.loads;
            const std::uint64_t s = book(load_units, ready, 1);
            complete = s + memory(op.addr, false, s);
            break;
        }
        case HostOpKind::store: {
            ++ctr.stores;
            const std::uint64_t s = book(store_units, ready, 1);
            stores.push_back({j, s + memory(op.addr, true, s)});
            complete = s + 1;
            break;
        }
        case HostOpKind::int_alu: complete = book(int_alu, ready, 1) + h.int_alu_lat; break;
        case HostOpKind::int_mul: complete = book(int_mul, ready, 1) + h.int_mul_lat; break;
        case HostOpKind::int_div: complete = book(int_div, ready, h.int_div_lat) + h.int_div_lat; break;
        case HostOpKind::fp_alu: complete = book(fp_alu, ready, 1) + h.fp_alu_lat; break;
        case HostOpKind::fp_mul: complete = book(fp_mul, ready, 1) + h.fp_mul_lat; break;
        case HostOpKind::fp_div: complete = book(fp_div, ready, h.fp_div_lat) + h.fp_div_lat; break;
        case HostOpKind::hook:
            if (op.hook) op.hook();
            complete = d;
            break;
        case HostOpKind::vima: {
            ++ctr.vima_ops;
            if (!sys.engine_) throw std::logic_error("host: VIMA op without an engine");
            if (vima_floor > ready) ctr.vima_wait_cycles += vima_floor - ready;
            const std::uint64_t s = book(int_alu, std::max(ready, vima_floor), 0);
            const Time arrive = max(sys.q_.now(), sys.to_time(s + tm.instruction_dispatch_lat));
            vima_unresolved = j;
            last_vima = j;
            const VimaInstruction in = op.vima;
            sys.q_.schedule(arrive, 0, [this, j, in] {
                sys.engine_->submit(in, [this, j, in](const VimaResult& r) {
                    if (r.status == VimaStatus::done) sys.drop_lines(in.dst, in.length);
                    resolve_vima(j, r, sys.q_.now());
                });
            });
            complete = kUnknown;
            break;
        }
    }
    done(j) = complete;
    ++n;
    advance_retire();
    return true;
}

void HostSystem::Core::resolve_vima(std::uint64_t idx, const VimaResult& res, Time signal) {
    const std::uint64_t back = sys.to_cycles(signal) + sys.cfg_.timing.instruction_dispatch_lat;
    done(idx) = back;
    vima_unresolved.reset();
    waiting = false;
    if (res.status == VimaStatus::exception) {
        // Flush: the window drains and nothing younger survives.
        const std::uint64_t occupancy = n - retire_ptr;
        finished = true;
        finish_cycle = back + occupancy;
        pending.reset();
        sys.fault_ = res.fault;
        sys.fault_op_ = idx;
        return;
    }
    advance_retire();
}

std::uint64_t HostSystem::Core::memory(std::uint64_t addr, bool write, std::uint64_t s) {
    auto& ctr = sys.counters_;
    const auto& tm = sys.cfg_.timing;
    const std::uint64_t line = addr / sys.cfg_.topology.line_bytes;

    ++ctr.l1_accesses;
    if (auto* w = l1.lookup(line)) {
        ++ctr.l1_hits;
        if (write) w->dirty = true;
        return std::max(s + tm.l1_lat, w->ready) - s;
    }
    ++ctr.l1_misses;

    const std::uint64_t t = mshr_slot(s);
    ctr.mshr_stall_cycles += t - s;

    std::uint64_t ready = 0;
    ++ctr.l2_accesses;
    if (auto* w2 = l2.lookup(line)) {
        ++ctr.l2_hits;
        ready = std::max(t + tm.l1_lat + tm.l2_lat, w2->ready);
    } else {
        ++ctr.l2_misses;
        ++ctr.llc_accesses;
        if (auto* w3 = sys.llc_.lookup(line)) {
            ++ctr.llc_hits;
            ready = std::max(t + tm.l1_lat + tm.l2_lat + tm.llc_lat, w3->ready);
        } else {
            ++ctr.llc_misses;
            const std::uint64_t req = t + tm.l1_lat + tm.l2_lat + tm.llc_lat;
            ready = sys.fill_from_memory(line, write, req);
            if (auto v = sys.llc_.insert(line, ready, false)) sys.llc_evicted(*v, req);
        }
        if (auto v = l2.insert(line, ready, false)) {
            // Inclusion: the L1 copy leaves with it.
            const auto d1 = l1.invalidate(v->line);
            if (v->dirty || d1.value_or(false)) sys.write_into_llc(v->line, ready);
        }
    }
    if (auto v = l1.insert(line, ready, write)) {
        if (v->dirty) {
            ++ctr.l2_accesses;
            if (auto* w2 = l2.lookup(v->line)) {
                w2->dirty = true;
            } else {
                sys.write_into_llc(v->line, ready);
            }
        }
    }
    mshr_hold(t, ready);
    return ready - s;
}

HostSystem::HostSystem(const SimConfig& cfg, EventQueue& q, VaultArray& dram, HostLinks& links, VimaEngine* engine,
                       std::size_t cores)
    : cfg_(cfg),
      q_(q),
      dram_(dram),
      links_(links),
      engine_(engine),
      clock_("core", cfg.timing.core_freq),
      llc_(cfg.host.llc_bytes, cfg.host.llc_ways, cfg.topology.line_bytes) {
    if (cores == 0) throw std::invalid_argument("host: at least one core");
    for (std::size_t i = 0; i < cores; ++i) cores_.push_back(std::make_unique<Core>(*this, i));
}

HostSystem::~HostSystem() = default;

std::size_t HostSystem::cores() const { return cores_.size(); }
const SetAssocCache& HostSystem::l1(std::size_t core) const { return cores_.at(core)->l1; }
const SetAssocCache& HostSystem::l2(std::size_t core) const { return cores_.at(core)->l2; }

std::uint64_t HostSystem::to_cycles(Time t) const {
    const std::uint64_t p = clock_.period().ps;
    return (t.ps + p - 1) / p;
}

std::uint64_t HostSystem::dram_read(std::uint64_t line, std::uint64_t cycle) {
    ++counters_.dram_line_reads;
    const Time req = links_.transfer(cfg_.topology.link_burst_bytes, to_time(cycle));
    const Time data = dram_.service(dram_.make(AccessKind::read, line * cfg_.topology.line_bytes, Origin::host), req);
    return to_cycles(links_.transfer(cfg_.topology.line_bytes, data));
}

std::uint64_t HostSystem::dram_write(std::uint64_t line, std::uint64_t cycle) {
    ++counters_.dram_line_writes;
    // Command and data travel together.
    const Time arrive = links_.transfer(cfg_.topology.link_burst_bytes + cfg_.topology.line_bytes, to_time(cycle));
    return to_cycles(dram_.service(dram_.make(AccessKind::write, line * cfg_.topology.line_bytes, Origin::host), arrive));
}

std::uint64_t HostSystem::fill_from_memory(std::uint64_t line, bool write, std::uint64_t cycle) {
    const std::uint64_t addr = line * cfg_.topology.line_bytes;
    if (engine_) {
        if (write) {
            engine_->snoop(AccessKind::write, addr);
        } else if (engine_->snoop(AccessKind::read, addr) == SnoopResult::supplied) {
            ++counters_.snoop_supplied;
            const Time req = links_.transfer(cfg_.topology.link_burst_bytes, to_time(cycle));
            const Time data = req + engine_->clock().cycles(1);
            return to_cycles(links_.transfer(cfg_.topology.line_bytes, data));
        }
    }
    return dram_read(line, cycle);
}

void HostSystem::write_into_llc(std::uint64_t line, std::uint64_t cycle) {
    ++counters_.llc_accesses;
    if (auto* w = llc_.lookup(line)) {
        w->dirty = true;
    } else {
        dram_write(line, cycle);
    }
}

void HostSystem::drop_lines(std::uint64_t base, std::uint64_t bytes) {
    const std::uint64_t lb = cfg_.topology.line_bytes;
    for (std::uint64_t line = base / lb; line * lb < base + bytes; ++line) {
        llc_.invalidate(line);
        for (auto& c : cores_) {
            c->l1.invalidate(line);
            c->l2.invalidate(line);
        }
    }
}

void HostSystem::llc_evicted(const SetAssocCache::Victim& v, std::uint64_t cycle) {
    bool dirty = v.dirty;
    for (auto& c : cores_) {
        dirty |= c->l1.invalidate(v.line).value_or(false);
        dirty |= c->l2.invalidate(v.line).value_or(false);
    }
    if (dirty) dram_write(v.line, cycle);
}

std::uint64_t HostSystem::access(std::size_t core, std::uint64_t addr, bool write, std::uint64_t cycle) {
    return cores_.at(core)->memory(addr, write, cycle);
}

std::uint64_t HostSystem::coherence_prologue(const std::vector<AddressRange>& regions) {
    const std::uint64_t lb = cfg_.topology.line_bytes;
    auto inside = [&](std::uint64_t line) {
        const std::uint64_t a = line * lb;
        for (const auto& r : regions)
            if (a + lb > r.base && a < r.base + r.bytes) return true;
        return false;
    };
    std::vector<std::uint64_t> lines;
    llc_.for_each_valid([&](const SetAssocCache::Way& w) {
        if (inside(w.line)) lines.push_back(w.line);
    });
    std::uint64_t done = 0;
    for (std::uint64_t line : lines) {
        bool dirty = llc_.invalidate(line).value_or(false);
        for (auto& c : cores_) {
            dirty |= c->l1.invalidate(line).value_or(false);
            dirty |= c->l2.invalidate(line).value_or(false);
        }
        if (!dirty) continue;
        ++counters_.prologue_writebacks;
        done = std::max(done, dram_write(line, 0));
    }
    return done;
}

HostRunResult HostSystem::run(std::vector<std::unique_ptr<OpSource>>& sources) {
    if (sources.size() != cores_.size()) throw std::invalid_argument("host: one op source per core");
    std::vector<bool> exhausted(cores_.size(), false);
    for (std::size_t i = 0; i < cores_.size(); ++i) cores_[i]->source = sources[i].get();

    constexpr int kBatch = 64;
    for (;;) {
        Core* best = nullptr;
        for (std::size_t i = 0; i < cores_.size(); ++i) {
            Core& c = *cores_[i];
            if (c.finished || c.waiting || exhausted[i]) continue;
            if (!best || c.last_dispatch < best->last_dispatch) best = &c;
        }
        if (best) {
            for (int k = 0; k < kBatch && !best->finished; ++k) {
                if (!best->pending) {
                    HostOp op;
                    if (!best->source->next(op)) {
                        exhausted[best->id] = true;
                        break;
                    }
                    best->pending = std::move(op);
                }
                if (!best->step(*best->pending)) {
                    best->waiting = true;
                    break;
                }
                best->pending.reset();
            }
            continue;
        }
        if (q_.advance()) continue;
        break;
    }
    q_.run();

    HostRunResult res;
    std::uint64_t last = 0;
    for (auto& c : cores_) {
        if (!c->finished && (c->waiting || c->retire_ptr != c->n))
            throw std::logic_error("host: core " + std::to_string(c->id) + " stalled with ops in flight");
        const std::uint64_t end = c->finished ? c->finish_cycle : c->last_retire;
        res.core_cycles.push_back(end);
        last = std::max(last, end);
    }
    res.elapsed = to_time(last);
    res.fault = fault_;
    res.fault_op = fault_op_;
    return res;
}

}  // namespace vima
