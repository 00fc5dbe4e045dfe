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

#include "vimasim/vima_engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace vima {

std::vector<std::uint64_t> covering_lines(std::uint64_t base, std::uint64_t len, std::uint64_t vector_bytes) {
    std::vector<std::uint64_t> tags;
    const std::uint64_t first = base / vector_bytes * vector_bytes;
    const std::uint64_t last = (base + len - 1) / vector_bytes * vector_bytes;
    for (std::uint64_t t = first; t <= last; t += vector_bytes) tags.push_back(t);
    return tags;
}

VimaCache::VimaCache(std::size_t lines, std::uint64_t vector_bytes) : lines_(lines), vector_bytes_(vector_bytes) {}

std::optional<std::size_t> VimaCache::find(std::uint64_t tag) const {
    for (std::size_t i = 0; i < lines_.size(); ++i)
        if (lines_[i].valid && lines_[i].tag == tag) return i;
    return std::nullopt;
}

std::optional<std::size_t> VimaCache::victim() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < lines_.size(); ++i) {
        const auto& l = lines_[i];
        if (!l.valid) return i;
        if (l.pinned) continue;
        if (!best || l.lru_stamp < lines_[*best].lru_stamp) best = i;
    }
    return best;
}

void VimaCache::touch(std::size_t slot) { lines_[slot].lru_stamp = ++clock_; }

void VimaCache::install(std::size_t slot, std::uint64_t tag) {
    auto& l = lines_[slot];
    l = VimaCacheLine{};
    l.tag = tag;
    l.valid = true;
    l.lru_stamp = ++clock_;
}

VimaCache::Access VimaCache::access(std::uint64_t tag) {
    Access a;
    if (auto s = find(tag)) {
        a.hit = true;
        touch(*s);
        return a;
    }
    const auto v = victim();
    if (!v) throw std::logic_error("vima cache: every line is pinned");
    if (lines_[*v].valid) {
        a.evicted = lines_[*v].tag;
        a.evicted_dirty = lines_[*v].dirty;
    }
    install(*v, tag);
    return a;
}

namespace {

// Functional-unit latencies are given for an 8 KB vector at 256 lanes,
// i.e. with this many beats folded in.
std::uint64_t reference_beats() { return transfer_beats(TopologyConfig{}, TimingConfig{}); }

}  // namespace

VimaEngine::VimaEngine(const SimConfig& cfg, EventQueue& q, VaultArray& dram, BackingStore& mem, ComponentId id)
    : cfg_(cfg),
      q_(q),
      dram_(dram),
      mem_(mem),
      id_(id),
      clock_("vima", cfg.timing.vima_freq),
      cache_(vima_cache_lines(cfg.topology), cfg.topology.vector_bytes),
      beats_(transfer_beats(cfg.topology, cfg.timing)),
      lines_per_vector_(lines_per_vector(cfg.topology)) {}

std::uint64_t VimaEngine::fu_cycles(const VimaInstruction& in) const {
    const auto& t = cfg_.timing;
    const bool fp = is_float(in.etype);
    std::uint64_t table = 0;
    switch (op_class(in.op)) {
        case OpClass::alu: table = fp ? t.vima_fp_alu : t.vima_int_alu; break;
        case OpClass::mul: table = fp ? t.vima_fp_mul : t.vima_int_mul; break;
        case OpClass::div: table = fp ? t.vima_fp_div : t.vima_int_div; break;
    }
    const std::uint64_t ref = reference_beats();
    return table >= ref ? table - ref + beats_ : table;
}

std::optional<std::string> VimaEngine::fault_of(const VimaInstruction& in) const {
    if (auto err = check_well_formed(in, cfg_.topology.vector_bytes)) return err;
    const auto& map = dram_.address_map();
    const auto beyond = [&](std::uint64_t a) { return !map.in_capacity(a, in.length); };
    if (beyond(in.dst)) return "destination beyond memory capacity";
    if (in.src1 && beyond(*in.src1)) return "src1 beyond memory capacity";
    if (in.src2 && beyond(*in.src2)) return "src2 beyond memory capacity";
    return std::nullopt;
}

Time VimaEngine::write_back(std::uint64_t tag, Time now) {
    Time done = now;
    const std::uint64_t line = cfg_.topology.line_bytes;
    for (std::uint64_t i = 0; i < lines_per_vector_; ++i) {
        done = max(done, dram_.service(dram_.make(AccessKind::write, tag + i * line, Origin::vima), now));
        ++counters_.write_subrequests;
    }
    return done;
}

std::size_t VimaEngine::take_slot(Time now, std::vector<std::uint64_t>* victims) {
    const auto v = cache_.victim();
    if (!v) throw std::logic_error("vima cache: every line is pinned");
    auto& l = cache_.line(*v);
    if (l.valid) {
        ++counters_.evictions;
        if (l.dirty) {
            ++counters_.dirty_evictions;
            if (victims) {
                victims->push_back(l.tag);
            } else {
                write_back(l.tag, now);
            }
        }
    }
    return *v;
}

void VimaEngine::submit(const VimaInstruction& in, SignalFn on_signal) {
    if (busy_) throw std::logic_error("vima engine: instruction already in flight");
    busy_ = true;
    current_ = in;
    on_signal_ = std::move(on_signal);
    result_ = VimaResult{};
    tags_.clear();
    pinned_.clear();

    const Time now = q_.now();
    result_.phases.arrive = now;
    if (last_signal_) counters_.gap_time += now - *last_signal_;
    const Time t0 = clock_.next_edge(now);

    if (auto f = fault_of(in)) {
        result_.status = VimaStatus::exception;
        result_.fault = *f;
        q_.schedule(t0 + clock_.cycles(cfg_.timing.vima_tag_cycles), id_, [this] { finish(); });
        return;
    }

    for (std::uint64_t a : in.read_operands())
        for (std::uint64_t t : covering_lines(a, in.length, cfg_.topology.vector_bytes))
            if (std::find(tags_.begin(), tags_.end(), t) == tags_.end()) tags_.push_back(t);

    const std::uint64_t ports = cfg_.timing.vima_cache_ports;
    const std::uint64_t rounds = std::max<std::uint64_t>(1, (tags_.size() + ports - 1) / ports);
    counters_.tag_checks += tags_.size();
    q_.schedule(t0 + clock_.cycles(rounds * cfg_.timing.vima_tag_cycles), id_, [this] { tag_phase_done(); });
}

void VimaEngine::tag_phase_done() {
    const Time now = q_.now();
    result_.phases.tag_done = now;

    std::vector<Time> arrivals;
    std::vector<std::uint64_t> victims;
    const std::uint64_t line = cfg_.topology.line_bytes;
    for (std::uint64_t tag : tags_) {
        std::size_t slot = 0;
        if (auto hit = cache_.find(tag)) {
            ++counters_.hits;
            slot = *hit;
            cache_.touch(slot);
        } else {
            ++counters_.misses;
            slot = take_slot(now, &victims);
            cache_.install(slot, tag);
            for (std::uint64_t i = 0; i < lines_per_vector_; ++i) {
                arrivals.push_back(dram_.service(dram_.make(AccessKind::read, tag + i * line, Origin::vima), now));
                ++counters_.read_subrequests;
            }
            counters_.fetched_bytes += cfg_.topology.vector_bytes;
            counters_.cache_line_accesses += lines_per_vector_;  // fill writes
        }
        cache_.line(slot).pinned = true;
        pinned_.push_back(slot);
    }
    // Victims sit in a writeback buffer and queue behind the operand reads.
    for (std::uint64_t tag : victims) write_back(tag, now);

    // A fetch completes with its last sub-request, unless the fill path
    // is capped to a number of lines per cycle.
    Time fetch_done = now;
    if (!arrivals.empty()) {
        std::sort(arrivals.begin(), arrivals.end());
        const std::uint64_t per_cycle = cfg_.timing.vima_fill_lines_per_cycle;
        Time slot = clock_.next_edge(arrivals.back());
        if (per_cycle != 0) {
            slot = Time{};
            std::uint64_t used = 0;
            for (Time a : arrivals) {
                const Time e = clock_.next_edge(a);
                if (e > slot) {
                    slot = e;
                    used = 0;
                }
                if (used == per_cycle) {
                    slot += clock_.period();
                    used = 0;
                }
                ++used;
            }
            slot += clock_.period();
        }
        fetch_done = slot;
        counters_.fetch_time += fetch_done - now;
    }
    result_.phases.fetch_done = fetch_done;

    const auto operands = current_.read_operands().size();
    counters_.operand_vectors += operands;
    counters_.cache_line_accesses += lines_per_vector_ * operands;  // operand transfer reads

    // The previous result must have drained out of the fill buffer.
    const Time start = clock_.next_edge(max(fetch_done, drain_done_));
    result_.phases.transfer_done = start + clock_.cycles(beats_);
    result_.phases.execute_done = result_.phases.transfer_done + clock_.cycles(fu_cycles(current_));
    q_.schedule(result_.phases.execute_done, id_, [this] { finish(); });
}

void VimaEngine::finish() {
    const Time now = q_.now();
    for (std::size_t s : pinned_) cache_.line(s).pinned = false;
    pinned_.clear();

    if (result_.status == VimaStatus::done) {
        result_.divide_by_zero = apply(current_, mem_).divide_by_zero;
        auto slot = cache_.find(current_.dst);
        if (!slot) {
            slot = take_slot(now);
            cache_.install(*slot, current_.dst);
        } else {
            cache_.touch(*slot);
        }
        cache_.line(*slot).dirty = true;
        counters_.cache_line_accesses += lines_per_vector_;  // fill-buffer drain
        drain_done_ = now + clock_.cycles(beats_);
        result_.phases.drain_done = drain_done_;
    } else {
        ++counters_.exceptions;
        auto& p = result_.phases;
        p.tag_done = p.fetch_done = p.transfer_done = p.execute_done = p.drain_done = now;
    }

    ++counters_.instructions;
    counters_.busy_time += now - result_.phases.arrive;
    last_signal_ = now;
    busy_ = false;
    auto cb = std::move(on_signal_);
    on_signal_ = nullptr;
    if (cb) cb(result_);
}

SnoopResult VimaEngine::snoop(AccessKind kind, std::uint64_t addr) {
    const std::uint64_t vb = cfg_.topology.vector_bytes;
    const auto slot = cache_.find(addr / vb * vb);
    if (!slot) return SnoopResult::none;
    if (kind == AccessKind::read) {
        ++counters_.snoop_supplies;
        return SnoopResult::supplied;
    }
    auto& l = cache_.line(*slot);
    if (l.dirty) {
        ++counters_.snoop_writebacks;
        write_back(l.tag, q_.now());
    }
    cache_.invalidate(*slot);
    ++counters_.snoop_invalidations;
    return SnoopResult::invalidated;
}

Time VimaEngine::flush() {
    Time done = q_.now();
    for (std::size_t s = 0; s < cache_.lines().size(); ++s) {
        auto& l = cache_.line(s);
        if (!l.valid || !l.dirty) continue;
        done = max(done, write_back(l.tag, q_.now()));
        l.dirty = false;
        ++counters_.flush_writebacks;
    }
    return done;
}

}  // namespace vima
