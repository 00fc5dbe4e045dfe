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

#include <doctest.h>

#include <memory>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "vimasim/host.hpp"
#include "vimasim/vima_engine.hpp"

using namespace vima;

namespace {

constexpr std::uint64_t kVb = 8192;

struct Rig {
    SimConfig cfg;
    EventQueue q;
    BackingStore mem;
    std::unique_ptr<VaultArray> dram;
    std::unique_ptr<VimaEngine> engine;
    VimaResult last;

    Rig() { reset(); }
    void reset() {
        dram = std::make_unique<VaultArray>(cfg.topology, cfg.timing);
        engine = std::make_unique<VimaEngine>(cfg, q, *dram, mem);
    }

    // Submits at the first VIMA edge at or after `at`, runs to completion.
    VimaResult run(const VimaInstruction& in, Time at = Time{}) {
        const Time t = engine->clock().next_edge(max(at, q.now()));
        q.schedule(t, 0, [this, in] { engine->submit(in, [this](const VimaResult& r) { last = r; }); });
        q.run();
        return last;
    }
};

VimaInstruction add_i32(std::uint64_t d, std::uint64_t a, std::uint64_t b) {
    return {Opcode::ADD, ElementType::i32, d, a, b, 0, kVb};
}
VimaInstruction copy_i32(std::uint64_t d, std::uint64_t a) {
    return {Opcode::ADD_SCALAR, ElementType::i32, d, a, std::nullopt, 0, kVb};
}

}  // namespace

TEST_CASE("covering lines") {
    CHECK(covering_lines(8192 * 5, kVb, kVb) == std::vector<std::uint64_t>{8192 * 5});
    CHECK(covering_lines(8192 * 5 + 4, kVb, kVb) == std::vector<std::uint64_t>{8192 * 5, 8192 * 6});
    CHECK(covering_lines(8192 * 5 + 8188, kVb, kVb) == std::vector<std::uint64_t>{8192 * 5, 8192 * 6});
}

TEST_CASE("vector cache agrees with a brute-force LRU") {
    std::mt19937_64 rng(2024);
    VimaCache c(8, kVb);
    oracle::Lru ref(8);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::uint64_t tag = (rng() % 14) * kVb;
        const bool want = ref.access(tag);
        REQUIRE(c.access(tag).hit == want);
        hits += want;
    }
    CHECK(hits > 0);
    CHECK(hits < 10000);
}

TEST_CASE("nine tags into eight lines evict the first") {
    VimaCache c(8, kVb);
    for (std::uint64_t i = 0; i < 8; ++i) CHECK_FALSE(c.access(i * kVb).hit);
    const auto a = c.access(8 * kVb);
    REQUIRE(a.evicted.has_value());
    CHECK(*a.evicted == 0);
    CHECK_FALSE(c.find(0).has_value());
}

TEST_CASE("an 8 KB fetch is 128 sub-requests, 4 per vault") {
    Rig r;
    r.run(copy_i32(0x100000, 0x40000));
    CHECK(r.engine->counters().read_subrequests == 128);
    CHECK(r.dram->counters().reads[DramCounters::idx(Origin::vima)] == 128);
    REQUIRE(r.dram->per_vault().size() == 32);
    for (auto n : r.dram->per_vault()) CHECK(n == 4);

    Rig small;
    small.cfg.topology.vector_bytes = 256;
    small.cfg.topology.vima_cache_bytes = 256 * 8;
    small.reset();
    small.run({Opcode::ADD_SCALAR, ElementType::i32, 0x1000, 0x4000, std::nullopt, 0, 256});
    CHECK(small.engine->counters().read_subrequests == 4);
}

TEST_CASE("all-hit integer add: 1 tag + 8 transfer + 8 FU cycles") {
    Rig r;
    r.run(add_i32(0x100000, 0x0, 0x2000));
    const auto reads = r.dram->counters().total();
    const VimaResult h = r.run(add_i32(0x102000, 0x0, 0x2000), r.engine->drain_done() + Time{5000});
    const Time cyc = r.engine->clock().period();
    CHECK(h.status == VimaStatus::done);
    CHECK(h.phases.tag_done - h.phases.arrive == cyc);
    CHECK(h.phases.fetch_done == h.phases.tag_done);
    CHECK(h.phases.transfer_done - h.phases.fetch_done == Time{8 * cyc.ps});
    CHECK(h.phases.execute_done - h.phases.transfer_done == Time{8 * cyc.ps});
    CHECK(h.phases.execute_done - h.phases.arrive == Time{17 * cyc.ps});
    CHECK(r.dram->counters().total() == reads);
}

TEST_CASE("functional-unit latencies") {
    Rig r;
    VimaInstruction in = add_i32(0, 0, 0x2000);
    CHECK(r.engine->fu_cycles(in) == 8);
    in.op = Opcode::MUL;
    CHECK(r.engine->fu_cycles(in) == 12);
    in.etype = ElementType::f64;
    in.op = Opcode::DIV;
    CHECK(r.engine->fu_cycles(in) == 28);
    in.op = Opcode::ADD;
    CHECK(r.engine->fu_cycles(in) == 13);
}

TEST_CASE("unaligned source over two cached lines needs no DRAM") {
    Rig r;
    r.run(add_i32(0x100000, 0x0, 0x2000));
    const auto reads = r.dram->counters().reads[0];
    r.run(copy_i32(0x104000, 0x4));
    CHECK(r.dram->counters().reads[0] == reads);
    CHECK(r.engine->counters().hits >= 2);
}

TEST_CASE("dirty victims are written back, clean ones are dropped") {
    Rig r;
    for (std::uint64_t i = 0; i < 4; ++i) r.run(copy_i32(0x100000 + i * kVb, 0x10000 * (i + 1)));
    CHECK(r.engine->counters().evictions == 0);
    CHECK(r.engine->counters().write_subrequests == 0);
    r.run(copy_i32(0x100000 + 4 * kVb, 0x50000));
    // The source evicts a clean source; the result evicts the first dirty result.
    CHECK(r.engine->counters().evictions == 2);
    CHECK(r.engine->counters().dirty_evictions == 1);
    CHECK(r.engine->counters().write_subrequests == 128);
}

TEST_CASE("snoops") {
    Rig r;
    r.run(copy_i32(0x100000, 0x40000));
    CHECK(r.engine->snoop(AccessKind::read, 0x40000 + 64) == SnoopResult::supplied);
    CHECK(r.engine->cache().find(0x40000).has_value());
    CHECK(r.engine->snoop(AccessKind::read, 0x900000) == SnoopResult::none);
    const auto writes = r.engine->counters().write_subrequests;
    CHECK(r.engine->snoop(AccessKind::write, 0x100000 + 128) == SnoopResult::invalidated);
    CHECK(r.engine->counters().write_subrequests == writes + 128);
    CHECK_FALSE(r.engine->cache().find(0x100000).has_value());
}

TEST_CASE("one instruction in flight") {
    Rig r;
    r.engine->submit(copy_i32(0x100000, 0x40000), [](const VimaResult&) {});
    CHECK_THROWS_AS(r.engine->submit(copy_i32(0x102000, 0x40000), [](const VimaResult&) {}), std::logic_error);
    r.q.run();
    CHECK_FALSE(r.engine->busy());
}

TEST_CASE("a fault leaves memory untouched") {
    Rig r;
    r.mem.store<std::uint32_t>(0x40000, 5);
    const VimaResult f = r.run(copy_i32(r.cfg.topology.capacity_bytes, 0x40000));
    CHECK(f.status == VimaStatus::exception);
    CHECK_FALSE(f.fault.empty());
    CHECK(r.engine->counters().exceptions == 1);
    CHECK(r.dram->counters().total() == 0);
}

// Random streams through the host dispatch path with one faulting
// instruction; memory must equal functional execution of the prefix.
TEST_CASE("precise exceptions over random streams") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        SimConfig cfg;
        BackingStore mem, expect;
        for (std::uint64_t a = 0; a < 16 * kVb; a += 8) {
            const std::uint64_t v = rng();
            mem.store<std::uint64_t>(a, v);
            expect.store<std::uint64_t>(a, v);
        }

        const int len = 5 + static_cast<int>(rng() % 20);
        const int bad = static_cast<int>(rng() % len);
        std::vector<HostOp> ops;
        for (int i = 0; i < len; ++i) {
            const std::uint64_t d = (rng() % 16) * kVb, a = (rng() % 16) * kVb + (rng() % 64) * 4;
            const std::uint64_t b = (rng() % 16) * kVb;
            VimaInstruction in;
            switch (rng() % 4) {
                case 0: in = add_i32(d, a, b); break;
                case 1: in = {Opcode::SUB, ElementType::u32, d, a, b, 0, kVb}; break;
                case 2: in = {Opcode::MAC_SCALAR, ElementType::i32, d, a, std::nullopt, rng() % 9, kVb}; break;
                default: in = {Opcode::XOR, ElementType::u32, d, a, b, 0, kVb}; break;
            }
            if (i == bad) {
                if (rng() % 2) in.dst = cfg.topology.capacity_bytes + d;
                else in.src1 = cfg.topology.capacity_bytes - 64;
            }
            if (i < bad) apply(in, expect);
            ops.push_back(HostOp::vector(in));
        }

        EventQueue q;
        VaultArray dram(cfg.topology, cfg.timing);
        HostLinks links(cfg.topology, cfg.timing);
        VimaEngine engine(cfg, q, dram, mem);
        HostSystem host(cfg, q, dram, links, &engine, 1);
        std::vector<std::unique_ptr<OpSource>> src;
        src.push_back(std::make_unique<VectorSource>(ops));
        const HostRunResult res = host.run(src);
        REQUIRE(res.fault.has_value());
        CHECK(res.fault_op == static_cast<std::uint64_t>(bad));
        CHECK(engine.counters().instructions == static_cast<std::uint64_t>(bad + 1));
        REQUIRE(mem == expect);

        // Sub-request conservation.
        const auto& c = engine.counters();
        CHECK(c.read_subrequests == 128 * c.misses);
        CHECK(c.write_subrequests == 128 * (c.dirty_evictions + c.snoop_writebacks + c.flush_writebacks));
        CHECK(dram.counters().by(Origin::vima) == c.read_subrequests + c.write_subrequests);
    }
}
