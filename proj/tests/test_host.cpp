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

#include "vimasim/host.hpp"
#include "vimasim/metrics.hpp"

using namespace vima;

namespace {

struct Rig {
    SimConfig cfg;
    EventQueue q;
    std::unique_ptr<VaultArray> dram;
    std::unique_ptr<HostLinks> links;
    std::unique_ptr<HostSystem> host;

    explicit Rig(std::size_t cores = 1, SimConfig c = {}) : cfg(c) {
        dram = std::make_unique<VaultArray>(cfg.topology, cfg.timing);
        links = std::make_unique<HostLinks>(cfg.topology, cfg.timing);
        host = std::make_unique<HostSystem>(cfg, q, *dram, *links, nullptr, cores);
    }

    HostRunResult run(std::vector<HostOp> ops) {
        std::vector<std::unique_ptr<OpSource>> src;
        src.push_back(std::make_unique<VectorSource>(std::move(ops)));
        return host->run(src);
    }
};

std::uint64_t cycles_of(std::vector<HostOp> ops) {
    Rig r;
    return r.run(std::move(ops)).core_cycles.at(0);
}

std::vector<HostOp> chain(HostOpKind k, int n) {
    std::vector<HostOp> ops;
    for (int i = 0; i < n; ++i) ops.push_back(HostOp::compute(k, i ? 1 : 0));
    return ops;
}

std::vector<HostOp> independent(HostOpKind k, int n) { return std::vector<HostOp>(n, HostOp::compute(k)); }

}  // namespace

TEST_CASE("L1 hit: 2 cycles and one 194 pJ line access") {
    Rig r;
    r.host->access(0, 0x1000, false, 0);
    const auto before = r.host->counters().l1_accesses;
    CHECK(r.host->access(0, 0x1000 + 8, false, 1000) == 2);
    CHECK(r.host->counters().l1_accesses == before + 1);

    SimStats s;
    s.backend = Backend::avx;
    s.host.l1_accesses = 1;
    const EnergyScope none{false, false, false};
    CHECK(total_energy(s, EnergyConfig{}, none).l1_dyn == 194.0);
}

TEST_CASE("miss latencies follow the hierarchy") {
    Rig r;
    const auto cold = r.host->access(0, 0x40000, false, 0);
    CHECK(cold > 2 + 10 + 22);
    CHECK(r.host->counters().dram_line_reads == 1);
    CHECK(r.host->counters().llc_misses == 1);
}

TEST_CASE("scalar alu chain: one cycle per op") {
    const auto a = cycles_of(chain(HostOpKind::int_alu, 100));
    const auto b = cycles_of(chain(HostOpKind::int_alu, 1100));
    CHECK(b - a == 1000);
    CHECK(a >= 100);
    CHECK(a < 110);
}

TEST_CASE("fp latency chains") {
    CHECK(cycles_of(chain(HostOpKind::fp_alu, 1100)) - cycles_of(chain(HostOpKind::fp_alu, 100)) == 3000);
    CHECK(cycles_of(chain(HostOpKind::fp_mul, 1100)) - cycles_of(chain(HostOpKind::fp_mul, 100)) == 5000);
}

TEST_CASE("independent fp multiplies: one per cycle") {
    CHECK(cycles_of(independent(HostOpKind::fp_mul, 2000)) - cycles_of(independent(HostOpKind::fp_mul, 1000)) == 1000);
}

TEST_CASE("independent int adds: three units") {
    const auto d = cycles_of(independent(HostOpKind::int_alu, 3000)) - cycles_of(independent(HostOpKind::int_alu, 0));
    CHECK(d == doctest::Approx(1000).epsilon(0.01));
}

TEST_CASE("issue never exceeds the width") {
    std::vector<HostOp> ops;
    for (int i = 0; i < 2000; ++i) {
        for (int k = 0; k < 3; ++k) ops.push_back(HostOp::compute(HostOpKind::int_alu));
        ops.push_back(HostOp::compute(HostOpKind::fp_alu));
        ops.push_back(HostOp::compute(HostOpKind::fp_mul));
        ops.push_back(HostOp::compute(HostOpKind::int_mul));
        ops.push_back(HostOp::mem(HostOpKind::load, 0x1000));
        ops.push_back(HostOp::mem(HostOpKind::load, 0x1040));
    }
    Rig r;
    r.run(ops);
    CHECK(r.host->counters().max_issue_per_cycle <= r.cfg.timing.issue_width);
    CHECK(r.host->counters().max_issue_per_cycle == r.cfg.timing.issue_width);
}

TEST_CASE("inclusive hierarchy") {
    Rig r;
    std::mt19937_64 rng(5);
    for (std::uint64_t c = 0; c < 20000; ++c) r.host->access(0, (rng() % (1 << 16)) * 64, rng() % 3 == 0, c * 4);
    int checked = 0;
    r.host->l1(0).for_each_valid([&](const SetAssocCache::Way& w) {
        CHECK(r.host->l2(0).peek(w.line) != nullptr);
        CHECK(r.host->llc().peek(w.line) != nullptr);
        ++checked;
    });
    r.host->l2(0).for_each_valid([&](const SetAssocCache::Way& w) { CHECK(r.host->llc().peek(w.line) != nullptr); });
    CHECK(checked == 1024);  // 64 KB of 64 B lines, all in use
}

TEST_CASE("set-associative LRU") {
    SetAssocCache c(4 * 64 * 2, 2, 64);  // 4 sets x 2 ways
    CHECK(c.sets() == 4);
    c.insert(0, 0, false);
    c.insert(4, 0, true);
    CHECK(c.lookup(0) != nullptr);  // 0 becomes most recent
    const auto v = c.insert(8, 0, false);
    REQUIRE(v.has_value());
    CHECK(v->line == 4);
    CHECK(v->dirty);
    CHECK(c.invalidate(8) == std::optional<bool>(false));
    CHECK_FALSE(c.invalidate(8).has_value());
}

TEST_CASE("coherence prologue") {
    Rig r;
    CHECK(r.host->coherence_prologue({{0, 1 << 20}}) == 0);
    CHECK(r.host->counters().prologue_writebacks == 0);
    for (std::uint64_t i = 0; i < 10; ++i) r.host->access(0, 0x8000 + i * 64, true, i);
    for (std::uint64_t i = 0; i < 5; ++i) r.host->access(0, 0x20000 + i * 64, false, 100 + i);
    r.host->coherence_prologue({{0x8000, 4096}, {0x20000, 4096}});
    CHECK(r.host->counters().prologue_writebacks == 10);
    CHECK(r.host->l1(0).peek(0x8000 / 64) == nullptr);
    CHECK(r.host->llc().peek(0x20000 / 64) == nullptr);
}

TEST_CASE("outstanding misses are capped") {
    std::vector<HostOp> ops;
    for (std::uint64_t i = 0; i < 4000; ++i) ops.push_back(HostOp::mem(HostOpKind::load, i * 64));
    Rig narrow;
    const auto t10 = narrow.run(ops).core_cycles.at(0);
    CHECK(narrow.host->counters().mshr_stall_cycles > 0);
    SimConfig wide;
    wide.host.mshr_limit = 20;
    Rig w(1, wide);
    const auto t20 = w.run(ops).core_cycles.at(0);
    CHECK(t20 < t10);
    CHECK(static_cast<double>(t10) / static_cast<double>(t20) > 1.5);
}

TEST_CASE("more cores do not slow an independent stream") {
    std::vector<std::uint64_t> times;
    for (std::size_t cores : {1, 2, 4, 8}) {
        Rig r(cores);
        std::vector<std::unique_ptr<OpSource>> src;
        for (std::size_t c = 0; c < cores; ++c) {
            std::vector<HostOp> ops;
            const std::uint64_t per = 8000 / cores;
            for (std::uint64_t i = c * per; i < (c + 1) * per; ++i) {
                ops.push_back(HostOp::mem(HostOpKind::load, i * 64));
                ops.push_back(HostOp::compute(HostOpKind::fp_alu, 1));
            }
            src.push_back(std::make_unique<VectorSource>(std::move(ops)));
        }
        times.push_back(r.host->run(src).elapsed.ps);
    }
    for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i] <= times[i - 1]);
}
