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

#include <cstring>
#include <vector>

#include "oracles.hpp"
#include "vimasim/dram.hpp"

using namespace vima;

namespace {

struct Rig {
    SimConfig cfg;
    VaultArray dram{cfg.topology, cfg.timing};
    oracle::Dram o;

    Time read(std::uint64_t addr, Time now = Time{}) {
        return dram.service(dram.make(AccessKind::read, addr, Origin::vima), now);
    }
    Time cyc(std::uint64_t n) const { return Time{n * o.period}; }
};

}  // namespace

TEST_CASE("address interleaving is vault-first") {
    const TopologyConfig t;
    CHECK(map_address(t, 0) == DramCoord{0, 0, 0, 0});
    CHECK(map_address(t, 64 * 31).vault == 31);
    CHECK(map_address(t, 64 * 31).bank == 0);
    CHECK(map_address(t, 64 * 32).vault == 0);
    CHECK(map_address(t, 64 * 32).bank == 1);
    CHECK(map_address(t, 64 * 32 * 8).bank == 0);
    // Every 8 KB vector covers all 32 vaults, 4 lines each.
    std::vector<int> per_vault(32, 0);
    for (std::uint64_t a = 0x40000; a < 0x40000 + 8192; a += 64) ++per_vault[map_address(t, a).vault];
    for (int n : per_vault) CHECK(n == 4);
    CHECK_THROWS_AS(map_address(t, t.capacity_bytes), CapacityFault);
    CHECK(AddressMap(t).in_capacity(t.capacity_bytes - 64, 64));
    CHECK_FALSE(AddressMap(t).in_capacity(t.capacity_bytes - 64, 65));
}

TEST_CASE("idle-bank read: RCD + CAS, then the burst") {
    Rig r;
    CHECK(r.dram.read_cycles() == r.o.rcd + r.o.cas + r.o.burst);
    CHECK(r.read(0) == r.cyc(r.o.read_data_end(0)));
    CHECK(r.read(0) > r.cyc(18));
}

TEST_CASE("idle-bank write: RCD + CWD, then the burst") {
    Rig r;
    const Time t = r.dram.service(r.dram.make(AccessKind::write, 0, Origin::vima), Time{});
    CHECK(t == r.cyc(r.o.rcd + r.o.cwd + r.o.burst));
}

TEST_CASE("same bank back to back waits out the row cycle") {
    Rig r;
    r.read(0);
    // Same vault and bank, different row.
    const std::uint64_t other = 64ULL * 32 * 8 * 4;
    REQUIRE(map_address(r.cfg.topology, other).bank == 0);
    REQUIRE(map_address(r.cfg.topology, other).vault == 0);
    CHECK(r.dram.row_cycle() == r.o.bank_cycle());
    CHECK(r.read(other) == r.cyc(r.o.read_data_end(r.o.bank_cycle())));
}

TEST_CASE("different vaults overlap fully") {
    Rig r;
    CHECK(r.read(0) == r.read(64));
}

TEST_CASE("different banks of one vault share the data bus") {
    Rig r;
    const Time a = r.read(0);
    const Time b = r.read(64 * 32);  // vault 0, bank 1
    CHECK(a == r.cyc(22));
    // The second burst starts when the first ends.
    CHECK(b == a + r.cyc(r.o.burst));
}

TEST_CASE("a late request uses an earlier idle gap") {
    Rig r;
    const std::uint64_t other = 64ULL * 32 * 8 * 4;
    r.read(0, r.cyc(1000));
    CHECK(r.read(other, Time{}) == r.cyc(22));
}

TEST_CASE("read bound matches the closed form") {
    Rig r;
    const double per_line = std::max<double>(r.o.burst, static_cast<double>(r.o.bank_cycle()) / 8.0);
    const double want = 32.0 * 64.0 / (per_line * r.o.period * 1e-12);
    CHECK(r.dram.read_bound_bytes_per_s() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("streaming reads approach the per-vault pipelined cost") {
    Rig r;
    const std::uint64_t n = 8192;
    Time last{};
    for (std::uint64_t i = 0; i < n; ++i) last = max(last, r.read(i * 64));
    const double per_line = std::max<double>(r.o.burst, static_cast<double>(r.o.bank_cycle()) / 8.0);
    const double ideal = static_cast<double>(n) / 32.0 * per_line * r.o.period;
    CHECK(static_cast<double>(last.ps) <= ideal * 1.10);
    CHECK(static_cast<double>(last.ps) >= ideal);
    const double rate = static_cast<double>(n * 64) / last.seconds();
    CHECK(rate <= r.dram.read_bound_bytes_per_s());
    CHECK(r.dram.counters().reads[0] == n);
}

TEST_CASE("host links: serialization and round robin") {
    SimConfig cfg;
    HostLinks l(cfg.topology, cfg.timing);
    CHECK(l.transfer_time(64) == Time{1000});
    CHECK(l.transfer_time(8) == Time{125});
    CHECK(l.transfer_time(9) == Time{250});
    CHECK(l.next_link() == 0);
    CHECK(l.transfer(64, Time{}) == Time{1000});
    CHECK(l.next_link() == 1);
    CHECK(l.transfer(64, Time{}) == Time{1000});
    l.transfer(64, Time{});
    l.transfer(64, Time{});
    CHECK(l.transfer(64, Time{}) == Time{2000});  // back on link 0
    CHECK(l.bytes_moved() == 5 * 64);
}

TEST_CASE("backing store is sparse and zero-filled") {
    BackingStore m;
    CHECK(m.load<std::uint64_t>(12345) == 0);
    CHECK(m.pages() == 0);
    m.store<std::uint32_t>(BackingStore::kPageBytes - 2, 0xAABBCCDD);  // straddles two pages
    CHECK(m.load<std::uint32_t>(BackingStore::kPageBytes - 2) == 0xAABBCCDD);
    CHECK(m.pages() == 2);
    BackingStore z;
    z.store<std::uint8_t>(1 << 20, 0);
    CHECK(z == BackingStore{});
    CHECK_FALSE(m == z);
}

TEST_CASE("busy window unions overlapping intervals") {
    BusyWindow w;
    w.add(Time{0}, Time{10});
    w.add(Time{5}, Time{15});
    w.add(Time{20}, Time{25});
    CHECK(w.total() == Time{20});
}
