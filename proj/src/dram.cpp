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

#include "vimasim/dram.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>

namespace vima {

std::string CapacityFault::hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(v));
    return buf;
}

AddressMap::AddressMap(const TopologyConfig& t)
    : line_bytes_(t.line_bytes),
      vaults_(t.vaults),
      banks_(t.banks_per_vault),
      lines_per_row_(t.row_buffer_bytes / t.line_bytes),
      capacity_(t.capacity_bytes) {}

bool AddressMap::in_capacity(std::uint64_t addr, std::uint64_t len) const {
    return addr < capacity_ && len <= capacity_ - addr;
}

DramCoord AddressMap::map(std::uint64_t addr) const {
    if (addr >= capacity_) throw CapacityFault(addr);
    const std::uint64_t line = addr / line_bytes_;
    DramCoord c;
    c.vault = line % vaults_;
    c.bank = (line / vaults_) % banks_;
    const std::uint64_t rest = line / (vaults_ * banks_);
    c.column = rest % lines_per_row_;
    c.row = rest / lines_per_row_;
    return c;
}

DramCoord map_address(const TopologyConfig& t, std::uint64_t addr) { return AddressMap(t).map(addr); }

void BackingStore::read(std::uint64_t addr, std::span<std::uint8_t> out) const {
    std::size_t done = 0;
    while (done < out.size()) {
        const std::uint64_t a = addr + done;
        const std::uint64_t page = a / kPageBytes;
        const std::uint64_t off = a % kPageBytes;
        const std::size_t n = std::min<std::size_t>(out.size() - done, kPageBytes - off);
        auto it = pages_.find(page);
        if (it == pages_.end()) {
            std::memset(out.data() + done, 0, n);
        } else {
            std::memcpy(out.data() + done, it->second->data() + off, n);
        }
        done += n;
    }
}

void BackingStore::write(std::uint64_t addr, std::span<const std::uint8_t> in) {
    std::size_t done = 0;
    while (done < in.size()) {
        const std::uint64_t a = addr + done;
        const std::uint64_t page = a / kPageBytes;
        const std::uint64_t off = a % kPageBytes;
        const std::size_t n = std::min<std::size_t>(in.size() - done, kPageBytes - off);
        auto& p = pages_[page];
        if (!p) {
            p = std::make_unique<Page>();
            p->fill(0);
        }
        std::memcpy(p->data() + off, in.data() + done, n);
        done += n;
    }
}

bool BackingStore::operator==(const BackingStore& o) const {
    static const Page kZero{};
    auto covered = [](const BackingStore& a, const BackingStore& b) {
        for (const auto& [idx, page] : a.pages_) {
            auto it = b.pages_.find(idx);
            const Page& other = it == b.pages_.end() ? kZero : *it->second;
            if (std::memcmp(page->data(), other.data(), kPageBytes) != 0) return false;
        }
        return true;
    };
    return covered(*this, o) && covered(o, *this);
}

void BusyWindow::add(Time start, Time end) {
    if (!open_) {
        open_ = true;
        open_start_ = start;
        open_end_ = end;
        return;
    }
    if (start <= open_end_) {
        open_end_ = max(open_end_, end);
        return;
    }
    covered_ += open_end_ - open_start_;
    open_start_ = start;
    open_end_ = end;
}

Time BusyWindow::total() const { return open_ ? covered_ + (open_end_ - open_start_) : covered_; }

VaultArray::VaultArray(const TopologyConfig& t, const TimingConfig& tm)
    : map_(t),
      clock_("dram", tm.dram_freq),
      line_bytes_(t.line_bytes),
      rcd_(tm.dram_rcd),
      cas_(tm.dram_cas),
      cwd_(tm.dram_cwd),
      rp_(tm.dram_rp),
      ras_(tm.dram_ras),
      burst_(dram_burst_cycles(t)),
      vaults_(t.vaults),
      per_vault_(t.vaults, 0) {
    for (auto& v : vaults_) v.banks.resize(t.banks_per_vault);
}

SubRequest VaultArray::make(AccessKind kind, std::uint64_t addr, Origin origin) const {
    SubRequest s;
    s.kind = kind;
    s.line_address = addr / line_bytes_ * line_bytes_;
    s.coord = map_.map(addr);
    s.origin = origin;
    return s;
}

std::uint64_t VaultArray::row_cycle() const { return std::max(read_cycles(), ras_) + rp_; }

double VaultArray::read_bound_bytes_per_s() const {
    const double banks = static_cast<double>(vaults_.front().banks.size());
    const double per_line_cycles = std::max(static_cast<double>(burst_), static_cast<double>(row_cycle()) / banks);
    const double per_line_s = per_line_cycles * clock_.period().seconds();
    return static_cast<double>(vaults_.size()) * static_cast<double>(line_bytes_) / per_line_s;
}

namespace {

// How far behind the newest request a late one may still reach. The host
// core model runs ahead of the event queue by well under this.
constexpr Time kCalendarHorizon{100'000'000};
constexpr std::uint64_t kPruneEvery = 4096;

}  // namespace

void VaultArray::maybe_prune(Time now) {
    latest_ = max(latest_, now);
    if (++since_prune_ < kPruneEvery || latest_ < kCalendarHorizon) return;
    since_prune_ = 0;
    pruned_ = latest_ - kCalendarHorizon;
    for (auto& v : vaults_) {
        v.bus.prune(pruned_);
        for (auto& b : v.banks) b.prune(pruned_);
    }
}

Time VaultArray::service(const SubRequest& sub, Time now) {
    now = max(now, pruned_);
    maybe_prune(now);
    Vault& vault = vaults_.at(sub.coord.vault);
    Calendar& bank = vault.banks.at(sub.coord.bank);

    const Time access = clock_.cycles(sub.kind == AccessKind::read ? rcd_ + cas_ : rcd_ + cwd_);
    const Time burst = clock_.cycles(burst_);
    // Closed row: the bank is held from activate through precharge.
    const Time hold = max(access + burst, clock_.cycles(ras_)) + clock_.cycles(rp_);

    // Earliest activate whose burst also finds the vault bus free.
    Time activate = clock_.next_edge(now);
    for (;;) {
        activate = clock_.next_edge(bank.find(activate, hold));
        const Time slot = vault.bus.find(activate + access, burst);
        if (slot == activate + access) break;
        activate = slot - access;
    }
    const Time done = activate + access + burst;
    vault.bus.reserve(activate + access, burst);
    bank.reserve(activate, hold);

    ++per_vault_[sub.coord.vault];
    const int o = DramCounters::idx(sub.origin);
    if (sub.kind == AccessKind::read) {
        ++counters_.reads[o];
        read_window_[o].add(now, done);
    } else {
        ++counters_.writes[o];
    }
    return done;
}

Time VaultArray::issue(const SubRequest& sub, EventQueue& q, ComponentId target, std::function<void()> on_done) {
    const Time done = service(sub, q.now());
    q.schedule(done, target, std::move(on_done));
    return done;
}

HostLinks::HostLinks(const TopologyConfig& t, const TimingConfig& tm)
    : clock_("link", tm.link_freq), burst_bytes_(t.link_burst_bytes), links_(t.links) {}

Time HostLinks::transfer_time(std::uint64_t bytes) const {
    return clock_.cycles((bytes + burst_bytes_ - 1) / burst_bytes_);
}

Time HostLinks::transfer(std::uint64_t bytes, Time now) {
    now = max(now, pruned_);
    latest_ = max(latest_, now);
    if (++since_prune_ >= kPruneEvery && latest_ >= kCalendarHorizon) {
        since_prune_ = 0;
        pruned_ = latest_ - kCalendarHorizon;
        for (auto& l : links_) l.prune(pruned_);
    }
    Calendar& link = links_[next_];
    next_ = (next_ + 1) % links_.size();
    const Time len = transfer_time(bytes);
    const Time start = link.find(now, len);
    link.reserve(start, len);
    bytes_ += bytes;
    return start + len;
}

}  // namespace vima
