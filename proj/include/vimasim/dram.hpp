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
 * @file dram.hpp
 * @brief Timing model of the stacked DRAM layers and the host links.
 *
 * Line index L = addr / line_bytes is interleaved vault-first:
 * vault = L mod vaults, bank = (L / vaults) mod banks, so consecutive lines
 * land in consecutive vaults. Banks run a closed-row policy: every access
 * activates, transfers one line and precharges. Each vault owns one data
 * bus on which line bursts never overlap.
 *
 * Requests are timed by reservation: a bank or bus slot, once granted, is
 * never revoked, so a younger request to an idle bank overtakes an older
 * one waiting on a busy bank while same-line requests (same bank) keep
 * their order.
 */

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "vimasim/config.hpp"
#include "vimasim/simcore.hpp"

namespace vima {

enum class AccessKind : std::uint8_t { read, write };
enum class Origin : std::uint8_t { vima, host };

struct DramCoord {
    std::uint64_t vault = 0;
    std::uint64_t bank = 0;
    std::uint64_t row = 0;
    std::uint64_t column = 0;

    bool operator==(const DramCoord&) const = default;
};

struct SubRequest {
    AccessKind kind = AccessKind::read;
    std::uint64_t line_address = 0;
    DramCoord coord;
    Origin origin = Origin::vima;
};

class CapacityFault : public std::runtime_error {
public:
    explicit CapacityFault(std::uint64_t addr)
        : std::runtime_error("address 0x" + hex(addr) + " beyond memory capacity"), addr_(addr) {}
    std::uint64_t address() const { return addr_; }

private:
    static std::string hex(std::uint64_t v);
    std::uint64_t addr_;
};

class AddressMap {
public:
    explicit AddressMap(const TopologyConfig& t);

    /// Throws CapacityFault when addr >= capacity.
    DramCoord map(std::uint64_t addr) const;
    bool in_capacity(std::uint64_t addr, std::uint64_t len = 1) const;
    std::uint64_t line_of(std::uint64_t addr) const { return addr / line_bytes_; }
    std::uint64_t line_bytes() const { return line_bytes_; }

private:
    std::uint64_t line_bytes_;
    std::uint64_t vaults_;
    std::uint64_t banks_;
    std::uint64_t lines_per_row_;
    std::uint64_t capacity_;
};

DramCoord map_address(const TopologyConfig& t, std::uint64_t addr);

/// Sparse flat byte store, allocated in 64 KB pages on first write.
/// Untouched bytes read as zero.
class BackingStore {
public:
    static constexpr std::uint64_t kPageBytes = 64 * 1024;

    void read(std::uint64_t addr, std::span<std::uint8_t> out) const;
    void write(std::uint64_t addr, std::span<const std::uint8_t> in);

    template <typename T>
    T load(std::uint64_t addr) const {
        T v{};
        read(addr, {reinterpret_cast<std::uint8_t*>(&v), sizeof(T)});
        return v;
    }
    template <typename T>
    void store(std::uint64_t addr, const T& v) {
        write(addr, {reinterpret_cast<const std::uint8_t*>(&v), sizeof(T)});
    }

    std::size_t pages() const { return pages_.size(); }
    bool operator==(const BackingStore& o) const;

private:
    using Page = std::array<std::uint8_t, kPageBytes>;
    std::unordered_map<std::uint64_t, std::unique_ptr<Page>> pages_;
};

struct DramCounters {
    std::uint64_t reads[2] = {0, 0};   // indexed by Origin
    std::uint64_t writes[2] = {0, 0};  // indexed by Origin

    std::uint64_t total() const { return reads[0] + reads[1] + writes[0] + writes[1]; }
    std::uint64_t by(Origin o) const { return reads[idx(o)] + writes[idx(o)]; }
    static constexpr int idx(Origin o) { return o == Origin::vima ? 0 : 1; }
};

/// Union of [start, end) intervals whose starts arrive in non-decreasing order.
class BusyWindow {
public:
    void add(Time start, Time end);
    Time total() const;

private:
    Time covered_{};
    Time open_start_{};
    Time open_end_{};
    bool open_ = false;
};

class VaultArray {
public:
    VaultArray(const TopologyConfig& t, const TimingConfig& tm);

    SubRequest make(AccessKind kind, std::uint64_t addr, Origin origin) const;

    /// Reserves the bank and vault bus; returns when the line transfer ends.
    Time service(const SubRequest& sub, Time now);
    /// service() plus a completion event on the queue.
    Time issue(const SubRequest& sub, EventQueue& q, ComponentId target, std::function<void()> on_done);

    const AddressMap& address_map() const { return map_; }
    const ClockDomain& clock() const { return clock_; }
    const DramCounters& counters() const { return counters_; }
    /// Sub-requests served by each vault, reads and writes.
    const std::vector<std::uint64_t>& per_vault() const { return per_vault_; }
    /// Time during which at least one read from `o` was in service.
    Time read_busy_time(Origin o) const { return read_window_[DramCounters::idx(o)].total(); }

    std::uint64_t read_cycles() const { return rcd_ + cas_ + burst_; }
    std::uint64_t write_cycles() const { return rcd_ + cwd_ + burst_; }
    std::uint64_t burst_cycles() const { return burst_; }
    /// Activate-to-activate spacing of one bank under back-to-back reads.
    std::uint64_t row_cycle() const;

    /// Closed-form sustained read bound of the whole vault array, bytes/second.
    double read_bound_bytes_per_s() const;

private:
    struct Vault {
        Calendar bus;
        std::vector<Calendar> banks;
    };

    void maybe_prune(Time now);

    AddressMap map_;
    ClockDomain clock_;
    std::uint64_t line_bytes_;
    std::uint64_t rcd_, cas_, cwd_, rp_, ras_, burst_;
    std::vector<Vault> vaults_;
    DramCounters counters_;
    std::vector<std::uint64_t> per_vault_;
    BusyWindow read_window_[2];
    Time latest_{};
    Time pruned_{};
    std::uint64_t since_prune_ = 0;
};

/// The host's serial links. Transfers are assigned round-robin.
class HostLinks {
public:
    HostLinks(const TopologyConfig& t, const TimingConfig& tm);

    /// Serialization delay alone: ceil(bytes / burst) link cycles.
    Time transfer_time(std::uint64_t bytes) const;
    /// Reserves the next link; returns when the transfer completes.
    Time transfer(std::uint64_t bytes, Time now);
    /// Index of the link the next transfer will use.
    std::size_t next_link() const { return next_; }
    std::uint64_t bytes_moved() const { return bytes_; }

private:
    ClockDomain clock_;
    std::uint64_t burst_bytes_;
    std::vector<Calendar> links_;
    Time latest_{};
    Time pruned_{};
    std::uint64_t since_prune_ = 0;
    std::size_t next_ = 0;
    std::uint64_t bytes_ = 0;
};

}  // namespace vima
