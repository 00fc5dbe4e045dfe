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
 * @file config.hpp
 * @brief Typed simulation configuration.
 *
 * Defaults are the baseline/VIMA system of the reference evaluation
 * (Sandy-Bridge-class host, 32-vault stacked memory, 8 KB vectors).
 * The text format is flat `section.key = value` lines with `#` comments;
 * every key is also settable through `set_key`, which backs the CLI's
 * `--set section.key=value`.
 *
 * Derived quantities (elements per vector, sub-requests per vector, DRAM
 * burst cycles, transfer beats) are functions below, never stored fields.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vima {

enum class KernelId { memset, memcopy, vecsum, stencil, matmult, knn, mlp };
enum class Backend { scalar, avx, vima };

std::string_view to_string(KernelId k);
std::string_view to_string(Backend b);
std::optional<KernelId> parse_kernel(std::string_view s);
std::optional<Backend> parse_backend(std::string_view s);
const std::vector<KernelId>& all_kernels();

struct TopologyConfig {
    std::uint64_t vaults = 32;
    std::uint64_t banks_per_vault = 8;
    std::uint64_t row_buffer_bytes = 256;
    std::uint64_t line_bytes = 64;
    std::uint64_t vector_bytes = 8192;
    std::uint64_t vima_cache_bytes = 65536;
    std::uint64_t links = 4;
    std::uint64_t link_burst_bytes = 8;
    std::uint64_t capacity_bytes = 4ULL << 30;

    bool operator==(const TopologyConfig&) const = default;
};

struct TimingConfig {
    // DRAM cycles
    std::uint64_t dram_cas = 9;
    std::uint64_t dram_rp = 9;
    std::uint64_t dram_rcd = 9;
    std::uint64_t dram_ras = 24;
    std::uint64_t dram_cwd = 7;

    std::uint64_t core_freq = 2'000'000'000;
    std::uint64_t vima_freq = 1'000'000'000;
    std::uint64_t dram_freq = 1'666'000'000;
    std::uint64_t link_freq = 8'000'000'000;

    // VIMA cycles
    std::uint64_t vima_tag_cycles = 1;
    std::uint64_t vima_cache_ports = 2;
    /// Cap on sub-request lines written into the VIMA cache per VIMA
    /// cycle. 0: a fetch completes when its last sub-request does.
    std::uint64_t vima_fill_lines_per_cycle = 0;
    std::uint64_t vima_int_alu = 8;
    std::uint64_t vima_int_mul = 12;
    std::uint64_t vima_int_div = 28;
    std::uint64_t vima_fp_alu = 13;
    std::uint64_t vima_fp_mul = 13;
    std::uint64_t vima_fp_div = 28;
    std::uint64_t lanes = 256;

    // core cycles
    std::uint64_t l1_lat = 2;
    std::uint64_t l2_lat = 10;
    std::uint64_t llc_lat = 22;
    std::uint64_t instruction_dispatch_lat = 1;
    std::uint64_t rob_entries = 168;
    std::uint64_t mob_read = 64;
    std::uint64_t mob_write = 36;
    std::uint64_t issue_width = 6;

    bool operator==(const TimingConfig&) const = default;
};

/// Host core and cache geometry. Front-end sizes are recorded but the core
/// model does not use them.
struct HostConfig {
    std::uint64_t l1_bytes = 64 * 1024;
    std::uint64_t l1_ways = 8;
    std::uint64_t l2_bytes = 256 * 1024;
    std::uint64_t l2_ways = 8;
    std::uint64_t llc_bytes = 16 * 1024 * 1024;
    std::uint64_t llc_ways = 16;
    std::uint64_t mshr_limit = 10;

    std::uint64_t load_units = 2;
    std::uint64_t store_units = 1;
    std::uint64_t int_alu_units = 3;
    std::uint64_t int_mul_units = 1;
    std::uint64_t int_div_units = 1;
    std::uint64_t fp_alu_units = 1;
    std::uint64_t fp_mul_units = 1;
    std::uint64_t fp_div_units = 1;
    std::uint64_t int_alu_lat = 1;
    std::uint64_t int_mul_lat = 3;
    std::uint64_t int_div_lat = 32;
    std::uint64_t fp_alu_lat = 3;
    std::uint64_t fp_mul_lat = 5;
    std::uint64_t fp_div_lat = 10;

    std::uint64_t fetch_buffer = 18;
    std::uint64_t decode_buffer = 28;
    std::uint64_t btb_entries = 4096;

    bool operator==(const HostConfig&) const = default;
};

struct EnergyConfig {
    double l1_line_pj = 194.0;
    double l2_line_pj = 340.0;
    double llc_line_pj = 3010.0;
    double vima_cache_line_pj = 194.0;
    double dram_x86_pj_per_bit = 10.8;
    double dram_vima_pj_per_bit = 4.8;

    double core_w = 6.0;  // per core
    double l1_w = 0.03;   // per core
    double l2_w = 0.13;   // per core
    double llc_w = 7.0;
    double dram_w = 4.0;
    double vima_logic_w = 3.2;
    double vima_cache_w = 0.134;

    /// Drop host L1/L2/LLC static power from VIMA-backend runs.
    bool idle_uncore_off = false;

    bool operator==(const EnergyConfig&) const = default;
};

struct WorkloadConfig {
    KernelId kernel = KernelId::vecsum;
    Backend backend = Backend::vima;
    std::uint64_t footprint_bytes = 16ULL << 20;
    std::uint64_t threads = 1;
    std::uint64_t seed = 0x5EEDC0DE2021ULL;

    std::uint64_t knn_k = 9;
    std::uint64_t knn_train = 32768;
    std::uint64_t knn_test = 256;
    std::uint64_t knn_features = 0;  // 0: derived from footprint
    std::uint64_t mlp_instances = 32768;
    std::uint64_t mlp_features = 0;  // 0: derived from footprint
    std::uint64_t mlp_outputs = 16;
    /// Simulate only the first N outer iterations (rows, test points,
    /// output neurons). 0 runs the full iteration space.
    std::uint64_t max_outer = 0;

    bool operator==(const WorkloadConfig&) const = default;
};

struct SimConfig {
    TopologyConfig topology;
    TimingConfig timing;
    HostConfig host;
    EnergyConfig energy;
    WorkloadConfig workload;

    bool operator==(const SimConfig&) const = default;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& what)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Every violated invariant, in key order. Empty means valid.
std::vector<std::string> validate(const SimConfig& cfg);

/// Parses `section.key = value` text over the defaults, then validates.
/// Throws ConfigError (syntax, unknown key, bad value) or ValidationError.
SimConfig parse_config(std::string_view text);
SimConfig load_config_file(const std::string& path);

/// All keys with their values; parse_config(render_config(c)) == c.
std::string render_config(const SimConfig& cfg);

/// Sets one key without validating. Throws ConfigError on unknown key or bad value.
void set_key(SimConfig& cfg, std::string_view key, std::string_view value);
/// Applies `key=value`.
void apply_override(SimConfig& cfg, std::string_view assignment);
std::string get_key(const SimConfig& cfg, std::string_view key);
std::vector<std::string> config_keys();

// Derived quantities.
std::uint64_t vima_cache_lines(const TopologyConfig& t);
std::uint64_t lines_per_vector(const TopologyConfig& t);
std::uint64_t elements_per_vector(const TopologyConfig& t, std::uint64_t element_bytes);
/// Beats needed to stream one 32-bit-element vector through the lanes.
std::uint64_t transfer_beats(const TopologyConfig& t, const TimingConfig& tm);
/// Line burst inside the stack: DDR, link_burst_bytes wide, two beats per cycle.
std::uint64_t dram_burst_cycles(const TopologyConfig& t);

}  // namespace vima
