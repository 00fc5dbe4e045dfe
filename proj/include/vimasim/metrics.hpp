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
 * @file metrics.hpp
 * @brief Run statistics, energy accounting and CSV reports.
 *
 * Dynamic energy is counts times per-access constants (caches per 64 B
 * line, DRAM per bit moved). Static energy is power times elapsed time for
 * the components present in the run.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vimasim/config.hpp"
#include "vimasim/dram.hpp"
#include "vimasim/host.hpp"
#include "vimasim/simcore.hpp"
#include "vimasim/vima_engine.hpp"

namespace vima {

struct SimStats {
    KernelId kernel = KernelId::vecsum;
    Backend backend = Backend::vima;
    std::uint64_t footprint_bytes = 0;
    std::uint64_t threads = 1;
    std::uint64_t seed = 0;

    Time elapsed{};
    std::uint64_t core_cycles = 0;
    HostCounters host;
    VimaCounters vima;
    DramCounters dram;
    std::uint64_t line_bytes = 64;
    std::uint64_t link_bytes = 0;
    Time dram_read_busy_vima{};
    Time dram_read_busy_host{};
    double dram_read_bound = 0.0;  // bytes per second
    std::vector<std::string> faults;
};

struct EnergyBreakdown {
    double l1_dyn = 0, l2_dyn = 0, llc_dyn = 0, dram_dyn = 0, vima_cache_dyn = 0;
    double core_static = 0, l1_static = 0, l2_static = 0, llc_static = 0, dram_static = 0;
    double vima_logic_static = 0, vima_cache_static = 0;

    double dynamic() const { return l1_dyn + l2_dyn + llc_dyn + dram_dyn + vima_cache_dyn; }
    double static_total() const {
        return core_static + l1_static + l2_static + llc_static + dram_static + vima_logic_static + vima_cache_static;
    }
    /// Picojoules.
    double total() const { return dynamic() + static_total(); }
};

struct EnergyScope {
    bool vima = false;              // VIMA logic and cache present
    bool host_cache_static = true;  // host hierarchy powered (even when bypassed)
    bool dram_static = true;
};

/// Scope matching a run: VIMA runs add the engine and, unless
/// idle_uncore_off, keep the host caches powered.
EnergyScope scope_for(const SimStats& s, const EnergyConfig& e, bool dram_static = true);

EnergyBreakdown total_energy(const SimStats& s, const EnergyConfig& e, const EnergyScope& scope);

double speedup(const SimStats& baseline, const SimStats& candidate);

struct ResultRow {
    KernelId kernel = KernelId::vecsum;
    Backend backend = Backend::vima;
    double size_mb = 0;
    std::uint64_t threads = 1;
    std::uint64_t cycles = 0;
    std::uint64_t elapsed_ps = 0;
    double energy_pj = 0;
    double speedup = 0;
    double energy_ratio = 0;

    bool operator==(const ResultRow&) const = default;
};

/// Rounds the fractional fields to their printed precision, so a row
/// survives render_csv / parse_csv unchanged.
ResultRow quantize(ResultRow r);

extern const char* const kCsvHeader;
std::string render_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);
/// Throws std::runtime_error when the file cannot be written.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

/// Flat `key = value` dump of every counter and both energy modes.
std::string detail_dump(const SimStats& s, const EnergyConfig& e);

}  // namespace vima
