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
 * @file experiment.hpp
 * @brief One simulation per config, plus the compare and sweep plans
 * built from it.
 *
 * Every run owns its event queue, memory image and components, so plans
 * may execute runs on several threads. Rows always come back in plan order.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vimasim/config.hpp"
#include "vimasim/dram.hpp"
#include "vimasim/kernels.hpp"
#include "vimasim/metrics.hpp"

namespace vima {

class OracleMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SimulatedFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunOutcome {
    Workload workload;
    SimStats stats;
    /// Final memory image. The AVX baseline is timing-only, so its image
    /// holds the generated inputs and untouched outputs.
    std::unique_ptr<BackingStore> mem;
};

/// Runs cfg.workload on cfg.workload.backend. The scalar backend computes
/// outputs without timing (elapsed 0). Throws ValidationError for an
/// invalid config and KernelError for an unplannable workload. A VIMA
/// fault ends the run early and is listed in stats.faults.
///
/// `fault_at` moves the destination of that VIMA instruction (0-based)
/// past the end of memory, which exercises the precise-exception path.
RunOutcome run_once(const SimConfig& cfg, std::optional<std::uint64_t> fault_at = std::nullopt);

/// Relative tolerance used when checking float outputs against the oracle.
inline constexpr double kOracleRelTol = 1e-6;

ResultRow make_row(const SimStats& s, const EnergyConfig& e, const SimStats* avx1);

struct PlanOptions {
    /// Parallel runs; 0 picks the hardware concurrency.
    unsigned jobs = 0;
    /// Applied to the VIMA memory image before the oracle check. Tests use
    /// it to corrupt a result.
    std::function<void(BackingStore&)> tamper;
};

/// Scalar oracle, AVX for each thread count, then VIMA. Throws
/// OracleMismatch when VIMA outputs differ from the oracle and
/// SimulatedFault when a run faults; no rows are returned in either case.
/// AVX with one thread always runs, since it is the normalization point.
std::vector<ResultRow> compare(const SimConfig& cfg, std::vector<std::uint64_t> threads_list,
                               const PlanOptions& opt = {});

/// One row per value of `key`, on cfg.workload.backend. Speedup and energy
/// ratio are against single-thread AVX under the same swept config.
std::vector<ResultRow> sweep(const SimConfig& cfg, const std::string& key, const std::vector<std::string>& values,
                             const PlanOptions& opt = {});

}  // namespace vima
