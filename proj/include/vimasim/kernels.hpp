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
 * @file kernels.hpp
 * @brief The seven workloads: dataset layout and generation, the scalar
 *        reference, and the op streams of the AVX and VIMA backends.
 *
 * Layouts (all arrays vector-aligned, one after another):
 *
 *   memset   out[n] i32 = 7                      n = footprint / 4
 *   memcopy  dst[n] = src[n] i32                 each array = footprint
 *   vecsum   c = a + b f32                       three arrays share the footprint
 *   stencil  out = 0.6 c + 0.1 (l + r + u + d)   f32 grid with a replicated
 *            one-cell halo, rows padded to whole vectors
 *   matmult  C = A B f64                         n = floor(sqrt(footprint / 24))
 *   knn      train[instance][feature] f32, K nearest train indices per test
 *   mlp      act[j][c] = relu(sum_i W[i][j] x[i][c]), x feature-major
 *
 * Values come from a 64-bit LCG (Knuth's MMIX constants); floats are the
 * top 53 bits scaled into [0, 1).
 */

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "vimasim/config.hpp"
#include "vimasim/dram.hpp"
#include "vimasim/host.hpp"
#include "vimasim/isa.hpp"

namespace vima {

class KernelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Region {
    std::string name;
    std::uint64_t base = 0;
    std::uint64_t bytes = 0;
    bool output = false;
};

struct Workload {
    KernelId kernel = KernelId::vecsum;
    SimConfig cfg;
    std::vector<Region> regions;

    std::uint64_t elements = 0;  // per array (memset/memcopy/vecsum)
    std::uint64_t n = 0;         // stencil interior columns, matmult order
    std::uint64_t rows = 0;      // stencil rows including halo
    std::uint64_t stride = 0;    // elements per padded row
    std::uint64_t features = 0;  // knn / mlp
    std::uint64_t instances = 0; // knn train / mlp inputs
    std::uint64_t tests = 0;     // knn
    std::uint64_t outputs = 0;   // mlp neurons
    /// Outer iterations actually run (after workload.max_outer).
    std::uint64_t outer = 0;

    const Region& region(const std::string& name) const;
    std::vector<AddressRange> ranges() const;
};

/// Layout only. Throws KernelError on shapes the footprint cannot hold.
Workload plan(const SimConfig& cfg);

/// Seeded inputs; outputs start zeroed.
void generate(const Workload& w, BackingStore& mem);

/// Plain loops over the same memory, writing the outputs.
void scalar_reference(const Workload& w, BackingStore& mem);

/// Host stream of the VIMA backend. Host-side steps (knn selection, mlp
/// relu) update `mem` through hook ops as the run reaches them.
std::unique_ptr<OpSource> vima_source(const Workload& w, BackingStore& mem);

/// VIMA instructions alone, in program order.
std::vector<VimaInstruction> vima_instructions(const Workload& w);

/// Baseline streams, outer iterations split into contiguous blocks per core.
std::vector<std::unique_ptr<OpSource>> avx_sources(const Workload& w, std::size_t threads);

/// Compares output regions; float outputs allow `rel_tol` relative error.
bool outputs_match(const Workload& w, const BackingStore& expected, const BackingStore& actual, double rel_tol,
                   std::string* why = nullptr);

/// The generator behind every dataset.
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : x_(seed) {}
    std::uint64_t next() {
        x_ = x_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return x_;
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t x_;
};

}  // namespace vima
