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

#include "vimasim/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "kernels_internal.hpp"

namespace vima {

const Region& Workload::region(const std::string& name) const {
    for (const auto& r : regions)
        if (r.name == name) return r;
    throw KernelError("workload has no region '" + name + "'");
}

std::vector<AddressRange> Workload::ranges() const {
    std::vector<AddressRange> out;
    for (const auto& r : regions) out.push_back({r.base, r.bytes});
    return out;
}

namespace {

std::uint64_t round_up(std::uint64_t v, std::uint64_t m) { return (v + m - 1) / m * m; }

std::uint64_t limit(std::uint64_t total, std::uint64_t max_outer) {
    return max_outer == 0 ? total : std::min(total, max_outer);
}

class Layout {
public:
    Layout(Workload& w, std::uint64_t vb) : w_(w), vb_(vb), cursor_(round_up(1 << 20, vb)) {}
    void add(const std::string& name, std::uint64_t bytes, bool output) {
        w_.regions.push_back({name, cursor_, bytes, output});
        cursor_ += round_up(bytes, vb_);
    }
    std::uint64_t end() const { return cursor_; }

private:
    Workload& w_;
    std::uint64_t vb_;
    std::uint64_t cursor_;
};

}  // namespace

Workload plan(const SimConfig& cfg) {
    if (auto v = validate(cfg); !v.empty()) throw ValidationError(v);
    Workload w;
    w.kernel = cfg.workload.kernel;
    w.cfg = cfg;
    const std::uint64_t vb = cfg.topology.vector_bytes;
    const std::uint64_t fp = cfg.workload.footprint_bytes;
    const std::uint64_t mo = cfg.workload.max_outer;
    Layout lay(w, vb);

    switch (w.kernel) {
        case KernelId::memset:
        case KernelId::memcopy: {
            const std::uint64_t vectors = fp / vb;
            if (vectors == 0) throw KernelError("footprint smaller than one vector");
            w.elements = vectors * vb / 4;
            if (w.kernel == KernelId::memcopy) lay.add("src", vectors * vb, false);
            lay.add("dst", vectors * vb, true);
            w.outer = limit(vectors, mo);
            break;
        }
        case KernelId::vecsum: {
            const std::uint64_t vectors = fp / 3 / vb;
            if (vectors == 0) throw KernelError("footprint smaller than three vectors");
            w.elements = vectors * vb / 4;
            lay.add("a", vectors * vb, false);
            lay.add("b", vectors * vb, false);
            lay.add("c", vectors * vb, true);
            w.outer = limit(vectors, mo);
            break;
        }
        case KernelId::stencil: {
            // Near-square grid whose padded rows are whole vectors with no
            // slack: the interior spans the row minus the two halo columns.
            w.stride = round_up(static_cast<std::uint64_t>(std::sqrt(static_cast<double>(fp / 8))), vb / 4);
            w.rows = fp / (8 * w.stride);  // two float grids
            if (w.rows < 3) throw KernelError("stencil footprint too small");
            w.n = w.stride - 2;
            lay.add("in", w.rows * w.stride * 4, false);
            lay.add("out", w.rows * w.stride * 4, true);
            w.outer = limit(w.rows - 2, mo);
            break;
        }
        case KernelId::matmult: {
            w.n = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(fp / 24)));
            if (w.n < 1) throw KernelError("matmult footprint too small");
            w.stride = round_up(w.n, vb / 8);
            lay.add("A", w.n * w.stride * 8, false);
            lay.add("B", w.n * w.stride * 8, false);
            lay.add("C", w.n * w.stride * 8, true);
            w.outer = limit(w.n, mo);
            break;
        }
        case KernelId::knn: {
            w.instances = cfg.workload.knn_train;
            w.tests = cfg.workload.knn_test;
            w.features = cfg.workload.knn_features;
            if (w.features == 0) w.features = std::bit_floor(std::max<std::uint64_t>(1, fp / (w.instances * 4)));
            const std::uint64_t fb = w.features * 4;
            if (!std::has_single_bit(w.features) || fb > vb)
                throw KernelError("knn features must be a power of two no wider than a vector");
            if (w.instances * fb % vb != 0) throw KernelError("knn training set must fill whole vectors");
            if (cfg.workload.knn_k > w.instances) throw KernelError("knn k exceeds the training set");
            lay.add("train", w.instances * fb, false);
            lay.add("xrep", w.tests * vb, false);
            lay.add("tmp", 2 * vb, false);
            lay.add("nearest", w.tests * cfg.workload.knn_k * 4, true);
            w.outer = limit(w.tests, mo);
            break;
        }
        case KernelId::mlp: {
            w.instances = cfg.workload.mlp_instances;
            w.outputs = cfg.workload.mlp_outputs;
            if (w.instances * 4 % vb != 0) throw KernelError("mlp instances must fill whole vectors");
            const std::uint64_t row = w.instances * 4;
            w.features = cfg.workload.mlp_features;
            if (w.features == 0) w.features = fp > w.outputs * row ? (fp - w.outputs * row) / row : 1;
            w.features = std::max<std::uint64_t>(1, w.features);
            lay.add("x", w.features * row, false);
            lay.add("w", w.features * w.outputs * 4, false);
            lay.add("tmp", 2 * vb, false);
            lay.add("act", w.outputs * row, true);
            w.outer = limit(w.outputs, mo);
            break;
        }
    }
    if (lay.end() > cfg.topology.capacity_bytes) throw KernelError("workload does not fit in memory capacity");
    return w;
}

namespace detail {

template <typename T>
std::vector<T> read_array(const BackingStore& mem, std::uint64_t base, std::uint64_t count) {
    std::vector<T> v(count);
    mem.read(base, {reinterpret_cast<std::uint8_t*>(v.data()), count * sizeof(T)});
    return v;
}

template <typename T>
void write_array(BackingStore& mem, std::uint64_t base, const std::vector<T>& v) {
    mem.write(base, {reinterpret_cast<const std::uint8_t*>(v.data()), v.size() * sizeof(T)});
}

template std::vector<float> read_array<float>(const BackingStore&, std::uint64_t, std::uint64_t);
template std::vector<double> read_array<double>(const BackingStore&, std::uint64_t, std::uint64_t);
template std::vector<std::uint32_t> read_array<std::uint32_t>(const BackingStore&, std::uint64_t, std::uint64_t);
template void write_array<float>(BackingStore&, std::uint64_t, const std::vector<float>&);
template void write_array<std::uint32_t>(BackingStore&, std::uint64_t, const std::vector<std::uint32_t>&);

float relu(float v) { return v > 0.0f ? v : 0.0f; }

void TopK::offer(float d, std::uint32_t idx) {
    if (best.size() == k && !(d < best.back().first)) return;
    auto pos = std::upper_bound(best.begin(), best.end(), std::make_pair(d, idx));
    best.insert(pos, {d, idx});
    if (best.size() > k) best.pop_back();
}

}  // namespace detail

using detail::read_array;
using detail::write_array;

void generate(const Workload& w, BackingStore& mem) {
    Lcg rng(w.cfg.workload.seed);
    auto floats = [&](std::uint64_t count) {
        std::vector<float> v(count);
        for (auto& x : v) x = static_cast<float>(rng.unit());
        return v;
    };

    switch (w.kernel) {
        case KernelId::memset:
            break;
        case KernelId::memcopy: {
            std::vector<std::int32_t> v(w.elements);
            for (auto& x : v) x = static_cast<std::int32_t>(rng.next() >> 32);
            mem.write(w.region("src").base, {reinterpret_cast<const std::uint8_t*>(v.data()), v.size() * 4});
            break;
        }
        case KernelId::vecsum:
            write_array(mem, w.region("a").base, floats(w.elements));
            write_array(mem, w.region("b").base, floats(w.elements));
            break;
        case KernelId::stencil: {
            const std::uint64_t s = w.stride, n = w.n, last = w.rows - 2;
            std::vector<float> g(w.rows * s, 0.0f);
            for (std::uint64_t r = 1; r <= last; ++r)
                for (std::uint64_t c = 1; c <= n; ++c) g[r * s + c] = static_cast<float>(rng.unit());
            // Clamped border: the halo repeats the nearest interior cell.
            for (std::uint64_t r = 1; r <= last; ++r) {
                g[r * s] = g[r * s + 1];
                g[r * s + n + 1] = g[r * s + n];
            }
            std::copy_n(g.begin() + s, s, g.begin());
            std::copy_n(g.begin() + last * s, s, g.begin() + (last + 1) * s);
            write_array(mem, w.region("in").base, g);
            break;
        }
        case KernelId::matmult: {
            for (const char* name : {"A", "B"}) {
                std::vector<double> m(w.n * w.stride, 0.0);
                for (std::uint64_t r = 0; r < w.n; ++r)
                    for (std::uint64_t c = 0; c < w.n; ++c) m[r * w.stride + c] = rng.unit();
                mem.write(w.region(name).base, {reinterpret_cast<const std::uint8_t*>(m.data()), m.size() * 8});
            }
            break;
        }
        case KernelId::knn: {
            write_array(mem, w.region("train").base, floats(w.instances * w.features));
            const std::uint64_t vb = w.cfg.topology.vector_bytes;
            const std::uint64_t per = vb / 4;
            std::vector<float> rep(w.tests * per);
            for (std::uint64_t t = 0; t < w.tests; ++t) {
                const auto x = floats(w.features);
                for (std::uint64_t i = 0; i < per; ++i) rep[t * per + i] = x[i % w.features];
            }
            write_array(mem, w.region("xrep").base, rep);
            break;
        }
        case KernelId::mlp: {
            write_array(mem, w.region("x").base, floats(w.features * w.instances));
            std::vector<float> wt(w.features * w.outputs);
            for (auto& x : wt) x = static_cast<float>(rng.unit() - 0.5);
            write_array(mem, w.region("w").base, wt);
            break;
        }
    }
}

void scalar_reference(const Workload& w, BackingStore& mem) {
    const std::uint64_t vb = w.cfg.topology.vector_bytes;
    switch (w.kernel) {
        case KernelId::memset: {
            const std::vector<std::int32_t> v(w.outer * vb / 4, 7);
            mem.write(w.region("dst").base, {reinterpret_cast<const std::uint8_t*>(v.data()), v.size() * 4});
            break;
        }
        case KernelId::memcopy: {
            auto v = read_array<std::uint32_t>(mem, w.region("src").base, w.outer * vb / 4);
            for (auto& x : v) x = x + 0u;
            write_array(mem, w.region("dst").base, v);
            break;
        }
        case KernelId::vecsum: {
            const std::uint64_t count = w.outer * vb / 4;
            const auto a = read_array<float>(mem, w.region("a").base, count);
            const auto b = read_array<float>(mem, w.region("b").base, count);
            std::vector<float> c(count);
            for (std::uint64_t i = 0; i < count; ++i) c[i] = a[i] + b[i];
            write_array(mem, w.region("c").base, c);
            break;
        }
        case KernelId::stencil: {
            const std::uint64_t s = w.stride;
            const auto in = read_array<float>(mem, w.region("in").base, w.rows * s);
            std::vector<float> out(w.outer * s);
            for (std::uint64_t r = 1; r <= w.outer; ++r) {
                for (std::uint64_t j = 0; j < s; ++j) {
                    const std::uint64_t i = r * s + j;
                    float v = 0.6f * in[i];
                    v = v + 0.1f * in[i - 1];
                    v = v + 0.1f * in[i + 1];
                    v = v + 0.1f * in[i - s];
                    v = v + 0.1f * in[i + s];
                    out[(r - 1) * s + j] = v;
                }
            }
            write_array(mem, w.region("out").base + s * 4, out);
            break;
        }
        case KernelId::matmult: {
            const std::uint64_t s = w.stride, n = w.n;
            const auto a = read_array<double>(mem, w.region("A").base, n * s);
            const auto b = read_array<double>(mem, w.region("B").base, n * s);
            std::vector<double> c(s);
            for (std::uint64_t i = 0; i < w.outer; ++i) {
                for (std::uint64_t j = 0; j < s; ++j) c[j] = a[i * s] * b[j];
                for (std::uint64_t k = 1; k < n; ++k) {
                    const double aik = a[i * s + k];
                    for (std::uint64_t j = 0; j < s; ++j) c[j] = c[j] + aik * b[k * s + j];
                }
                mem.write(w.region("C").base + i * s * 8, {reinterpret_cast<const std::uint8_t*>(c.data()), s * 8});
            }
            break;
        }
        case KernelId::knn: {
            const std::uint64_t f = w.features, k = w.cfg.workload.knn_k;
            const auto train = read_array<float>(mem, w.region("train").base, w.instances * f);
            std::vector<std::uint32_t> out(w.outer * k);
            for (std::uint64_t t = 0; t < w.outer; ++t) {
                const auto x = read_array<float>(mem, w.region("xrep").base + t * vb, f);
                detail::TopK top(k);
                for (std::uint64_t c = 0; c < w.instances; ++c) {
                    float acc = 0.0f;
                    for (std::uint64_t i = 0; i < f; ++i) {
                        const float d = train[c * f + i] - x[i];
                        acc = acc + d * d;
                    }
                    top.offer(acc, static_cast<std::uint32_t>(c));
                }
                for (std::uint64_t i = 0; i < k; ++i) out[t * k + i] = top.best[i].second;
            }
            write_array(mem, w.region("nearest").base, out);
            break;
        }
        case KernelId::mlp: {
            const std::uint64_t f = w.features, m = w.instances;
            const auto x = read_array<float>(mem, w.region("x").base, f * m);
            const auto wt = read_array<float>(mem, w.region("w").base, f * w.outputs);
            std::vector<float> act(w.outer * m);
            for (std::uint64_t j = 0; j < w.outer; ++j) {
                for (std::uint64_t c = 0; c < m; ++c) {
                    float v = wt[j] * x[c];
                    for (std::uint64_t i = 1; i < f; ++i) v = v + wt[i * w.outputs + j] * x[i * m + c];
                    act[j * m + c] = detail::relu(v);
                }
            }
            write_array(mem, w.region("act").base, act);
            break;
        }
    }
}

bool outputs_match(const Workload& w, const BackingStore& expected, const BackingStore& actual, double rel_tol,
                   std::string* why) {
    const bool fp32 = w.kernel == KernelId::vecsum || w.kernel == KernelId::stencil || w.kernel == KernelId::mlp;
    const bool fp64 = w.kernel == KernelId::matmult;
    for (const auto& r : w.regions) {
        if (!r.output) continue;
        std::vector<std::uint8_t> a(r.bytes), b(r.bytes);
        expected.read(r.base, a);
        actual.read(r.base, b);
        if (a == b) continue;
        const std::uint64_t width = fp64 ? 8 : 4;
        for (std::uint64_t off = 0; off < r.bytes; off += width) {
            if (std::memcmp(&a[off], &b[off], width) == 0) continue;
            bool close = false;
            if (fp32 || fp64) {
                double x = 0, y = 0;
                if (fp64) {
                    std::memcpy(&x, &a[off], 8);
                    std::memcpy(&y, &b[off], 8);
                } else {
                    float fx = 0, fy = 0;
                    std::memcpy(&fx, &a[off], 4);
                    std::memcpy(&fy, &b[off], 4);
                    x = fx;
                    y = fy;
                }
                close = std::fabs(x - y) <= rel_tol * std::max(std::fabs(x), std::fabs(y));
            }
            if (!close) {
                if (why) *why = r.name + " differs at byte offset " + std::to_string(off);
                return false;
            }
        }
    }
    return true;
}

}  // namespace vima
