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

// Op streams. One outer iteration is a vector for the streaming kernels, a
// grid row for stencil, a row (AVX) or a row block (VIMA) for matmult, a
// test point for knn and a neuron for mlp.

#include <algorithm>
#include <bit>
#include <memory>
#include <vector>

#include "kernels_internal.hpp"
#include "vimasim/kernels.hpp"

namespace vima {

using detail::Emitter;
using detail::LazySource;

namespace {

// C rows updated per sweep of B in the VIMA matmult: six accumulators plus
// the B row and a spare fit the default 8-line cache.
constexpr std::uint64_t kMatmultRowBlock = 6;

constexpr std::uint64_t kLine = 64;

VimaInstruction make(Opcode op, ElementType t, std::uint64_t dst, std::optional<std::uint64_t> a,
                     std::optional<std::uint64_t> b, std::uint64_t imm, std::uint64_t len) {
    return VimaInstruction{op, t, dst, a, b, imm, len};
}

// Horizontal reduction steps for one instance's partial-sum vector.
std::uint64_t reduce_steps(std::uint64_t features) {
    return std::bit_width(std::min<std::uint64_t>(features, kLine / 4)) - 1;
}

void emit_reduce_select(Emitter& e, std::uint64_t acc, std::uint64_t steps) {
    for (std::uint64_t s = 0; s < steps; ++s) acc = e.op(HostOpKind::fp_alu, acc);
    const std::uint64_t cmp = e.op(HostOpKind::fp_alu, acc);
    e.op(HostOpKind::int_alu, cmp);
}

// --------------------------------------------------------------------------
// VIMA backend

LazySource::EmitFn vima_emitter(const Workload& w, BackingStore& mem) {
    const std::uint64_t vb = w.cfg.topology.vector_bytes;
    switch (w.kernel) {
        case KernelId::memset: {
            const std::uint64_t dst = w.region("dst").base;
            return [=](std::uint64_t v, Emitter& e) {
                const auto a = e.op(HostOpKind::int_alu);
                e.vima(make(Opcode::MOV_IMM, ElementType::i32, dst + v * vb, std::nullopt, std::nullopt, 7, vb), a);
            };
        }
        case KernelId::memcopy: {
            const std::uint64_t src = w.region("src").base, dst = w.region("dst").base;
            return [=](std::uint64_t v, Emitter& e) {
                const auto a = e.op(HostOpKind::int_alu);
                e.vima(make(Opcode::ADD_SCALAR, ElementType::i32, dst + v * vb, src + v * vb, std::nullopt, 0, vb), a);
            };
        }
        case KernelId::vecsum: {
            const std::uint64_t a = w.region("a").base, b = w.region("b").base, c = w.region("c").base;
            return [=](std::uint64_t v, Emitter& e) {
                const auto i = e.op(HostOpKind::int_alu);
                e.vima(make(Opcode::ADD, ElementType::f32, c + v * vb, a + v * vb, b + v * vb, 0, vb), i);
            };
        }
        case KernelId::stencil: {
            const std::uint64_t in = w.region("in").base, out = w.region("out").base;
            const std::uint64_t row = w.stride * 4;
            const std::uint64_t center_k = imm_bits(0.6f), side_k = imm_bits(0.1f);
            return [=](std::uint64_t it, Emitter& e) {
                const std::uint64_t r = it + 1;
                for (std::uint64_t off = 0; off < row; off += vb) {
                    const std::uint64_t c = in + r * row + off, d = out + r * row + off;
                    const auto a = e.op(HostOpKind::int_alu);
                    e.vima(make(Opcode::MUL_SCALAR, ElementType::f32, d, c, std::nullopt, center_k, vb), a);
                    for (std::uint64_t src : {c - 4, c + 4, c - row, c + row})
                        e.vima(make(Opcode::MAC_SCALAR, ElementType::f32, d, src, std::nullopt, side_k, vb), a);
                }
            };
        }
        case KernelId::matmult: {
            const std::uint64_t A = w.region("A").base, B = w.region("B").base, C = w.region("C").base;
            const std::uint64_t row = w.stride * 8, n = w.n, rows = w.outer;
            BackingStore* m = &mem;
            return [=](std::uint64_t blk, Emitter& e) {
                const std::uint64_t i0 = blk * kMatmultRowBlock, i1 = std::min(rows, i0 + kMatmultRowBlock);
                for (std::uint64_t k = 0; k < n; ++k) {
                    for (std::uint64_t i = i0; i < i1; ++i) {
                        const std::uint64_t aik = A + i * row + k * 8;
                        const auto la = e.load(aik);
                        const std::uint64_t imm = imm_bits(m->load<double>(aik));
                        const Opcode op = k == 0 ? Opcode::MUL_SCALAR : Opcode::MAC_SCALAR;
                        for (std::uint64_t off = 0; off < row; off += vb) {
                            const auto a = e.op(HostOpKind::int_alu);
                            e.vima(make(op, ElementType::f64, C + i * row + off, B + k * row + off, std::nullopt,
                                        imm, vb),
                                   std::max(a, la));
                        }
                    }
                }
            };
        }
        case KernelId::knn: {
            const std::uint64_t train = w.region("train").base, xrep = w.region("xrep").base;
            const std::uint64_t tmp = w.region("tmp").base, nearest = w.region("nearest").base;
            const std::uint64_t f = w.features, fb = f * 4, k = w.cfg.workload.knn_k;
            const std::uint64_t chunks = w.instances * fb / vb, steps = reduce_steps(f);
            auto top = std::make_shared<detail::TopK>(k);
            BackingStore* m = &mem;
            return [=](std::uint64_t t, Emitter& e) {
                for (std::uint64_t ch = 0; ch < chunks; ++ch) {
                    const std::uint64_t buf = tmp + (ch & 1) * vb;
                    const auto a = e.op(HostOpKind::int_alu);
                    const auto v1 =
                        e.vima(make(Opcode::SUB, ElementType::f32, buf, train + ch * vb, xrep + t * vb, 0, vb), a);
                    const auto v2 = e.vima(make(Opcode::MUL, ElementType::f32, buf, buf, buf, 0, vb), v1);
                    // Host: horizontal sums of the squared differences, then selection.
                    std::uint64_t acc = Emitter::kNone;
                    for (std::uint64_t q = 0; q < vb / kLine; ++q) {
                        const auto l = e.load(buf + q * kLine, v2);
                        acc = (q * kLine) % fb == 0 ? e.op(HostOpKind::fp_alu, l) : e.op(HostOpKind::fp_alu, l, acc);
                        if (fb >= kLine) {
                            if ((q + 1) * kLine % fb == 0) emit_reduce_select(e, acc, steps);
                        } else {
                            for (std::uint64_t g = 0; g < kLine / fb; ++g) emit_reduce_select(e, acc, steps);
                        }
                    }
                    e.hook([=] {
                        const auto sq = detail::read_array<float>(*m, buf, vb / 4);
                        const std::uint64_t first = ch * vb / fb;
                        for (std::uint64_t c = 0; c < vb / fb; ++c) {
                            float s = 0.0f;
                            for (std::uint64_t i = 0; i < f; ++i) s = s + sq[c * f + i];
                            top->offer(s, static_cast<std::uint32_t>(first + c));
                        }
                    });
                }
                const auto st = e.store(nearest + t * k * 4);
                (void)st;
                e.hook([=] {
                    std::vector<std::uint32_t> idx(k);
                    for (std::uint64_t i = 0; i < k; ++i) idx[i] = top->best[i].second;
                    detail::write_array(*m, nearest + t * k * 4, idx);
                    top->best.clear();
                });
            };
        }
        case KernelId::mlp: {
            const std::uint64_t x = w.region("x").base, wt = w.region("w").base;
            const std::uint64_t tmp = w.region("tmp").base, act = w.region("act").base;
            const std::uint64_t row = w.instances * 4, f = w.features, outs = w.outputs;
            BackingStore* m = &mem;
            return [=](std::uint64_t j, Emitter& e) {
                for (std::uint64_t off = 0; off < row; off += vb) {
                    const std::uint64_t buf = tmp + ((off / vb) & 1) * vb;
                    std::uint64_t last = Emitter::kNone;
                    for (std::uint64_t i = 0; i < f; ++i) {
                        const std::uint64_t waddr = wt + (i * outs + j) * 4;
                        const auto lw = e.load(waddr);
                        const auto a = e.op(HostOpKind::int_alu);
                        const Opcode op = i == 0 ? Opcode::MUL_SCALAR : Opcode::MAC_SCALAR;
                        last = e.vima(make(op, ElementType::f32, buf, x + i * row + off, std::nullopt,
                                           imm_bits(m->load<float>(waddr)), vb),
                                      std::max(a, lw));
                    }
                    for (std::uint64_t q = 0; q < vb / kLine; ++q) {
                        const auto l = e.load(buf + q * kLine, last);
                        const auto r = e.op(HostOpKind::fp_alu, l);
                        e.store(act + j * row + off + q * kLine, r);
                    }
                    const std::uint64_t dst = act + j * row + off;
                    e.hook([=] {
                        auto v = detail::read_array<float>(*m, buf, vb / 4);
                        for (auto& y : v) y = detail::relu(y);
                        detail::write_array(*m, dst, v);
                    });
                }
            };
        }
    }
    throw KernelError("unknown kernel");
}

std::uint64_t vima_outer(const Workload& w) {
    if (w.kernel == KernelId::matmult) return (w.outer + kMatmultRowBlock - 1) / kMatmultRowBlock;
    return w.outer;
}

// --------------------------------------------------------------------------
// AVX backend: 64 B vectors through the cache hierarchy.

LazySource::EmitFn avx_emitter(const Workload& w) {
    const std::uint64_t vb = w.cfg.topology.vector_bytes;
    switch (w.kernel) {
        case KernelId::memset: {
            const std::uint64_t dst = w.region("dst").base;
            return [=](std::uint64_t v, Emitter& e) {
                std::uint64_t a = Emitter::kNone;
                for (std::uint64_t off = 0; off < vb; off += kLine) {
                    a = e.op(HostOpKind::int_alu, a);
                    e.store(dst + v * vb + off, a);
                }
            };
        }
        case KernelId::memcopy: {
            const std::uint64_t src = w.region("src").base, dst = w.region("dst").base;
            return [=](std::uint64_t v, Emitter& e) {
                std::uint64_t a = Emitter::kNone;
                for (std::uint64_t off = 0; off < vb; off += kLine) {
                    a = e.op(HostOpKind::int_alu, a);
                    const auto l = e.load(src + v * vb + off, a);
                    e.store(dst + v * vb + off, l, a);
                }
            };
        }
        case KernelId::vecsum: {
            const std::uint64_t A = w.region("a").base, B = w.region("b").base, C = w.region("c").base;
            return [=](std::uint64_t v, Emitter& e) {
                std::uint64_t a = Emitter::kNone;
                for (std::uint64_t off = 0; off < vb; off += kLine) {
                    a = e.op(HostOpKind::int_alu, a);
                    const auto x = e.load(A + v * vb + off, a);
                    const auto y = e.load(B + v * vb + off, a);
                    const auto s = e.op(HostOpKind::fp_alu, x, y);
                    e.store(C + v * vb + off, s, a);
                }
            };
        }
        case KernelId::stencil: {
            const std::uint64_t in = w.region("in").base, out = w.region("out").base;
            const std::uint64_t row = w.stride * 4;
            return [=](std::uint64_t it, Emitter& e) {
                const std::uint64_t r = it + 1;
                std::uint64_t a = Emitter::kNone;
                for (std::uint64_t off = 0; off < row; off += kLine) {
                    const std::uint64_t c = in + r * row + off;
                    a = e.op(HostOpKind::int_alu, a);
                    std::uint64_t v = e.op(HostOpKind::fp_mul, e.load(c, a));
                    for (std::uint64_t src : {c - 4, c + kLine, c - row, c + row}) {
                        const auto m = e.op(HostOpKind::fp_mul, e.load(src, a));
                        v = e.op(HostOpKind::fp_alu, v, m);
                    }
                    e.store(out + r * row + off, v, a);
                }
            };
        }
        case KernelId::matmult: {
            const std::uint64_t A = w.region("A").base, B = w.region("B").base, C = w.region("C").base;
            const std::uint64_t row = w.stride * 8, n = w.n;
            const std::uint64_t used = (n * 8 + kLine - 1) / kLine * kLine;
            return [=](std::uint64_t i, Emitter& e) {
                for (std::uint64_t k = 0; k < n; ++k) {
                    const auto a = e.op(HostOpKind::int_alu);
                    const auto la = e.load(A + i * row + k * 8, a);
                    for (std::uint64_t off = 0; off < used; off += kLine) {
                        const auto b = e.load(B + k * row + off, a);
                        const auto c = e.load(C + i * row + off, a);
                        const auto m = e.op(HostOpKind::fp_mul, la, b);
                        const auto s = e.op(HostOpKind::fp_alu, m, c);
                        e.store(C + i * row + off, s, a);
                    }
                }
            };
        }
        case KernelId::knn: {
            const std::uint64_t train = w.region("train").base, xrep = w.region("xrep").base;
            const std::uint64_t nearest = w.region("nearest").base;
            const std::uint64_t fb = w.features * 4, k = w.cfg.workload.knn_k;
            const std::uint64_t total = w.instances * fb, steps = reduce_steps(w.features);
            return [=](std::uint64_t t, Emitter& e) {
                std::uint64_t acc = Emitter::kNone, a = Emitter::kNone;
                for (std::uint64_t off = 0; off < total; off += kLine) {
                    a = e.op(HostOpKind::int_alu, a);
                    const auto lt = e.load(train + off, a);
                    const auto lx = e.load(xrep + t * vb + off % std::max(fb, kLine), a);
                    const auto s = e.op(HostOpKind::fp_alu, lt, lx);
                    const auto m = e.op(HostOpKind::fp_mul, s, s);
                    acc = off % fb == 0 ? m : e.op(HostOpKind::fp_alu, acc, m);
                    if (fb >= kLine) {
                        if ((off + kLine) % fb == 0) emit_reduce_select(e, acc, steps);
                    } else {
                        for (std::uint64_t g = 0; g < kLine / fb; ++g) emit_reduce_select(e, acc, steps);
                    }
                }
                for (std::uint64_t off = 0; off < k * 4; off += kLine) e.store(nearest + t * k * 4 + off);
            };
        }
        case KernelId::mlp: {
            const std::uint64_t x = w.region("x").base, act = w.region("act").base;
            const std::uint64_t row = w.instances * 4, f = w.features;
            const std::uint64_t tmp = w.region("tmp").base, blk = std::min(vb, row);
            // Same blocking as the VIMA stream: one vector-sized block of
            // instances is swept across every feature, accumulating in tmp.
            return [=](std::uint64_t j, Emitter& e) {
                std::vector<std::uint64_t> part(blk / kLine);
                for (std::uint64_t off = 0; off < row; off += blk) {
                    for (std::uint64_t i = 0; i < f; ++i) {
                        const auto a = e.op(HostOpKind::int_alu);
                        for (std::uint64_t q = 0; q < blk / kLine; ++q) {
                            const auto m = e.op(HostOpKind::fp_mul, e.load(x + i * row + off + q * kLine, a));
                            // The reload waits on the previous feature's store.
                            part[q] = i == 0 ? m : e.op(HostOpKind::fp_alu, m, e.load(tmp + q * kLine, part[q]));
                            e.store(tmp + q * kLine, part[q], a);
                        }
                    }
                    for (std::uint64_t q = 0; q < blk / kLine; ++q)
                        e.store(act + j * row + off + q * kLine, e.op(HostOpKind::fp_alu, e.load(tmp + q * kLine, part[q])));
                }
            };
        }
    }
    throw KernelError("unknown kernel");
}

}  // namespace

std::unique_ptr<OpSource> vima_source(const Workload& w, BackingStore& mem) {
    return std::make_unique<LazySource>(vima_emitter(w, mem), 0, vima_outer(w));
}

std::vector<VimaInstruction> vima_instructions(const Workload& w) {
    BackingStore mem;
    generate(w, mem);
    auto src = vima_source(w, mem);
    std::vector<VimaInstruction> out;
    HostOp op;
    while (src->next(op))
        if (op.kind == HostOpKind::vima) out.push_back(op.vima);
    return out;
}

std::vector<std::unique_ptr<OpSource>> avx_sources(const Workload& w, std::size_t threads) {
    if (threads == 0) throw KernelError("at least one thread");
    std::vector<std::unique_ptr<OpSource>> out;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::uint64_t b = w.outer * t / threads, e = w.outer * (t + 1) / threads;
        out.push_back(std::make_unique<LazySource>(avx_emitter(w), b, e));
    }
    return out;
}

}  // namespace vima
