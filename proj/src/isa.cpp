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

#include "vimasim/isa.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <limits>
#include <type_traits>

namespace vima {

namespace {

constexpr std::array<std::pair<Opcode, std::string_view>, 11> kOpNames{{
    {Opcode::MOV_IMM, "MOV_IMM"},
    {Opcode::ADD, "ADD"},
    {Opcode::SUB, "SUB"},
    {Opcode::MUL, "MUL"},
    {Opcode::DIV, "DIV"},
    {Opcode::ADD_SCALAR, "ADD_SCALAR"},
    {Opcode::MUL_SCALAR, "MUL_SCALAR"},
    {Opcode::MAC_SCALAR, "MAC_SCALAR"},
    {Opcode::AND, "AND"},
    {Opcode::OR, "OR"},
    {Opcode::XOR, "XOR"},
}};

constexpr std::array<std::pair<ElementType, std::string_view>, 6> kTypeNames{{
    {ElementType::i32, "i32"},
    {ElementType::u32, "u32"},
    {ElementType::i64, "i64"},
    {ElementType::u64, "u64"},
    {ElementType::f32, "f32"},
    {ElementType::f64, "f64"},
}};

bool two_source(Opcode op) {
    switch (op) {
        case Opcode::ADD:
        case Opcode::SUB:
        case Opcode::MUL:
        case Opcode::DIV:
        case Opcode::AND:
        case Opcode::OR:
        case Opcode::XOR:
            return true;
        default:
            return false;
    }
}

template <typename E>
E from_imm(std::uint64_t bits) {
    if constexpr (sizeof(E) == 4) {
        return std::bit_cast<E>(static_cast<std::uint32_t>(bits));
    } else {
        return std::bit_cast<E>(bits);
    }
}

template <typename E>
using UnsignedOf = std::conditional_t<sizeof(E) == 4, std::uint32_t, std::uint64_t>;

template <typename E>
E bitwise(Opcode op, E a, E b) {
    using U = UnsignedOf<E>;
    const U x = std::bit_cast<U>(a), y = std::bit_cast<U>(b);
    U r = 0;
    switch (op) {
        case Opcode::AND: r = x & y; break;
        case Opcode::OR: r = x | y; break;
        default: r = x ^ y; break;
    }
    return std::bit_cast<E>(r);
}

template <typename E>
E int_div(E a, E b, bool& flag) {
    if (b == 0) {
        flag = true;
        return 0;
    }
    if constexpr (std::is_signed_v<E>) {
        if (a == std::numeric_limits<E>::min() && b == -1) return a;  // wraps
    }
    return static_cast<E>(a / b);
}

// Wrapping arithmetic through the unsigned type of the same width.
template <typename E>
E wrap(Opcode op, E a, E b) {
    using U = UnsignedOf<E>;
    const U x = static_cast<U>(a), y = static_cast<U>(b);
    switch (op) {
        case Opcode::ADD: return static_cast<E>(static_cast<U>(x + y));
        case Opcode::SUB: return static_cast<E>(static_cast<U>(x - y));
        default: return static_cast<E>(static_cast<U>(x * y));
    }
}

template <typename E>
void apply_typed(const VimaInstruction& in, BackingStore& mem, ApplyResult& res) {
    const std::size_t n = in.length / sizeof(E);
    // Reused across calls; every element read is loaded or written first.
    thread_local std::vector<E> a, b, d;
    a.resize(n);
    b.resize(n);
    d.resize(n);
    auto load = [&](std::uint64_t addr, std::vector<E>& v) {
        mem.read(addr, {reinterpret_cast<std::uint8_t*>(v.data()), n * sizeof(E)});
    };
    if (in.src1) load(*in.src1, a);
    if (in.src2) load(*in.src2, b);
    if (in.op == Opcode::MAC_SCALAR) load(in.dst, d);
    const E imm = from_imm<E>(in.imm);

    for (std::size_t i = 0; i < n; ++i) {
        E r{};
        switch (in.op) {
            case Opcode::MOV_IMM: r = imm; break;
            case Opcode::AND:
            case Opcode::OR:
            case Opcode::XOR: r = bitwise<E>(in.op, a[i], b[i]); break;
            case Opcode::DIV:
                if constexpr (std::is_floating_point_v<E>) {
                    r = a[i] / b[i];
                } else {
                    r = int_div<E>(a[i], b[i], res.divide_by_zero);
                }
                break;
            case Opcode::ADD:
            case Opcode::SUB:
            case Opcode::MUL:
                if constexpr (std::is_floating_point_v<E>) {
                    r = in.op == Opcode::ADD ? a[i] + b[i] : in.op == Opcode::SUB ? a[i] - b[i] : a[i] * b[i];
                } else {
                    r = wrap<E>(in.op, a[i], b[i]);
                }
                break;
            case Opcode::ADD_SCALAR:
                if constexpr (std::is_floating_point_v<E>) {
                    r = a[i] + imm;
                } else {
                    r = wrap<E>(Opcode::ADD, a[i], imm);
                }
                break;
            case Opcode::MUL_SCALAR:
                if constexpr (std::is_floating_point_v<E>) {
                    r = imm * a[i];
                } else {
                    r = wrap<E>(Opcode::MUL, imm, a[i]);
                }
                break;
            case Opcode::MAC_SCALAR:
                if constexpr (std::is_floating_point_v<E>) {
                    const E p = imm * a[i];
                    r = d[i] + p;
                } else {
                    r = wrap<E>(Opcode::ADD, d[i], wrap<E>(Opcode::MUL, imm, a[i]));
                }
                break;
        }
        d[i] = r;
    }
    mem.write(in.dst, {reinterpret_cast<const std::uint8_t*>(d.data()), n * sizeof(E)});
}

std::string hex(std::uint64_t v) {
    char buf[24];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, 16);
    return "0x" + std::string(buf, p);
}

std::optional<std::uint64_t> parse_hex(std::string_view s) {
    if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) return std::nullopt;
    s.remove_prefix(2);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

int memory_sources(Opcode op) {
    if (op == Opcode::MOV_IMM) return 0;
    if (two_source(op) || op == Opcode::MAC_SCALAR) return 2;
    return 1;
}

bool has_immediate(Opcode op) {
    return op == Opcode::MOV_IMM || op == Opcode::ADD_SCALAR || op == Opcode::MUL_SCALAR ||
           op == Opcode::MAC_SCALAR;
}

OpClass op_class(Opcode op) {
    switch (op) {
        case Opcode::MUL:
        case Opcode::MUL_SCALAR:
        case Opcode::MAC_SCALAR:
            return OpClass::mul;
        case Opcode::DIV:
            return OpClass::div;
        default:
            return OpClass::alu;
    }
}

std::string_view to_string(Opcode op) {
    for (auto [o, n] : kOpNames)
        if (o == op) return n;
    return "?";
}

std::string_view to_string(ElementType t) {
    for (auto [e, n] : kTypeNames)
        if (e == t) return n;
    return "?";
}

std::optional<Opcode> parse_opcode(std::string_view s) {
    for (auto [o, n] : kOpNames)
        if (n == s) return o;
    return std::nullopt;
}

std::optional<ElementType> parse_element_type(std::string_view s) {
    for (auto [e, n] : kTypeNames)
        if (n == s) return e;
    return std::nullopt;
}

std::vector<std::uint64_t> VimaInstruction::read_operands() const {
    std::vector<std::uint64_t> out;
    if (src1) out.push_back(*src1);
    if (src2) out.push_back(*src2);
    if (op == Opcode::MAC_SCALAR) out.push_back(dst);
    return out;
}

std::optional<std::string> check_well_formed(const VimaInstruction& in, std::uint64_t vector_bytes) {
    const std::uint64_t w = element_bytes(in.etype);
    if (in.length != vector_bytes) return "length " + std::to_string(in.length) + " differs from vector size";
    if (in.dst % vector_bytes != 0) return "destination " + hex(in.dst) + " is not vector-aligned";
    const bool want1 = in.op != Opcode::MOV_IMM;
    const bool want2 = two_source(in.op);
    if (in.src1.has_value() != want1) return std::string(to_string(in.op)) + ": wrong src1 presence";
    if (in.src2.has_value() != want2) return std::string(to_string(in.op)) + ": wrong src2 presence";
    if (in.src1 && *in.src1 % w != 0) return "src1 " + hex(*in.src1) + " is not element-aligned";
    if (in.src2 && *in.src2 % w != 0) return "src2 " + hex(*in.src2) + " is not element-aligned";
    if (!has_immediate(in.op) && in.imm != 0) return std::string(to_string(in.op)) + " takes no immediate";
    return std::nullopt;
}

ApplyResult apply(const VimaInstruction& in, BackingStore& mem) {
    ApplyResult res;
    switch (in.etype) {
        case ElementType::i32: apply_typed<std::int32_t>(in, mem, res); break;
        case ElementType::u32: apply_typed<std::uint32_t>(in, mem, res); break;
        case ElementType::i64: apply_typed<std::int64_t>(in, mem, res); break;
        case ElementType::u64: apply_typed<std::uint64_t>(in, mem, res); break;
        case ElementType::f32: apply_typed<float>(in, mem, res); break;
        case ElementType::f64: apply_typed<double>(in, mem, res); break;
    }
    return res;
}

std::uint64_t imm_bits(float v) { return std::bit_cast<std::uint32_t>(v); }
std::uint64_t imm_bits(double v) { return std::bit_cast<std::uint64_t>(v); }
std::uint64_t imm_bits(std::int64_t v) { return static_cast<std::uint64_t>(v); }

void IntrinsicsBuilder::emit(const VimaInstruction& in) {
    if (auto err = check_well_formed(in, vector_bytes_)) throw BuildError(*err);
    stream_.push_back(in);
}

void IntrinsicsBuilder::two(Opcode op, ElementType t, std::uint64_t dst, std::uint64_t a, std::uint64_t b) {
    emit(VimaInstruction{op, t, dst, a, b, 0, vector_bytes_});
}

void IntrinsicsBuilder::one_imm(Opcode op, ElementType t, std::uint64_t dst, std::uint64_t a, std::uint64_t imm) {
    emit(VimaInstruction{op, t, dst, a, std::nullopt, imm, vector_bytes_});
}

#define VIMA_DEFINE_INTRINSICS(T)                                                                              \
    void IntrinsicsBuilder::vima_mov_imm_##T(std::uint64_t dst, std::uint64_t imm) {                           \
        emit(VimaInstruction{Opcode::MOV_IMM, ElementType::T, dst, std::nullopt, std::nullopt, imm,            \
                             vector_bytes_});                                                                  \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_add_##T(std::uint64_t d, std::uint64_t a, std::uint64_t b) {                  \
        two(Opcode::ADD, ElementType::T, d, a, b);                                                             \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_sub_##T(std::uint64_t d, std::uint64_t a, std::uint64_t b) {                  \
        two(Opcode::SUB, ElementType::T, d, a, b);                                                             \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_mul_##T(std::uint64_t d, std::uint64_t a, std::uint64_t b) {                  \
        two(Opcode::MUL, ElementType::T, d, a, b);                                                             \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_div_##T(std::uint64_t d, std::uint64_t a, std::uint64_t b) {                  \
        two(Opcode::DIV, ElementType::T, d, a, b);                                                             \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_and_##T(std::uint64_t d, std::uint64_t a, std::uint64_t b) {                  \
        two(Opcode::AND, ElementType::T, d, a, b);                                                             \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_or_##T(std::uint64_t d, std::uint64_t a, std::uint64_t b) {                   \
        two(Opcode::OR, ElementType::T, d, a, b);                                                              \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_xor_##T(std::uint64_t d, std::uint64_t a, std::uint64_t b) {                  \
        two(Opcode::XOR, ElementType::T, d, a, b);                                                             \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_add_scalar_##T(std::uint64_t d, std::uint64_t a, std::uint64_t imm) {         \
        one_imm(Opcode::ADD_SCALAR, ElementType::T, d, a, imm);                                                \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_mul_scalar_##T(std::uint64_t d, std::uint64_t a, std::uint64_t imm) {         \
        one_imm(Opcode::MUL_SCALAR, ElementType::T, d, a, imm);                                                \
    }                                                                                                          \
    void IntrinsicsBuilder::vima_mac_scalar_##T(std::uint64_t d, std::uint64_t a, std::uint64_t imm) {         \
        one_imm(Opcode::MAC_SCALAR, ElementType::T, d, a, imm);                                                \
    }

VIMA_DEFINE_INTRINSICS(i32)
VIMA_DEFINE_INTRINSICS(u32)
VIMA_DEFINE_INTRINSICS(i64)
VIMA_DEFINE_INTRINSICS(u64)
VIMA_DEFINE_INTRINSICS(f32)
VIMA_DEFINE_INTRINSICS(f64)
#undef VIMA_DEFINE_INTRINSICS

std::string encode(const VimaInstruction& in) {
    std::string s;
    s += to_string(in.op);
    s += ' ';
    s += to_string(in.etype);
    s += ' ' + hex(in.dst);
    s += ' ' + (in.src1 ? hex(*in.src1) : std::string("-"));
    s += ' ' + (in.src2 ? hex(*in.src2) : std::string("-"));
    s += ' ' + (has_immediate(in.op) ? hex(in.imm) : std::string("-"));
    s += ' ' + std::to_string(in.length);
    return s;
}

VimaInstruction decode(std::string_view line, std::size_t line_number) {
    std::vector<std::string_view> tok;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t b = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > b) tok.push_back(line.substr(b, i - b));
    }
    if (tok.size() != 7) throw TraceError(line_number, "expected 7 fields, got " + std::to_string(tok.size()));

    VimaInstruction in;
    auto op = parse_opcode(tok[0]);
    if (!op) throw TraceError(line_number, "unknown opcode '" + std::string(tok[0]) + "'");
    in.op = *op;
    auto et = parse_element_type(tok[1]);
    if (!et) throw TraceError(line_number, "unknown element type '" + std::string(tok[1]) + "'");
    in.etype = *et;

    auto dst = parse_hex(tok[2]);
    if (!dst) throw TraceError(line_number, "bad destination '" + std::string(tok[2]) + "'");
    in.dst = *dst;

    auto optional_hex = [&](std::string_view t, const char* what) -> std::optional<std::uint64_t> {
        if (t == "-") return std::nullopt;
        auto v = parse_hex(t);
        if (!v) throw TraceError(line_number, std::string("bad ") + what + " '" + std::string(t) + "'");
        return v;
    };
    in.src1 = optional_hex(tok[3], "src1");
    in.src2 = optional_hex(tok[4], "src2");
    auto imm = optional_hex(tok[5], "immediate");
    if (imm.has_value() != has_immediate(in.op))
        throw TraceError(line_number, std::string(to_string(in.op)) + ": immediate presence mismatch");
    in.imm = imm.value_or(0);

    std::uint64_t len = 0;
    auto [p, ec] = std::from_chars(tok[6].data(), tok[6].data() + tok[6].size(), len);
    if (ec != std::errc{} || p != tok[6].data() + tok[6].size() || len == 0)
        throw TraceError(line_number, "bad length '" + std::string(tok[6]) + "'");
    in.length = len;

    const bool want1 = in.op != Opcode::MOV_IMM;
    const bool want2 = two_source(in.op);
    if (in.src1.has_value() != want1 || in.src2.has_value() != want2)
        throw TraceError(line_number, std::string(to_string(in.op)) + ": source count mismatch");
    return in;
}

std::string encode_trace(const std::vector<VimaInstruction>& stream) {
    std::string out;
    for (const auto& in : stream) out += encode(in) + '\n';
    return out;
}

std::vector<VimaInstruction> decode_trace(std::string_view text) {
    std::vector<VimaInstruction> out;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') continue;
        out.push_back(decode(line, lineno));
    }
    return out;
}

}  // namespace vima
