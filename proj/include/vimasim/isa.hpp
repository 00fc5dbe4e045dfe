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
 * @file isa.hpp
 * @brief Memory-to-memory vector instructions, their element-wise meaning,
 *        an intrinsics-style builder and the textual trace format.
 *
 * Trace lines are `OP ETYPE DST SRC1 SRC2 IMM LEN`; addresses and the
 * immediate's raw bit pattern are hexadecimal, absent fields are `-`.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vimasim/dram.hpp"

namespace vima {

enum class ElementType : std::uint8_t { i32, u32, i64, u64, f32, f64 };

enum class Opcode : std::uint8_t {
    MOV_IMM,
    ADD,
    SUB,
    MUL,
    DIV,
    ADD_SCALAR,
    MUL_SCALAR,
    MAC_SCALAR,
    AND,
    OR,
    XOR,
};

enum class OpClass : std::uint8_t { alu, mul, div };

constexpr std::uint64_t element_bytes(ElementType t) {
    return (t == ElementType::i32 || t == ElementType::u32 || t == ElementType::f32) ? 4 : 8;
}
constexpr bool is_float(ElementType t) { return t == ElementType::f32 || t == ElementType::f64; }

/// Memory operands read, counting MAC_SCALAR's accumulator.
int memory_sources(Opcode op);
bool has_immediate(Opcode op);
OpClass op_class(Opcode op);

std::string_view to_string(Opcode op);
std::string_view to_string(ElementType t);
std::optional<Opcode> parse_opcode(std::string_view s);
std::optional<ElementType> parse_element_type(std::string_view s);

struct VimaInstruction {
    Opcode op = Opcode::ADD;
    ElementType etype = ElementType::i32;
    std::uint64_t dst = 0;
    std::optional<std::uint64_t> src1;
    std::optional<std::uint64_t> src2;
    /// Raw bits; the low 32 bits are used for 32-bit element types.
    std::uint64_t imm = 0;
    std::uint64_t length = 8192;

    bool operator==(const VimaInstruction&) const = default;

    /// Addresses read from memory, including the MAC_SCALAR accumulator.
    std::vector<std::uint64_t> read_operands() const;
};

/// Shape errors: wrong source count, misaligned addresses, bad length.
std::optional<std::string> check_well_formed(const VimaInstruction& in, std::uint64_t vector_bytes);

struct ApplyResult {
    /// Sticky flag: an integer element divided by zero (result forced to 0).
    bool divide_by_zero = false;
};

/// Element-wise semantics over the flat store, ascending element order.
/// Sources are read in full before the destination is written.
ApplyResult apply(const VimaInstruction& in, BackingStore& mem);

/// Raw bit patterns of scalars, for immediates.
std::uint64_t imm_bits(float v);
std::uint64_t imm_bits(double v);
std::uint64_t imm_bits(std::int64_t v);

class BuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Intrinsics-style stream builder: one call appends one instruction.
 * Names follow `vima_<op>_<etype>`, e.g. vima_add_f32(dst, a, b),
 * vima_mov_imm_i32(dst, imm), vima_mac_scalar_f64(dst, a, imm).
 */
class IntrinsicsBuilder {
public:
    explicit IntrinsicsBuilder(std::uint64_t vector_bytes = 8192) : vector_bytes_(vector_bytes) {}

    const std::vector<VimaInstruction>& stream() const { return stream_; }
    std::vector<VimaInstruction> take() { return std::move(stream_); }
    std::uint64_t vector_bytes() const { return vector_bytes_; }

    /// Validates and appends. Throws BuildError.
    void emit(const VimaInstruction& in);

#define VIMA_DECLARE_INTRINSICS(T)                                                             \
    void vima_mov_imm_##T(std::uint64_t dst, std::uint64_t imm);                               \
    void vima_add_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t b);                    \
    void vima_sub_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t b);                    \
    void vima_mul_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t b);                    \
    void vima_div_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t b);                    \
    void vima_and_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t b);                    \
    void vima_or_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t b);                     \
    void vima_xor_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t b);                    \
    void vima_add_scalar_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t imm);           \
    void vima_mul_scalar_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t imm);           \
    void vima_mac_scalar_##T(std::uint64_t dst, std::uint64_t a, std::uint64_t imm);

    VIMA_DECLARE_INTRINSICS(i32)
    VIMA_DECLARE_INTRINSICS(u32)
    VIMA_DECLARE_INTRINSICS(i64)
    VIMA_DECLARE_INTRINSICS(u64)
    VIMA_DECLARE_INTRINSICS(f32)
    VIMA_DECLARE_INTRINSICS(f64)
#undef VIMA_DECLARE_INTRINSICS

private:
    void two(Opcode op, ElementType t, std::uint64_t dst, std::uint64_t a, std::uint64_t b);
    void one_imm(Opcode op, ElementType t, std::uint64_t dst, std::uint64_t a, std::uint64_t imm);

    std::uint64_t vector_bytes_;
    std::vector<VimaInstruction> stream_;
};

class TraceError : public std::runtime_error {
public:
    TraceError(std::size_t line, const std::string& what)
        : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

std::string encode(const VimaInstruction& in);
/// Throws TraceError carrying `line_number`.
VimaInstruction decode(std::string_view line, std::size_t line_number = 1);

/// Newline-delimited trace; blank and `#` lines are skipped on read.
std::string encode_trace(const std::vector<VimaInstruction>& stream);
std::vector<VimaInstruction> decode_trace(std::string_view text);

}  // namespace vima
