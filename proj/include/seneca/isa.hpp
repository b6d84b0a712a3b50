/*
 * Copyright 2026 The seneca-sim Authors
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

// NPE instruction set: mnemonics, decoded instructions, micro-kernels and the
// per-instruction data semantics.

#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seneca/bf16.hpp"
#include "seneca/errors.hpp"

namespace seneca {

inline constexpr int kRegisterCount = 64;
inline constexpr int kAddressRegisterCount = 8;
inline constexpr std::size_t kLoopBufferCapacity = 32;

enum class Mnemonic : std::uint8_t {
    ADD,
    SUB,
    MUL,
    DIV,
    ADD_I8X2,
    GTH,
    MAX,
    MIN,
    EQL,
    ABS,
    AND,
    ORR,
    SHL,
    SHR,
    I2F,
    RND,
    EVC,
    MLD,
    MST,
};

inline constexpr std::size_t kMnemonicCount = 19;

inline constexpr std::array<std::string_view, kMnemonicCount> kMnemonicNames = {
        "ADD", "SUB", "MUL", "DIV", "ADD_I8X2", "GTH", "MAX", "MIN", "EQL", "ABS",
        "AND", "ORR", "SHL", "SHR", "I2F", "RND", "EVC", "MLD", "MST"};

inline constexpr std::array<Mnemonic, kMnemonicCount> kAllMnemonics = {
        Mnemonic::ADD, Mnemonic::SUB, Mnemonic::MUL, Mnemonic::DIV, Mnemonic::ADD_I8X2,
        Mnemonic::GTH, Mnemonic::MAX, Mnemonic::MIN, Mnemonic::EQL, Mnemonic::ABS,
        Mnemonic::AND, Mnemonic::ORR, Mnemonic::SHL, Mnemonic::SHR, Mnemonic::I2F,
        Mnemonic::RND, Mnemonic::EVC, Mnemonic::MLD, Mnemonic::MST};

constexpr std::size_t index_of(Mnemonic m) noexcept { return static_cast<std::size_t>(m); }

constexpr std::string_view name_of(Mnemonic m) noexcept { return kMnemonicNames[index_of(m)]; }

inline std::optional<Mnemonic> parse_mnemonic(std::string_view text) noexcept
{
    for (std::size_t i = 0; i < kMnemonicCount; ++i) {
        if (kMnemonicNames[i] == text) {
            return kAllMnemonics[i];
        }
    }
    return std::nullopt;
}

/// Operand layout, which also fixes the textual form.
enum class OperandShape : std::uint8_t {
    binary,  // dst, srcA, srcB
    unary,   // dst, srcA
    load,    // dstReg, addrReg, autoInc
    store,   // addrReg, srcReg, autoInc
    capture, // srcReg
};

constexpr OperandShape shape_of(Mnemonic m) noexcept
{
    switch (m) {
    case Mnemonic::ABS:
    case Mnemonic::I2F:
    case Mnemonic::RND: return OperandShape::unary;
    case Mnemonic::MLD: return OperandShape::load;
    case Mnemonic::MST: return OperandShape::store;
    case Mnemonic::EVC: return OperandShape::capture;
    default: return OperandShape::binary;
    }
}

/// One decoded NPE instruction.
///
/// For MLD `dst` is the data register and `src_a` the address register; for
/// MST `dst` is the address register and `src_a` the data register; EVC reads
/// `src_a` only.
struct Instruction {
    Mnemonic op = Mnemonic::ADD;
    std::uint8_t dst = 0;
    std::uint8_t src_a = 0;
    std::uint8_t src_b = 0;
    bool auto_inc = false;

    friend bool operator==(const Instruction &, const Instruction &) = default;
};

/// Registers an instruction reads, in operand order.
inline std::vector<int> registers_read(const Instruction &ins)
{
    switch (shape_of(ins.op)) {
    case OperandShape::binary: return {ins.src_a, ins.src_b};
    case OperandShape::unary: return {ins.src_a};
    case OperandShape::load: return {};
    case OperandShape::store: return {ins.src_a};
    case OperandShape::capture: return {ins.src_a};
    }
    return {};
}

/// Data register written by an instruction, if any.
inline std::optional<int> register_written(const Instruction &ins)
{
    switch (shape_of(ins.op)) {
    case OperandShape::binary:
    case OperandShape::unary:
    case OperandShape::load: return ins.dst;
    default: return std::nullopt;
    }
}

/// Address register used by a memory instruction.
inline std::optional<int> address_register(const Instruction &ins)
{
    if (ins.op == Mnemonic::MLD) return ins.src_a;
    if (ins.op == Mnemonic::MST) return ins.dst;
    return std::nullopt;
}

inline void validate(const Instruction &ins)
{
    const auto check_reg = [](int r) {
        if (r < 0 || r >= kRegisterCount) {
            throw InvalidOperandError("register index R" + std::to_string(r) +
                    " out of range (0-" + std::to_string(kRegisterCount - 1) + ")");
        }
    };
    const auto check_addr = [](int a) {
        if (a < 0 || a >= kAddressRegisterCount) {
            throw InvalidOperandError("address register A" + std::to_string(a) +
                    " out of range (0-" + std::to_string(kAddressRegisterCount - 1) + ")");
        }
    };
    switch (shape_of(ins.op)) {
    case OperandShape::binary:
        check_reg(ins.dst);
        check_reg(ins.src_a);
        check_reg(ins.src_b);
        break;
    case OperandShape::unary:
        check_reg(ins.dst);
        check_reg(ins.src_a);
        break;
    case OperandShape::load:
        check_reg(ins.dst);
        check_addr(ins.src_a);
        break;
    case OperandShape::store:
        check_addr(ins.dst);
        check_reg(ins.src_a);
        break;
    case OperandShape::capture: check_reg(ins.src_a); break;
    }
}

/// A named instruction sequence replayed by the loop buffer once per element.
struct MicroKernel {
    std::string name;
    std::vector<Instruction> instructions;

    std::size_t size() const noexcept { return instructions.size(); }

    std::size_t count(Mnemonic m) const noexcept
    {
        return static_cast<std::size_t>(std::count_if(instructions.begin(), instructions.end(),
                [m](const Instruction &i) { return i.op == m; }));
    }

    void validate() const
    {
        if (instructions.empty()) {
            throw ValidationError("micro-kernel '" + name + "' is empty");
        }
        if (instructions.size() > kLoopBufferCapacity) {
            throw ValidationError("micro-kernel '" + name + "' has " +
                    std::to_string(instructions.size()) +
                    " instructions; the loop buffer holds " +
                    std::to_string(kLoopBufferCapacity));
        }
        for (const auto &ins : instructions) {
            seneca::validate(ins);
        }
    }

    /// Registers read before any write in program order; these must be
    /// preloaded as constants before the loop starts.
    std::vector<int> live_in_registers() const
    {
        std::bitset<kRegisterCount> written;
        std::bitset<kRegisterCount> live;
        for (const auto &ins : instructions) {
            for (int r : registers_read(ins)) {
                if (!written.test(static_cast<std::size_t>(r))) {
                    live.set(static_cast<std::size_t>(r));
                }
            }
            if (auto w = register_written(ins)) {
                written.set(static_cast<std::size_t>(*w));
            }
        }
        std::vector<int> out;
        for (int r = 0; r < kRegisterCount; ++r) {
            if (live.test(static_cast<std::size_t>(r))) out.push_back(r);
        }
        return out;
    }

    friend bool operator==(const MicroKernel &, const MicroKernel &) = default;
};

// ---------------------------------------------------------------------------
// Data semantics

/// Nearest integer with ties away from zero. RND goes through this one
/// function so the tie rule can be changed in a single place.
inline double round_to_integer(double x) noexcept { return std::round(x); }

inline Value16 exec_arith(Mnemonic m, Value16 a, Value16 b)
{
    const double x = a.to_double();
    const double y = b.to_double();
    switch (m) {
    // Double holds BF16 products exactly and has more than 2p+2 bits for the
    // other operations, so computing wide and rounding once is exact.
    case Mnemonic::ADD: return Value16::encode(x + y);
    case Mnemonic::SUB: return Value16::encode(x - y);
    case Mnemonic::MUL: return Value16::encode(x * y);
    case Mnemonic::DIV: return Value16::encode(x / y);
    default:
        throw InvalidOperandError(std::string(name_of(m)) + " is not a BF16 arithmetic op");
    }
}

/// Lane-wise saturating dual-INT8 arithmetic.
inline PackedWord exec_arith_i8x2(Mnemonic m, PackedWord a, PackedWord b)
{
    if (m != Mnemonic::ADD_I8X2) {
        throw InvalidOperandError(std::string(name_of(m)) + " is not a dual-INT8 op");
    }
    if (a.mode != PackMode::int8x2 || b.mode != PackMode::int8x2) {
        throw InvalidOperandError("ADD_I8X2 needs int8x2 operands, got " +
                std::string(to_string(a.mode)) + " and " + to_string(b.mode));
    }
    std::array<int, 2> lanes{};
    for (int i = 0; i < 2; ++i) {
        lanes[static_cast<std::size_t>(i)] = std::clamp(a.lane(i) + b.lane(i), -128, 127);
    }
    return PackedWord::pack(PackMode::int8x2, lanes);
}

inline Value16 exec_compare(Mnemonic m, Value16 a, Value16 b)
{
    const double x = a.to_double();
    const double y = b.to_double();
    switch (m) {
    case Mnemonic::GTH: return x > y ? kOne16 : kZero16;
    case Mnemonic::MAX: return x > y ? a : b;
    case Mnemonic::MIN: return x < y ? a : b;
    case Mnemonic::EQL: return a.bits == b.bits ? kOne16 : kZero16;
    case Mnemonic::ABS:
        return Value16::from_bits(static_cast<std::uint16_t>(a.bits & ~Value16::kSignMask));
    default:
        throw InvalidOperandError(std::string(name_of(m)) + " is not a compare op");
    }
}

/// Bit-wise ops on raw patterns. For shifts `b` is the amount, 0-15; SHR is logical.
inline std::uint16_t exec_bitwise(Mnemonic m, std::uint16_t a, std::uint16_t b)
{
    switch (m) {
    case Mnemonic::AND: return static_cast<std::uint16_t>(a & b);
    case Mnemonic::ORR: return static_cast<std::uint16_t>(a | b);
    case Mnemonic::SHL:
    case Mnemonic::SHR:
        if (b > 15) {
            throw InvalidOperandError("shift amount " + std::to_string(b) + " outside 0-15");
        }
        return m == Mnemonic::SHL ? static_cast<std::uint16_t>(a << b)
                                  : static_cast<std::uint16_t>(a >> b);
    default:
        throw InvalidOperandError(std::string(name_of(m)) + " is not a bit-wise op");
    }
}

/// I2F on an integer lane value.
inline Value16 exec_i2f(int value) noexcept { return Value16::encode(static_cast<double>(value)); }

/// RND: nearest integer, re-encoded as BF16.
inline Value16 exec_rnd(Value16 a) noexcept
{
    return Value16::encode(round_to_integer(a.to_double()));
}

} // namespace seneca
