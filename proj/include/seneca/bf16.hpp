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

// BrainFloat16 scalar and packed integer words, the two views of a 16-bit
// NPE datum.

#pragma once

#include <array>
#include <bit>
#include <cstdio>
#include <cstdint>
#include <span>
#include <string>

#include "seneca/errors.hpp"

namespace seneca {

/// A BF16 value held as its raw 16-bit pattern (1 sign, 8 exponent, 7 mantissa).
/// Equality is bit-wise, so +0.0 and -0.0 differ and a NaN equals itself.
struct Value16 {
    std::uint16_t bits = 0;

    static constexpr std::uint16_t kSignMask = 0x8000;
    static constexpr std::uint16_t kPositiveInfinity = 0x7F80;
    static constexpr std::uint16_t kQuietNaN = 0x7FC0;

    static constexpr Value16 from_bits(std::uint16_t b) noexcept { return Value16{b}; }

    /// Round-to-nearest-even conversion from a double. Values beyond the BF16
    /// range become infinities, subnormals are kept, NaN maps to a quiet NaN
    /// with the input's sign.
    static constexpr Value16 encode(double x) noexcept
    {
        const auto raw = std::bit_cast<std::uint64_t>(x);
        const auto sign = static_cast<std::uint16_t>((raw >> 48) & kSignMask);
        const auto biased = static_cast<int>((raw >> 52) & 0x7FF);
        const std::uint64_t fraction = raw & ((std::uint64_t{1} << 52) - 1);

        if (biased == 0x7FF) {
            return Value16{static_cast<std::uint16_t>(
                    sign | (fraction != 0 ? kQuietNaN : kPositiveInfinity))};
        }
        if (biased == 0) {
            // Double subnormals are far below half the smallest BF16 subnormal.
            return Value16{sign};
        }

        const std::uint64_t significand = (std::uint64_t{1} << 52) | fraction;
        const int target_exponent = biased - 1023 + 127;
        int shift = 45;
        if (target_exponent < 1) {
            shift += 1 - target_exponent;
        }
        if (shift > 60) {
            return Value16{sign};
        }

        std::uint64_t kept = significand >> shift;
        const std::uint64_t rest = significand & ((std::uint64_t{1} << shift) - 1);
        const std::uint64_t half = std::uint64_t{1} << (shift - 1);
        if (rest > half || (rest == half && (kept & 1) != 0)) {
            ++kept;
        }

        std::uint64_t magnitude = 0;
        if (target_exponent >= 1) {
            // A carry out of the mantissa bumps the exponent field by itself.
            magnitude = (static_cast<std::uint64_t>(target_exponent) << 7) + kept - 128;
        } else {
            magnitude = kept;
        }
        if (magnitude >= kPositiveInfinity) {
            magnitude = kPositiveInfinity;
        }
        return Value16{static_cast<std::uint16_t>(sign | magnitude)};
    }

    constexpr float to_float() const noexcept
    {
        return std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16);
    }
    constexpr double to_double() const noexcept { return static_cast<double>(to_float()); }

    constexpr bool sign_bit() const noexcept { return (bits & kSignMask) != 0; }
    constexpr bool is_nan() const noexcept
    {
        return (bits & 0x7F80) == 0x7F80 && (bits & 0x007F) != 0;
    }
    constexpr bool is_inf() const noexcept { return (bits & 0x7FFF) == kPositiveInfinity; }
    constexpr bool is_zero() const noexcept { return (bits & 0x7FFF) == 0; }

    friend constexpr bool operator==(Value16, Value16) noexcept = default;
};

inline constexpr Value16 kZero16 = Value16::from_bits(0x0000);
inline constexpr Value16 kOne16 = Value16::from_bits(0x3F80);

/// Shorthand for Value16::encode.
constexpr Value16 bf16(double x) noexcept { return Value16::encode(x); }

inline std::string to_string(Value16 v);

enum class PackMode : std::uint8_t { bf16, int8x2, int4x4 };

constexpr int lane_count(PackMode mode) noexcept
{
    switch (mode) {
    case PackMode::bf16: return 1;
    case PackMode::int8x2: return 2;
    case PackMode::int4x4: return 4;
    }
    return 1;
}

constexpr int lane_bits(PackMode mode) noexcept { return 16 / lane_count(mode); }

constexpr int lane_min(PackMode mode) noexcept { return -(1 << (lane_bits(mode) - 1)); }
constexpr int lane_max(PackMode mode) noexcept { return (1 << (lane_bits(mode) - 1)) - 1; }

inline const char *to_string(PackMode mode) noexcept;
inline PackMode parse_pack_mode(const std::string &text);

/// A 16-bit word viewed as 1, 2 or 4 lanes. Integer lanes are signed two's
/// complement, lane 0 in the least-significant bits.
struct PackedWord {
    std::uint16_t bits = 0;
    PackMode mode = PackMode::bf16;

    int lanes() const noexcept { return lane_count(mode); }

    /// Signed value of an integer lane.
    int lane(int index) const
    {
        if (mode == PackMode::bf16) {
            throw InvalidOperandError("bf16 word has no integer lanes");
        }
        if (index < 0 || index >= lanes()) {
            throw BoundsError("lane " + std::to_string(index) + " outside " +
                    std::to_string(lanes()) + "-lane word");
        }
        const int width = lane_bits(mode);
        const int raw = (bits >> (index * width)) & ((1 << width) - 1);
        return raw >= (1 << (width - 1)) ? raw - (1 << width) : raw;
    }

    std::array<int, 4> unpack() const
    {
        std::array<int, 4> out{};
        for (int i = 0; i < lanes(); ++i) {
            out[static_cast<std::size_t>(i)] = lane(i);
        }
        return out;
    }

    static PackedWord pack(PackMode mode, std::span<const int> values)
    {
        if (mode == PackMode::bf16) {
            throw InvalidOperandError("cannot pack integers into a bf16 word");
        }
        if (static_cast<int>(values.size()) != lane_count(mode)) {
            throw InvalidOperandError("expected " + std::to_string(lane_count(mode)) +
                    " lanes, got " + std::to_string(values.size()));
        }
        const int width = lane_bits(mode);
        std::uint16_t bits = 0;
        for (int i = 0; i < lane_count(mode); ++i) {
            const int v = values[static_cast<std::size_t>(i)];
            if (v < lane_min(mode) || v > lane_max(mode)) {
                throw InvalidOperandError("lane value " + std::to_string(v) +
                        " does not fit " + to_string(mode));
            }
            bits = static_cast<std::uint16_t>(
                    bits | ((static_cast<unsigned>(v) & ((1u << width) - 1)) << (i * width)));
        }
        return PackedWord{bits, mode};
    }

    friend bool operator==(PackedWord, PackedWord) noexcept = default;
};

inline std::string to_string(Value16 v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g (0x%04X)", v.to_double(), static_cast<unsigned>(v.bits));
    return buf;
}

inline const char *to_string(PackMode mode) noexcept
{
    switch (mode) {
    case PackMode::bf16: return "bf16";
    case PackMode::int8x2: return "int8";
    case PackMode::int4x4: return "int4";
    }
    return "?";
}

inline PackMode parse_pack_mode(const std::string &text)
{
    if (text == "bf16") return PackMode::bf16;
    if (text == "int8" || text == "int8x2") return PackMode::int8x2;
    if (text == "int4" || text == "int4x4") return PackMode::int4x4;
    throw ValidationError("unknown packing mode '" + text + "'");
}

} // namespace seneca
