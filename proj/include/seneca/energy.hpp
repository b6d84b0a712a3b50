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

// Energy cost table and ledgers.
//
// All energies are integers in units of 0.01 fJ (1e-5 pJ). That grid holds
// every per-instruction cost, the 0.06 pJ leakage per cycle and the per-bit
// link costs (65.62 fJ/b) exactly, so ledger sums never lose precision.

#pragma once

#include <array>
#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seneca/errors.hpp"
#include "seneca/isa.hpp"

namespace seneca {

/// Energy quantity, stored as an integer count of 0.01 fJ.
struct Energy {
    std::int64_t units = 0;

    static constexpr std::int64_t kUnitsPerPj = 100'000;
    static constexpr std::int64_t kUnitsPerFj = 100;

    static constexpr Energy from_units(std::int64_t u) noexcept { return Energy{u}; }

    constexpr double pj() const noexcept
    {
        return static_cast<double>(units) / static_cast<double>(kUnitsPerPj);
    }
    constexpr double uj() const noexcept { return pj() * 1e-6; }

    constexpr Energy &operator+=(Energy o) noexcept
    {
        units += o.units;
        return *this;
    }
    friend constexpr Energy operator+(Energy a, Energy b) noexcept { return Energy{a.units + b.units}; }
    friend constexpr Energy operator-(Energy a, Energy b) noexcept { return Energy{a.units - b.units}; }
    friend constexpr Energy operator*(Energy a, std::int64_t n) noexcept { return Energy{a.units * n}; }
    friend constexpr Energy operator*(std::int64_t n, Energy a) noexcept { return Energy{a.units * n}; }
    friend constexpr auto operator<=>(Energy, Energy) noexcept = default;
};

/// Parses a non-negative decimal into an integer count of 10^-`decimals`.
/// Digits beyond that precision are rounded half-up.
inline std::int64_t parse_fixed_decimal(std::string_view text, int decimals,
        const std::string &what)
{
    std::size_t i = 0;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t end = text.size();
    while (end > i && (text[end - 1] == ' ' || text[end - 1] == '\t')) --end;
    text = text.substr(i, end - i);
    if (text.empty()) throw ValidationError(what + ": missing value");
    if (text[0] == '-') throw ValidationError(what + ": negative value '" + std::string(text) + "'");
    if (text[0] == '+') text.remove_prefix(1);

    std::int64_t integral = 0;
    std::int64_t fraction = 0;
    int fraction_digits = 0;
    bool seen_point = false;
    bool round_up = false;
    bool any_digit = false;
    for (char c : text) {
        if (c == '.') {
            if (seen_point) throw ValidationError(what + ": malformed number '" + std::string(text) + "'");
            seen_point = true;
            continue;
        }
        if (c < '0' || c > '9') {
            throw ValidationError(what + ": malformed number '" + std::string(text) + "'");
        }
        any_digit = true;
        if (!seen_point) {
            integral = integral * 10 + (c - '0');
            if (integral > 1'000'000'000'000LL) throw ValidationError(what + ": value too large");
        } else if (fraction_digits < decimals) {
            fraction = fraction * 10 + (c - '0');
            ++fraction_digits;
        } else if (fraction_digits == decimals) {
            round_up = c >= '5';
            ++fraction_digits;
        }
    }
    if (!any_digit) throw ValidationError(what + ": malformed number '" + std::string(text) + "'");
    std::int64_t scale = 1;
    for (int d = 0; d < decimals; ++d) scale *= 10;
    for (int d = std::min(fraction_digits, decimals); d < decimals; ++d) fraction *= 10;
    return integral * scale + fraction + (round_up ? 1 : 0);
}

/// Exact decimal text of `value / 10^decimals`, trailing zeros trimmed.
inline std::string format_fixed_decimal(std::int64_t value, int decimals)
{
    const bool negative = value < 0;
    std::uint64_t mag = negative ? static_cast<std::uint64_t>(-value) : static_cast<std::uint64_t>(value);
    std::uint64_t scale = 1;
    for (int d = 0; d < decimals; ++d) scale *= 10;
    std::string out = std::to_string(mag / scale);
    std::uint64_t frac = mag % scale;
    if (frac != 0) {
        std::string digits = std::to_string(frac);
        digits.insert(0, static_cast<std::size_t>(decimals) - digits.size(), '0');
        while (!digits.empty() && digits.back() == '0') digits.pop_back();
        out += '.' + digits;
    }
    return negative ? "-" + out : out;
}

inline std::string format_pj(Energy e) { return format_fixed_decimal(e.units, 5); }

inline Energy pj(std::string_view text) { return Energy{parse_fixed_decimal(text, 5, "energy")}; }

/// Links whose cost is charged per transferred bit.
enum class Link : std::uint8_t { registerFile, sram, noc, hbm };

inline constexpr std::array<std::string_view, 4> kLinkNames = {"registerFile", "sram", "noc", "hbm"};

constexpr std::string_view name_of(Link l) noexcept { return kLinkNames[static_cast<std::size_t>(l)]; }

inline std::optional<Link> parse_link(std::string_view text) noexcept
{
    for (std::size_t i = 0; i < kLinkNames.size(); ++i) {
        if (kLinkNames[i] == text) return static_cast<Link>(i);
    }
    return std::nullopt;
}

/// Energy costs of one core.
struct EnergyTable {
    std::array<Energy, kMnemonicCount> per_instruction{};
    Energy evc_event{};          // added to EVC when it emits an event
    Energy riscv_per_instr{};
    Energy riscv_data_access{};
    std::array<Energy, 4> per_bit{}; // indexed by Link
    Energy leakage_per_cycle{};
    Energy synop_int4_full_1{};  // measured per-synop costs of the full-integer mode
    Energy synop_int4_full_4{};

    static EnergyTable defaults()
    {
        EnergyTable t;
        const auto set = [&t](std::initializer_list<Mnemonic> ms, const char *v) {
            for (Mnemonic m : ms) t.per_instruction[index_of(m)] = pj(v);
        };
        using M = Mnemonic;
        set({M::ADD, M::SUB, M::MUL, M::DIV}, "1.4");
        set({M::ADD_I8X2}, "1.2");
        set({M::GTH, M::MAX, M::MIN}, "1.2");
        set({M::EQL, M::ABS}, "1.1");
        set({M::AND, M::ORR}, "1.1");
        set({M::SHL, M::SHR}, "1.2");
        set({M::I2F}, "1.1");
        set({M::RND}, "1.4");
        set({M::EVC}, "0.5");
        set({M::MLD}, "3.7");
        set({M::MST}, "3.9");
        t.evc_event = pj("1.1");
        t.riscv_per_instr = pj("11.6");
        t.riscv_data_access = pj("10.0");
        t.per_bit[static_cast<std::size_t>(Link::registerFile)] = Energy{1200};
        t.per_bit[static_cast<std::size_t>(Link::sram)] = Energy{20000};
        t.per_bit[static_cast<std::size_t>(Link::noc)] = Energy{6562};
        t.per_bit[static_cast<std::size_t>(Link::hbm)] = Energy{700000};
        t.leakage_per_cycle = pj("0.06");
        t.synop_int4_full_1 = pj("5.63");
        t.synop_int4_full_4 = pj("2.78");
        return t;
    }

    Energy instruction(Mnemonic m) const { return per_instruction[index_of(m)]; }
    Energy bit(Link l) const { return per_bit[static_cast<std::size_t>(l)]; }

    /// Every entry as `key = value` lines in a fixed order; per-instruction
    /// values in pJ, link values in fJ/b.
    std::string to_config_text() const
    {
        std::ostringstream out;
        for (std::size_t i = 0; i < kMnemonicCount; ++i) {
            out << kMnemonicNames[i] << " = " << format_pj(per_instruction[i]) << '\n';
        }
        out << "EVC_EVENT = " << format_pj(evc_event) << '\n';
        out << "RISCV_INSTR = " << format_pj(riscv_per_instr) << '\n';
        out << "RISCV_DATA = " << format_pj(riscv_data_access) << '\n';
        out << "LEAKAGE = " << format_pj(leakage_per_cycle) << '\n';
        out << "SYNOP_INT4_FULL_1 = " << format_pj(synop_int4_full_1) << '\n';
        out << "SYNOP_INT4_FULL_4 = " << format_pj(synop_int4_full_4) << '\n';
        for (std::size_t i = 0; i < kLinkNames.size(); ++i) {
            out << kLinkNames[i] << " = " << format_fixed_decimal(per_bit[i].units, 2) << '\n';
        }
        return out.str();
    }

    /// FNV-1a of the canonical config text, as 16 hex digits.
    std::string hash() const
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : to_config_text()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    /// Every entry multiplied by an integer factor.
    EnergyTable scaled(std::int64_t factor) const
    {
        EnergyTable t = *this;
        for (auto &e : t.per_instruction) e = e * factor;
        for (auto &e : t.per_bit) e = e * factor;
        t.evc_event = evc_event * factor;
        t.riscv_per_instr = riscv_per_instr * factor;
        t.riscv_data_access = riscv_data_access * factor;
        t.leakage_per_cycle = leakage_per_cycle * factor;
        t.synop_int4_full_1 = synop_int4_full_1 * factor;
        t.synop_int4_full_4 = synop_int4_full_4 * factor;
        return t;
    }

    friend bool operator==(const EnergyTable &, const EnergyTable &) = default;
};

/// Applies `key = value` overrides on top of the default table. `#` starts a
/// comment. Unknown keys and negative values are rejected.
inline EnergyTable load_energy_table(std::string_view text)
{
    EnergyTable t = EnergyTable::defaults();
    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin < text.size()) {
        std::size_t end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view line = text.substr(begin, end - begin);
        begin = end + 1;
        if (auto c = line.find('#'); c != std::string_view::npos) line = line.substr(0, c);
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const auto eq = line.find('=');
        const std::string where = "cost table line " + std::to_string(line_no);
        if (eq == std::string_view::npos) throw ValidationError(where + ": expected 'key = value'");
        std::string key(line.substr(0, eq));
        std::string value(line.substr(eq + 1));
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t\r") + 1);
        if (!value.empty() && value.back() == '\r') value.pop_back();
        const std::string what = where + " (" + key + ")";

        if (auto m = parse_mnemonic(key)) {
            t.per_instruction[index_of(*m)] = Energy{parse_fixed_decimal(value, 5, what)};
        } else if (auto l = parse_link(key)) {
            t.per_bit[static_cast<std::size_t>(*l)] = Energy{parse_fixed_decimal(value, 2, what)};
        } else if (key == "EVC_EVENT") {
            t.evc_event = Energy{parse_fixed_decimal(value, 5, what)};
        } else if (key == "RISCV_INSTR") {
            t.riscv_per_instr = Energy{parse_fixed_decimal(value, 5, what)};
        } else if (key == "RISCV_DATA") {
            t.riscv_data_access = Energy{parse_fixed_decimal(value, 5, what)};
        } else if (key == "LEAKAGE") {
            t.leakage_per_cycle = Energy{parse_fixed_decimal(value, 5, what)};
        } else if (key == "SYNOP_INT4_FULL_1") {
            t.synop_int4_full_1 = Energy{parse_fixed_decimal(value, 5, what)};
        } else if (key == "SYNOP_INT4_FULL_4") {
            t.synop_int4_full_4 = Energy{parse_fixed_decimal(value, 5, what)};
        } else {
            throw ValidationError(where + ": unknown key '" + key + "'");
        }
    }
    return t;
}

inline Energy charge_instruction(const EnergyTable &t, Mnemonic m, bool event_generated = false)
{
    Energy e = t.instruction(m);
    if (m == Mnemonic::EVC && event_generated) e += t.evc_event;
    return e;
}

inline Energy charge_leakage(const EnergyTable &t, std::uint64_t cycles)
{
    return t.leakage_per_cycle * static_cast<std::int64_t>(cycles);
}

inline Energy charge_transfer(const EnergyTable &t, Link level, std::uint64_t bits)
{
    return t.bit(level) * static_cast<std::int64_t>(bits);
}

/// Per-iteration energy of a kernel in pJ; EVC emission weighted by `event_rate`.
inline double kernel_energy(const MicroKernel &k, const EnergyTable &t, double event_rate)
{
    if (!(event_rate >= 0.0 && event_rate <= 1.0)) {
        throw ValidationError("event rate must lie in [0, 1]");
    }
    Energy fixed{};
    for (const auto &ins : k.instructions) fixed += t.instruction(ins.op);
    const auto evc = static_cast<std::int64_t>(k.count(Mnemonic::EVC));
    return fixed.pj() + event_rate * (t.evc_event * evc).pj();
}

// ---------------------------------------------------------------------------

struct LedgerEntry {
    std::string category;
    std::uint64_t count = 0;
    Energy unit{};

    Energy subtotal() const noexcept { return unit * static_cast<std::int64_t>(count); }

    friend bool operator==(const LedgerEntry &, const LedgerEntry &) = default;
};

/// Append-only account of charged energy. Charges with an existing
/// (category, unit) pair fold into that entry's count.
class EnergyLedger {
public:
    void add(const std::string &category, std::uint64_t count, Energy unit)
    {
        if (count == 0) return;
        const auto key = category + '\x1f' + std::to_string(unit.units);
        auto it = index_.find(key);
        if (it == index_.end()) {
            index_.emplace(key, entries_.size());
            entries_.push_back({category, count, unit});
        } else {
            entries_[it->second].count += count;
        }
        total_ += unit * static_cast<std::int64_t>(count);
    }

    void add(const LedgerEntry &e) { add(e.category, e.count, e.unit); }

    void merge(const EnergyLedger &other)
    {
        for (const auto &e : other.entries_) add(e);
    }

    Energy total() const noexcept { return total_; }
    const std::vector<LedgerEntry> &entries() const noexcept { return entries_; }

    /// Sum over entries whose category starts with `prefix`.
    Energy total_for(std::string_view prefix) const
    {
        Energy sum{};
        for (const auto &e : entries_) {
            if (e.category.compare(0, prefix.size(), prefix) == 0) sum += e.subtotal();
        }
        return sum;
    }

    std::uint64_t count_for(const std::string &category) const
    {
        std::uint64_t n = 0;
        for (const auto &e : entries_) {
            if (e.category == category) n += e.count;
        }
        return n;
    }

    /// Subtotals keyed by category, summed over units.
    std::map<std::string, Energy> by_category() const
    {
        std::map<std::string, Energy> out;
        for (const auto &e : entries_) out[e.category] += e.subtotal();
        return out;
    }

    bool empty() const noexcept { return entries_.empty(); }

private:
    std::vector<LedgerEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    Energy total_{};
};

} // namespace seneca
