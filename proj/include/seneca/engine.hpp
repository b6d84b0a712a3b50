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

// Loop-buffer execution of micro-kernels on the SIMD NPE array.
//
// A LoopPlan processes `iterations` logical elements. Elements are issued
// laneCount at a time; within a batch every lane executes instruction k
// before any lane executes k+1. Each lane's address registers start the
// batch at init + element * advance, where advance is the register's stride
// times the number of auto-incrementing accesses through it in the kernel.
// That is the address the sequential loop would have reached, so results
// and energy do not depend on the lane count; only cycles do.

#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "seneca/assembler.hpp"
#include "seneca/bf16.hpp"
#include "seneca/energy.hpp"
#include "seneca/errors.hpp"
#include "seneca/isa.hpp"
#include "seneca/memory.hpp"

namespace seneca {

/// How an address register walks memory.
enum class Packing : std::uint8_t {
    word,      // one 16-bit value per address
    int8,      // cursor counts int8 lanes, 2 per word
    int4,      // cursor counts int4 lanes, 4 per word
    int4_pair, // cursor counts int4 pairs, widened to an int8x2 word
};

constexpr int values_per_word(Packing p) noexcept
{
    switch (p) {
    case Packing::word: return 1;
    case Packing::int8: return 2;
    case Packing::int4: return 4;
    case Packing::int4_pair: return 2;
    }
    return 1;
}

struct AddressBinding {
    std::size_t init = 0;
    /// Advance per auto-increment, in cursor units (words, or lanes when packed).
    std::int64_t stride = 1;
    Packing packing = Packing::word;
};

/// Event produced by an EVC: neuron id plus the captured value.
struct AerEvent {
    std::uint64_t source = 0;
    Value16 payload{};

    friend bool operator==(const AerEvent &, const AerEvent &) = default;
};

struct LoopPlan {
    const MicroKernel *kernel = nullptr;
    std::size_t iterations = 0;
    std::array<AddressBinding, kAddressRegisterCount> addr{};
    /// Registers written once before iteration 0; their load is not charged.
    std::vector<std::pair<int, Value16>> constants;
    /// Added to the element index to form event source ids.
    std::uint64_t source_base = 0;

    LoopPlan &bind(int reg, std::size_t init, std::int64_t stride = 1, Packing p = Packing::word)
    {
        addr.at(static_cast<std::size_t>(reg)) = AddressBinding{init, stride, p};
        return *this;
    }
    LoopPlan &constant(int reg, Value16 v)
    {
        constants.emplace_back(reg, v);
        return *this;
    }
};

/// Executed-instruction counts; enough to price a run under any table.
struct ExecCounts {
    std::array<std::uint64_t, kMnemonicCount> instructions{};
    std::uint64_t events = 0;
    std::uint64_t cycles = 0;
    std::uint64_t shared_bits = 0;

    std::uint64_t operator[](Mnemonic m) const noexcept { return instructions[index_of(m)]; }

    ExecCounts &operator+=(const ExecCounts &o) noexcept
    {
        for (std::size_t i = 0; i < kMnemonicCount; ++i) instructions[i] += o.instructions[i];
        events += o.events;
        cycles += o.cycles;
        shared_bits += o.shared_bits;
        return *this;
    }

    /// Instruction, event and shared-memory energy; leakage excluded.
    Energy dynamic_energy(const EnergyTable &t) const
    {
        Energy e{};
        for (std::size_t i = 0; i < kMnemonicCount; ++i) {
            e += t.per_instruction[i] * static_cast<std::int64_t>(instructions[i]);
        }
        e += t.evc_event * static_cast<std::int64_t>(events);
        e += charge_transfer(t, Link::hbm, shared_bits);
        return e;
    }

    Energy leakage(const EnergyTable &t) const { return charge_leakage(t, cycles); }

    /// Appends `<prefix>.<item>` entries to a ledger.
    void charge(EnergyLedger &ledger, const EnergyTable &t, const std::string &prefix) const
    {
        for (std::size_t i = 0; i < kMnemonicCount; ++i) {
            ledger.add(prefix + '.' + std::string(kMnemonicNames[i]), instructions[i],
                    t.per_instruction[i]);
        }
        ledger.add(prefix + ".EVC_EVENT", events, t.evc_event);
        ledger.add(prefix + ".hbm_bits", shared_bits, t.bit(Link::hbm));
        ledger.add(prefix + ".leakage", cycles, t.leakage_per_cycle);
    }

    friend bool operator==(const ExecCounts &, const ExecCounts &) = default;
};

struct RunResult {
    std::uint64_t cycles = 0;
    std::vector<AerEvent> events;
    ExecCounts counts;
    EnergyLedger ledger;
    AccessStats mem_stats;
    Energy dynamic{}; // instructions, events, shared-memory bits
    Energy leakage{};
};

/// The SIMD lanes of one core: a register file and address registers per lane.
class NpeArray {
public:
    explicit NpeArray(int lane_count = 8)
    {
        if (lane_count <= 0) throw ValidationError("lane count must be positive");
        registers_.assign(static_cast<std::size_t>(lane_count), {});
        addresses_.assign(static_cast<std::size_t>(lane_count), {});
    }

    int lane_count() const noexcept { return static_cast<int>(registers_.size()); }

    std::uint16_t reg(int lane, int r) const
    {
        return registers_.at(static_cast<std::size_t>(lane)).at(static_cast<std::size_t>(r));
    }
    Value16 value(int lane, int r) const { return Value16::from_bits(reg(lane, r)); }
    std::int64_t address(int lane, int a) const
    {
        return addresses_.at(static_cast<std::size_t>(lane)).at(static_cast<std::size_t>(a));
    }

    /// Writes a register in every lane, marking it as a preloaded constant.
    void preload(int r, Value16 v)
    {
        if (r < 0 || r >= kRegisterCount) {
            throw InvalidOperandError("constant register R" + std::to_string(r) + " out of range");
        }
        for (auto &lane : registers_) lane[static_cast<std::size_t>(r)] = v.bits;
        constants_.set(static_cast<std::size_t>(r));
    }

    const std::bitset<kRegisterCount> &constant_registers() const noexcept { return constants_; }
    void clear_constants() noexcept { constants_.reset(); }

private:
    friend class LoopRunner;

    std::vector<std::array<std::uint16_t, kRegisterCount>> registers_;
    std::vector<std::array<std::int64_t, kAddressRegisterCount>> addresses_;
    std::bitset<kRegisterCount> constants_;
};

struct RunOptions {
    bool build_ledger = true;
    std::string ledger_prefix; // defaults to the kernel name
    std::ostream *trace = nullptr;
};

class LoopRunner {
public:
    LoopRunner(const LoopPlan &plan, DataMemory &mem, NpeArray &npe, const EnergyTable &table,
            const RunOptions &options)
            : plan_(plan)
            , mem_(mem)
            , npe_(npe)
            , table_(table)
            , options_(options)
    {
    }

    RunResult run()
    {
        if (plan_.kernel == nullptr) throw ValidationError("loop plan has no kernel");
        const MicroKernel &kernel = *plan_.kernel;
        kernel.validate();

        npe_.clear_constants();
        for (const auto &[r, v] : plan_.constants) npe_.preload(r, v);
        for (int r : kernel.live_in_registers()) {
            if (!npe_.constants_.test(static_cast<std::size_t>(r))) {
                throw ValidationError("micro-kernel '" + kernel.name + "' reads R" +
                        std::to_string(r) + " before writing it and no constant is bound");
            }
        }

        std::array<std::int64_t, kAddressRegisterCount> advance{};
        for (const auto &ins : kernel.instructions) {
            if (auto a = address_register(ins); a && ins.auto_inc) {
                advance[static_cast<std::size_t>(*a)] += plan_.addr[static_cast<std::size_t>(*a)].stride;
            }
        }

        const AccessStats stats_before = mem_.stats();
        const auto lanes = static_cast<std::size_t>(npe_.lane_count());
        std::vector<std::vector<AerEvent>> lane_events(lanes);

        for (std::size_t first = 0; first < plan_.iterations; first += lanes) {
            const std::size_t active = std::min(lanes, plan_.iterations - first);
            for (std::size_t l = 0; l < active; ++l) {
                const auto element = static_cast<std::int64_t>(first + l);
                for (std::size_t a = 0; a < kAddressRegisterCount; ++a) {
                    npe_.addresses_[l][a] =
                            static_cast<std::int64_t>(plan_.addr[a].init) + element * advance[a];
                }
            }
            for (std::size_t k = 0; k < kernel.instructions.size(); ++k) {
                const Instruction &ins = kernel.instructions[k];
                for (std::size_t l = 0; l < active; ++l) {
                    execute(ins, l, first + l, lane_events[l]);
                }
            }
            for (std::size_t l = 0; l < active; ++l) {
                result_.events.insert(result_.events.end(), lane_events[l].begin(), lane_events[l].end());
                lane_events[l].clear();
            }
            result_.counts.cycles += kernel.instructions.size();
        }

        result_.cycles = result_.counts.cycles;
        result_.dynamic = result_.counts.dynamic_energy(table_);
        result_.leakage = result_.counts.leakage(table_);
        const AccessStats &after = mem_.stats();
        for (std::size_t i = 0; i < kMemoryLevelCount; ++i) {
            result_.mem_stats.levels[i].reads = after.levels[i].reads - stats_before.levels[i].reads;
            result_.mem_stats.levels[i].writes = after.levels[i].writes - stats_before.levels[i].writes;
            result_.mem_stats.levels[i].bits_moved =
                    after.levels[i].bits_moved - stats_before.levels[i].bits_moved;
        }
        if (options_.build_ledger) {
            result_.counts.charge(result_.ledger, table_,
                    options_.ledger_prefix.empty() ? kernel.name : options_.ledger_prefix);
        }
        return std::move(result_);
    }

private:
    std::size_t word_address(std::int64_t cursor, const AddressBinding &b) const
    {
        if (cursor < 0) {
            throw BoundsError("negative address " + std::to_string(cursor));
        }
        const auto addr = static_cast<std::size_t>(cursor / values_per_word(b.packing));
        mem_.check(addr);
        return addr;
    }

    void note_shared_access()
    {
        if (mem_.level() == MemoryLevel::sharedMem) result_.counts.shared_bits += kWordBits;
    }

    void execute(const Instruction &ins, std::size_t lane, std::size_t element,
            std::vector<AerEvent> &events)
    {
        auto &regs = npe_.registers_[lane];
        auto &addrs = npe_.addresses_[lane];
        auto &count = result_.counts.instructions[index_of(ins.op)];
        const auto val = [&regs](int r) { return Value16::from_bits(regs[static_cast<std::size_t>(r)]); };
        const auto set = [&regs](int r, std::uint16_t bits) { regs[static_cast<std::size_t>(r)] = bits; };

        std::uint16_t traced = 0;
        switch (ins.op) {
        case Mnemonic::ADD:
        case Mnemonic::SUB:
        case Mnemonic::MUL:
        case Mnemonic::DIV:
            traced = exec_arith(ins.op, val(ins.src_a), val(ins.src_b)).bits;
            set(ins.dst, traced);
            ++count;
            break;
        case Mnemonic::ADD_I8X2:
            traced = exec_arith_i8x2(ins.op, PackedWord{regs[ins.src_a], PackMode::int8x2},
                    PackedWord{regs[ins.src_b], PackMode::int8x2}).bits;
            set(ins.dst, traced);
            ++count;
            break;
        case Mnemonic::GTH:
        case Mnemonic::MAX:
        case Mnemonic::MIN:
        case Mnemonic::EQL:
        case Mnemonic::ABS:
            traced = exec_compare(ins.op, val(ins.src_a), val(ins.src_b)).bits;
            set(ins.dst, traced);
            ++count;
            break;
        case Mnemonic::AND:
        case Mnemonic::ORR:
        case Mnemonic::SHL:
        case Mnemonic::SHR:
            traced = exec_bitwise(ins.op, regs[ins.src_a], regs[ins.src_b]);
            set(ins.dst, traced);
            ++count;
            break;
        case Mnemonic::I2F:
            traced = exec_i2f(static_cast<std::int16_t>(regs[ins.src_a])).bits;
            set(ins.dst, traced);
            ++count;
            break;
        case Mnemonic::RND:
            traced = exec_rnd(val(ins.src_a)).bits;
            set(ins.dst, traced);
            ++count;
            break;
        case Mnemonic::EVC: {
            const Value16 v = val(ins.src_a);
            ++count;
            traced = v.bits;
            if (!v.is_zero()) {
                events.push_back(AerEvent{plan_.source_base + element, v});
                ++result_.counts.events;
            }
            break;
        }
        case Mnemonic::MLD: {
            const auto a = static_cast<std::size_t>(ins.src_a);
            const AddressBinding &b = plan_.addr[a];
            const std::size_t addr = word_address(addrs[a], b);
            if (b.packing == Packing::word) {
                traced = mem_.read_word(addr);
                ++count;
                note_shared_access();
            } else {
                const int slot = static_cast<int>(addrs[a] % values_per_word(b.packing));
                PackedStream &stream = streams_[a];
                const std::uint64_t reads_before = mem_.stats()[mem_.level()].reads;
                if (b.packing == Packing::int4_pair) {
                    const int lo = stream.fetch(mem_, addr, PackMode::int4x4, slot * 2);
                    const int hi = stream.fetch(mem_, addr, PackMode::int4x4, slot * 2 + 1);
                    const std::array<int, 2> pair{lo, hi};
                    traced = PackedWord::pack(PackMode::int8x2, pair).bits;
                } else {
                    const PackMode mode = b.packing == Packing::int8 ? PackMode::int8x2 : PackMode::int4x4;
                    traced = static_cast<std::uint16_t>(
                            static_cast<std::int16_t>(stream.fetch(mem_, addr, mode, slot)));
                }
                // Lanes served from the already-fetched word cost nothing.
                if (mem_.stats()[mem_.level()].reads != reads_before) {
                    ++count;
                    note_shared_access();
                }
            }
            set(ins.dst, traced);
            if (ins.auto_inc) addrs[a] += b.stride;
            break;
        }
        case Mnemonic::MST: {
            const auto a = static_cast<std::size_t>(ins.dst);
            const AddressBinding &b = plan_.addr[a];
            if (b.packing != Packing::word) {
                throw InvalidOperandError("MST through packed address register A" + std::to_string(a));
            }
            const std::size_t addr = word_address(addrs[a], b);
            traced = regs[ins.src_a];
            mem_.write_word(addr, traced);
            ++count;
            note_shared_access();
            if (ins.auto_inc) addrs[a] += b.stride;
            break;
        }
        }

        if (options_.trace != nullptr) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "0x%04X", static_cast<unsigned>(traced));
            *options_.trace << "e=" << element << " lane=" << lane << ' ' << format_instruction(ins)
                            << " -> " << buf << '\n';
        }
    }

    const LoopPlan &plan_;
    DataMemory &mem_;
    NpeArray &npe_;
    const EnergyTable &table_;
    const RunOptions &options_;
    RunResult result_;
    std::array<PackedStream, kAddressRegisterCount> streams_{};
};

/// Runs one loop plan. Throws BoundsError on an address outside `mem` and
/// ValidationError when the kernel reads a register that is neither written
/// earlier in the kernel nor bound as a constant.
inline RunResult run_loop(const LoopPlan &plan, DataMemory &mem, NpeArray &npe,
        const EnergyTable &table, const RunOptions &options = {})
{
    return LoopRunner(plan, mem, npe, table, options).run();
}

} // namespace seneca
