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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "seneca/energy.hpp"
#include "seneca/kernels.hpp"

namespace seneca {
namespace {

TEST(EnergyTable, InstructionCosts)
{
    const auto t = EnergyTable::defaults();
    EXPECT_EQ(format_pj(charge_instruction(t, Mnemonic::MLD)), "3.7");
    EXPECT_EQ(format_pj(charge_instruction(t, Mnemonic::ADD)), "1.4");
    EXPECT_EQ(format_pj(charge_instruction(t, Mnemonic::EVC)), "0.5");
    EXPECT_EQ(format_pj(charge_instruction(t, Mnemonic::EVC, true)), "1.6");
}

TEST(EnergyTable, Leakage)
{
    const auto t = EnergyTable::defaults();
    EXPECT_EQ(charge_leakage(t, 0).units, 0);
    EXPECT_EQ(format_pj(charge_leakage(t, 1)), "0.06");
    EXPECT_EQ(format_pj(charge_leakage(t, 1000)), "60");
}

TEST(EnergyTable, Transfers)
{
    const auto t = EnergyTable::defaults();
    EXPECT_NEAR(charge_transfer(t, Link::noc, 32).pj(), 2.1, 0.005);
    EXPECT_EQ(format_pj(charge_transfer(t, Link::hbm, 32)), "224");
    EXPECT_EQ(charge_transfer(t, Link::sram, 0).units, 0);
}

TEST(EnergyTable, ConfigOverrides)
{
    EXPECT_EQ(load_energy_table(""), EnergyTable::defaults());
    EXPECT_EQ(load_energy_table("# nothing\n\n"), EnergyTable::defaults());
    const auto t = load_energy_table("MLD = 4.0\n");
    EXPECT_EQ(format_pj(t.instruction(Mnemonic::MLD)), "4");
    EXPECT_EQ(t.instruction(Mnemonic::MST), EnergyTable::defaults().instruction(Mnemonic::MST));
    EXPECT_THROW(load_energy_table("MLD = -1"), ValidationError);
    EXPECT_THROW(load_energy_table("FOO = 1"), ValidationError);
    EXPECT_THROW(load_energy_table("MLD 1"), ValidationError);
    EXPECT_THROW(load_energy_table("MLD = abc"), ValidationError);
}

TEST(EnergyTable, ConfigTextRoundTripsAndHashes)
{
    const auto t = EnergyTable::defaults();
    EXPECT_EQ(load_energy_table(t.to_config_text()), t);
    EXPECT_EQ(t.hash().size(), 16u);
    EXPECT_NE(t.hash(), load_energy_table("ADD = 1.5").hash());
}

TEST(KernelEnergy, PerKernelSums)
{
    const auto t = EnergyTable::defaults();
    EXPECT_NEAR(kernel_energy(build_if_integration(), t, 1.0), 12.7, 1e-9);
    EXPECT_NEAR(kernel_energy(build_if_generation(), t, 1.0), 13.2, 1e-9);
    EXPECT_NEAR(kernel_energy(build_if_generation(), t, 0.0), 12.1, 1e-9);
    EXPECT_NEAR(kernel_energy(build_sd_delta(), t, 0.0), 18.6, 1e-9);
    EXPECT_THROW(kernel_energy(build_sd_delta(), t, 1.5), ValidationError);
}

TEST(KernelEnergy, ScalesLinearlyWithTheTable)
{
    const auto t = EnergyTable::defaults();
    for (std::int64_t c : {2, 3, 7}) {
        const auto s = t.scaled(c);
        for (const auto &name : builtin_kernel_names()) {
            const auto k = kernel_by_name(name);
            for (double rate : {0.0, 0.5, 1.0}) {
                EXPECT_NEAR(kernel_energy(k, s, rate), static_cast<double>(c) * kernel_energy(k, t, rate), 1e-9);
            }
        }
    }
}

TEST(Ledger, FoldsAndTotals)
{
    EnergyLedger l;
    l.add("a.ADD", 3, pj("1.4"));
    l.add("a.ADD", 2, pj("1.4"));
    l.add("b.MLD", 1, pj("3.7"));
    l.add("c.none", 0, pj("9"));
    ASSERT_EQ(l.entries().size(), 2u);
    EXPECT_EQ(l.count_for("a.ADD"), 5u);
    EXPECT_EQ(format_pj(l.total()), "10.7");
    EXPECT_EQ(format_pj(l.total_for("a.")), "7");
}

TEST(Ledger, TotalIsIndependentOfOrder)
{
    std::mt19937_64 rng(8);
    std::vector<LedgerEntry> entries;
    for (int i = 0; i < 300; ++i) {
        entries.push_back({"k" + std::to_string(rng() % 20), rng() % 1000, Energy{static_cast<std::int64_t>(rng() % 1000000)}});
    }
    EnergyLedger a;
    for (const auto &e : entries) a.add(e);
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(entries.begin(), entries.end(), rng);
        EnergyLedger b;
        for (const auto &e : entries) b.add(e);
        ASSERT_EQ(a.total(), b.total());
        ASSERT_EQ(a.by_category(), b.by_category());
    }
}

TEST(Energy, FixedDecimalParsing)
{
    EXPECT_EQ(parse_fixed_decimal("12.7", 5, "x"), 1270000);
    EXPECT_EQ(parse_fixed_decimal(" 0.000005 ", 5, "x"), 1);
    EXPECT_EQ(parse_fixed_decimal("3", 2, "x"), 300);
    EXPECT_EQ(format_fixed_decimal(1270000, 5), "12.7");
    EXPECT_EQ(format_fixed_decimal(-5, 2), "-0.05");
}

} // namespace
} // namespace seneca
