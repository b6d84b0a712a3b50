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


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "seneca/reference.hpp"
#include "seneca/sim.hpp"
#include "support.hpp"

namespace seneca {
namespace {

using testing::pick;
using testing::random_spikes;

const EnergyTable kTable = EnergyTable::defaults();

NetworkSpec two_layer_if(std::size_t n, std::size_t m, std::size_t steps, std::uint64_t seed)
{
    NetworkSpec s;
    s.layers = {{n, NeuronModel::input}, {m, NeuronModel::IF}};
    s.time_steps = steps;
    s.projections.push_back(dense_projection("in", 0, 1, ProjectionKind::forward, uniform_weights(n * m, 0.0, 0.5, seed)));
    return s;
}

std::uint64_t total_events(const SpikeTrain &t)
{
    std::uint64_t n = 0;
    for (const auto &s : t) n += s.size();
    return n;
}

std::uint64_t cycles_for(std::size_t kernel_size, std::size_t iterations, int lanes)
{
    return kernel_size * ((iterations + static_cast<std::size_t>(lanes) - 1) / static_cast<std::size_t>(lanes));
}

TEST(IfSim, IterationCountsHaveClosedForms)
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = pick(rng, 1, 20), m = pick(rng, 1, 20), steps = pick(rng, 1, 30);
        const auto spec = two_layer_if(n, m, steps, rng());
        const auto input = random_spikes(rng(), n, steps);
        const auto out = run_if_network(spec, input);
        const std::uint64_t events = total_events(input);
        EXPECT_EQ(out.kernels.count("if_integration") ? out.kernels.at("if_integration").iterations : 0, events * m);
        EXPECT_EQ(out.kernels.at("if_generation").iterations, m * steps);
        EXPECT_EQ(out.kernels.at("if_generation").invocations, steps);
        EXPECT_EQ(out.layer_events[0], events);
        EXPECT_EQ(out.steps, steps);
    }
}

TEST(IfSim, SilentInputCostsOnlyGeneration)
{
    for (std::size_t m : {1u, 7u, 8u, 30u}) {
        const std::size_t steps = 5;
        const auto spec = two_layer_if(4, m, steps, 3);
        const auto out = run_if_network(spec, SpikeTrain(steps));
        const double dynamic = static_cast<double>(m * steps) * 12.1;
        const double leak = static_cast<double>(steps * cycles_for(6, m, 8)) * 0.06;
        EXPECT_NEAR(out.dynamic.pj(), dynamic, 1e-6);
        EXPECT_NEAR(out.leakage.pj(), leak, 1e-6);
        EXPECT_EQ(out.ledger.total(), out.total());
        EXPECT_EQ(out.layer_events[1], 0u);
    }
}

TEST(IfSim, LateralSpikesArriveOneStepLater)
{
    NetworkSpec s = two_layer_if(1, 2, 3, 1);
    s.projections[0].weights = {bf16(1.5), bf16(0.0)};
    s.projections.push_back(dense_projection("lat", 1, 1, ProjectionKind::recurrent,
            {kZero16, bf16(1.5), kZero16, kZero16}));
    const auto out = run_if_network(s, SpikeTrain{{0}, {}, {}});
    ASSERT_EQ(out.output_events.size(), 3u);
    ASSERT_EQ(out.output_events[0].size(), 1u);
    EXPECT_EQ(out.output_events[0][0].source, 0u);
    ASSERT_EQ(out.output_events[1].size(), 1u);
    EXPECT_EQ(out.output_events[1][0].source, 1u);
    EXPECT_TRUE(out.output_events[2].empty());
}

NetworkSpec hebbian_toy(std::size_t n, std::size_t m, std::size_t steps, double eta)
{
    NetworkSpec s = two_layer_if(n, m, steps, 5);
    s.learning = Learning::hebbian;
    s.projections[0].plastic = true;
    s.params.eta = bf16(eta);
    return s;
}

TEST(HebbianSim, UpdatesEverySynapseEveryStep)
{
    const std::size_t n = 6, m = 5, steps = 9;
    const auto s = hebbian_toy(n, m, steps, 0.01);
    const auto out = run_if_network(s, random_spikes(4, n, steps));
    EXPECT_EQ(out.kernels.at("hebbian_weight").iterations, n * m * steps);
    EXPECT_EQ(out.kernels.at("trace_update").iterations, (n + m) * steps);
}

TEST(HebbianSim, ZeroRateLeavesWeightsUnchanged)
{
    const auto s = hebbian_toy(6, 5, 20, 0.0);
    IfNetworkSim sim(s, kTable);
    sim.present(random_spikes(9, 6, 20));
    EXPECT_EQ(sim.weights("in"), s.projections[0].weights);
}

TEST(HebbianSim, ClipKeepsWeightsInRange)
{
    auto s = hebbian_toy(6, 5, 30, 0.5);
    s.clip_w_max = 0.3;
    IfNetworkSim sim(s, kTable);
    sim.present(random_spikes(9, 6, 30));
    for (const auto &w : sim.weights("in")) {
        EXPECT_GE(w.to_double(), 0.0);
        EXPECT_LE(w.to_double(), bf16(0.3).to_double());
    }
}

TEST(IfSim, RejectsBadSpikesAndLayers)
{
    IfNetworkSim sim(two_layer_if(3, 2, 1, 1), kTable);
    EXPECT_THROW(sim.step({3}), ValidationError);
    EXPECT_THROW(sim.step({1, 0}), ValidationError);
    NetworkSpec sd = two_layer_if(3, 2, 1, 1);
    sd.layers[1].model = NeuronModel::SD;
    EXPECT_THROW(IfNetworkSim(sd, kTable), ValidationError);
}

TEST(Poisson, RatesAndEdges)
{
    const std::vector<double> half(100, 0.5);
    const auto t = poisson_encode(half, 400, 1);
    const double mean = static_cast<double>(total_events(t)) / (100.0 * 400.0);
    EXPECT_NEAR(mean, 0.5, 0.02);
    const std::vector<double> edges = {0.0, 1.0};
    for (const auto &s : poisson_encode(edges, 50, 2)) EXPECT_EQ(s, (std::vector<std::uint32_t>{1}));
    const std::vector<double> bad = {1.5};
    EXPECT_THROW(poisson_encode(bad, 1, 1), ValidationError);
    EXPECT_EQ(poisson_encode(half, 10, 3), poisson_encode(half, 10, 3));
}

TEST(IfSim, Deterministic)
{
    const auto spec = testing::random_if_network(77, true);
    const auto input = random_spikes(78, spec.input_size(), spec.time_steps);
    const auto a = run_if_network(spec, input);
    const auto b = run_if_network(spec, input);
    EXPECT_EQ(a.final_state, b.final_state);
    EXPECT_EQ(a.ledger.entries(), b.ledger.entries());
    EXPECT_EQ(a.ledger.total(), a.total());
}

// ---------------------------------------------------------------------------

TEST(EpropSim, EnergyFollowsPerStepFormula)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto spec = testing::random_eprop_network(rng());
        const auto stream = testing::random_labeled_stream(rng(), spec);
        const auto out = run_eprop(spec, stream);
        const auto n = static_cast<double>(spec.layers[0].size);
        const auto m = static_cast<double>(spec.layers[1].size);
        double pj = 0.0;
        std::uint64_t supervised = 0;
        for (std::size_t k = 0; k < stream.spikes.size(); ++k) {
            pj += n * 15.5 + static_cast<double>(stream.spikes[k].size()) * m * 12.7 + m * n * 22.9 + m * 12.1;
            if (!stream.errors[k].empty()) {
                ++supervised;
                pj += m * n * 19.2;
                for (double y : stream.errors[k]) {
                    if (!bf16(y).is_zero()) pj += m * 14.1;
                }
            }
        }
        pj += static_cast<double>(out.layer_events[1]) * 1.1;
        EXPECT_NEAR(out.dynamic.pj(), pj, 1e-6);
        EXPECT_EQ(out.kernels.count("eprop_weight") ? out.kernels.at("eprop_weight").iterations : 0,
                static_cast<std::uint64_t>(n * m) * supervised);
    }
}

TEST(EpropSim, ZeroErrorsLeaveWeightsUnchanged)
{
    const auto spec = testing::random_eprop_network(5);
    auto stream = testing::random_labeled_stream(6, spec);
    for (auto &e : stream.errors) std::fill(e.begin(), e.end(), 0.0);
    const auto out = run_eprop(spec, stream);
    EXPECT_EQ(out.final_state.at("w:in"), spec.projections[0].weights);
}

// ---------------------------------------------------------------------------

// Weights and inputs on a 1/4 grid keep every partial sum exact in BF16.
NetworkSpec grid_sd_network(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    NetworkSpec s;
    s.layers.push_back({pick(rng, 1, 4), NeuronModel::input});
    const std::size_t hidden = pick(rng, 1, 2);
    for (std::size_t l = 0; l < hidden; ++l) s.layers.push_back({pick(rng, 1, 4), NeuronModel::SD});
    s.params = KernelParams::from_reals(1.0, 0.25, 0.01, 0.9, 1.0);
    s.lane_count = static_cast<int>(pick(rng, 1, 8));
    for (std::size_t l = 1; l < s.layers.size(); ++l) {
        std::vector<Value16> w(s.layers[l - 1].size * s.layers[l].size);
        for (auto &x : w) x = bf16(static_cast<double>(static_cast<int>(rng() % 5) - 2) * 0.25);
        s.projections.push_back(dense_projection("f" + std::to_string(l), l - 1, l, ProjectionKind::forward, w));
    }
    return s;
}

FrameSequence grid_frames(std::uint64_t seed, std::size_t n, std::size_t count)
{
    std::mt19937_64 rng(seed);
    FrameSequence f(count, std::vector<double>(n));
    for (auto &frame : f) {
        for (auto &x : frame) x = static_cast<double>(rng() % 5) * 0.25;
    }
    return f;
}

TEST(SdSim, MatchesDenseQuantizedNetworkOnExactGrids)
{
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto spec = grid_sd_network(seed);
        const auto frames = grid_frames(seed + 1000, spec.input_size(), 12);
        const auto out = run_sd_network(spec, frames);
        const auto dense = reference::dense_quantized_dnn(spec, frames);
        ASSERT_EQ(out.output_activations.size(), dense.size());
        for (std::size_t f = 0; f < dense.size(); ++f) {
            for (std::size_t i = 0; i < dense[f].size(); ++i) {
                ASSERT_EQ(out.output_activations[f][i].to_double(), dense[f][i]) << seed << ' ' << f << ' ' << i;
            }
        }
    }
}

TEST(SdSim, RepeatedFramesSendNoEvents)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto spec = testing::random_sd_network(seed);
        const auto first = testing::random_frames(seed, spec.input_size(), 1);
        const FrameSequence repeated(6, first[0]);
        const auto once = run_sd_network(spec, first);
        const auto many = run_sd_network(spec, repeated);
        EXPECT_EQ(many.layer_events, once.layer_events);
        const auto sigma = [](const SimOutcome &o) {
            return o.kernels.count("sd_sigma") ? o.kernels.at("sd_sigma").iterations : 0;
        };
        EXPECT_EQ(sigma(many), sigma(once));
    }
}

TEST(SdSim, CoarserQuantizationSendsFewerEvents)
{
    NetworkSpec base = testing::random_sd_network(3);
    FrameSequence frames;
    for (int f = 0; f < 40; ++f) {
        std::vector<double> x(base.input_size());
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = 0.5 + 0.5 * std::sin(0.15 * f + 0.7 * static_cast<double>(j));
        frames.push_back(x);
    }
    std::uint64_t previous = UINT64_MAX;
    for (double q : {0.0625, 0.125, 0.25, 0.5, 1.0}) {
        NetworkSpec s = base;
        s.params.q = bf16(q);
        const auto out = run_sd_network(s, frames);
        std::uint64_t events = 0;
        for (std::size_t l = 1; l < out.layer_events.size(); ++l) events += out.layer_events[l];
        EXPECT_LE(events, previous) << q;
        previous = events;
    }
}

TEST(SdSim, DeltaEveryControlsEvaluations)
{
    auto spec = testing::random_sd_network(8);
    const auto frames = testing::random_frames(8, spec.input_size(), 12);
    spec.delta_every = 3;
    const auto out = run_sd_network(spec, frames);
    std::size_t neurons = 0;
    for (std::size_t l = 1; l < spec.layers.size(); ++l) neurons += spec.layers[l].size;
    EXPECT_EQ(out.kernels.at("sd_delta").iterations, neurons * 4);
    EXPECT_EQ(out.output_activations.size(), 4u);
}

} // namespace
} // namespace seneca
