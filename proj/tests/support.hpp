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

// Random toy networks and simulator-vs-oracle comparison shared by the unit
// and acceptance suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "seneca/reference.hpp"
#include "seneca/sim.hpp"

namespace seneca::testing {

inline std::size_t pick(std::mt19937_64 &rng, std::size_t lo, std::size_t hi)
{
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

inline double real_in(std::mt19937_64 &rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// One to three IF layers with optional lateral and feedback blocks; about a
/// third use a quantized or batched synaptic mode.
inline NetworkSpec random_if_network(std::uint64_t seed, bool hebbian)
{
    std::mt19937_64 rng(seed);
    NetworkSpec s;
    s.name = "toy-if";
    const std::size_t hidden_layers = pick(rng, 1, 2);
    s.layers.push_back({pick(rng, 2, 16), NeuronModel::input});
    for (std::size_t l = 0; l < hidden_layers; ++l) s.layers.push_back({pick(rng, 1, 16), NeuronModel::IF});
    s.time_steps = pick(rng, 10, 60);
    s.lane_count = static_cast<int>(pick(rng, 1, 8));
    s.params = KernelParams::from_reals(real_in(rng, 0.5, 2.0), 1.0, real_in(rng, 0.001, 0.05),
            real_in(rng, 0.5, 0.95), 1.0);
    double w_lo = -0.2, w_hi = 1.0;
    if (hebbian) {
        // Plastic weights start in [0, w_max]; learning rates span 1e-4 to 1e-2.
        s.learning = Learning::hebbian;
        s.params.eta = bf16(std::pow(10.0, real_in(rng, -4.0, -2.0)));
        w_lo = 0.0;
        w_hi = real_in(rng, 0.2, 1.0);
        if (rng() % 2 == 0) s.clip_w_max = w_hi;
    } else if (rng() % 3 == 0) {
        const WeightMode modes[] = {WeightMode::bf16, WeightMode::int8, WeightMode::int4};
        s.synop = SynOpConfig::make(modes[rng() % 3], rng() % 2 == 0 ? 1 : 4);
        if (s.synop.weight_mode != WeightMode::bf16) s.synop.weight_scale = bf16(0.0625);
    }
    for (std::size_t l = 1; l < s.layers.size(); ++l) {
        const std::size_t n_from = s.layers[l - 1].size;
        const std::size_t n_to = s.layers[l].size;
        s.projections.push_back(dense_projection("f" + std::to_string(l), l - 1, l, ProjectionKind::forward,
                uniform_weights(n_from * n_to, w_lo, w_hi, rng()), hebbian));
    }
    if (rng() % 2 == 0) {
        const std::size_t l = pick(rng, 1, s.layers.size() - 1);
        const std::size_t n = s.layers[l].size;
        s.projections.push_back(dense_projection("r" + std::to_string(l), l, l, ProjectionKind::recurrent,
                uniform_weights(n * n, -0.5, 0.1, rng())));
    }
    if (s.layers.size() > 2 && rng() % 2 == 0) {
        const std::size_t n_from = s.layers[2].size;
        const std::size_t n_to = s.layers[1].size;
        s.projections.push_back(dense_projection("b", 2, 1, ProjectionKind::feedback,
                uniform_weights(n_from * n_to, -0.3, 0.3, rng())));
    }
    s.validate();
    return s;
}

inline SpikeTrain random_spikes(std::uint64_t seed, std::size_t n, std::size_t steps)
{
    std::mt19937_64 rng(seed);
    std::vector<double> rate(n);
    for (auto &r : rate) r = real_in(rng, 0.0, 0.6);
    return poisson_encode(rate, steps, rng());
}

inline NetworkSpec random_sd_network(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    NetworkSpec s;
    s.name = "toy-sd";
    s.layers.push_back({pick(rng, 2, 16), NeuronModel::input});
    const std::size_t hidden = pick(rng, 1, 3);
    for (std::size_t l = 0; l < hidden; ++l) s.layers.push_back({pick(rng, 1, 16), NeuronModel::SD});
    s.lane_count = static_cast<int>(pick(rng, 1, 8));
    const double qs[] = {0.0625, 0.125, 0.25, 0.5};
    s.params = KernelParams::from_reals(1.0, qs[rng() % 4], 0.01, 0.9, 1.0);
    for (std::size_t l = 1; l < s.layers.size(); ++l) {
        s.projections.push_back(dense_projection("f" + std::to_string(l), l - 1, l, ProjectionKind::forward,
                uniform_weights(s.layers[l - 1].size * s.layers[l].size, -0.5, 0.75, rng())));
    }
    s.validate();
    return s;
}

/// Frames on a coarse grid so that repeated values and zero deltas occur.
inline FrameSequence random_frames(std::uint64_t seed, std::size_t n, std::size_t frames)
{
    std::mt19937_64 rng(seed);
    FrameSequence out;
    std::vector<double> cur(n, 0.0);
    for (std::size_t f = 0; f < frames; ++f) {
        for (auto &x : cur) {
            if (rng() % 3 == 0) x = static_cast<double>(rng() % 9) * 0.125;
        }
        out.push_back(cur);
    }
    return out;
}

inline NetworkSpec random_eprop_network(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    NetworkSpec s;
    s.name = "toy-eprop";
    s.learning = Learning::eprop;
    const std::size_t n = pick(rng, 2, 12);
    const std::size_t m = pick(rng, 1, 12);
    s.layers = {{n, NeuronModel::input}, {m, NeuronModel::IF}};
    s.lane_count = static_cast<int>(pick(rng, 1, 8));
    s.params = KernelParams::from_reals(real_in(rng, 0.5, 1.5), 1.0, real_in(rng, 0.001, 0.05),
            real_in(rng, 0.6, 0.95), real_in(rng, 0.5, 2.0));
    s.projections.push_back(dense_projection("in", 0, 1, ProjectionKind::forward,
            uniform_weights(n * m, 0.0, 0.6, rng()), true));
    s.error_channels = pick(rng, 1, 3);
    s.error_feedback = uniform_weights(s.error_channels * m, -1.0, 1.0, rng());
    s.time_steps = pick(rng, 10, 40);
    s.validate();
    return s;
}

inline LabeledStream random_labeled_stream(std::uint64_t seed, const NetworkSpec &spec)
{
    std::mt19937_64 rng(seed);
    LabeledStream st;
    st.spikes = random_spikes(rng(), spec.input_size(), spec.time_steps);
    for (std::size_t k = 0; k < spec.time_steps; ++k) {
        std::vector<double> e;
        if (rng() % 3 == 0) {
            for (std::size_t c = 0; c < spec.error_channels; ++c) {
                e.push_back(rng() % 4 == 0 ? 0.0 : real_in(rng, -1.0, 1.0));
            }
        }
        st.errors.push_back(std::move(e));
    }
    return st;
}

// ---------------------------------------------------------------------------

struct Comparison {
    bool bit_identical = true;
    std::string first_mismatch;
    /// Largest |bf16 - wide| over the allowed bound; <= 1 passes.
    double worst_drift_ratio = 0.0;
    /// Largest |bf16 - wide| / running magnitude, per 10-step block.
    double worst_relative_per_block = 0.0;
};

/// Compares simulator snapshots against the BF16 oracle bit patterns.
inline void compare_bits(const std::vector<StateSnapshot> &sim, const reference::Trajectory &ref, Comparison &c)
{
    if (sim.size() != ref.bits.size()) {
        c.bit_identical = false;
        c.first_mismatch = "step count " + std::to_string(sim.size()) + " vs " + std::to_string(ref.bits.size());
        return;
    }
    for (std::size_t k = 0; k < sim.size() && c.bit_identical; ++k) {
        for (const auto &[name, bits] : ref.bits[k]) {
            auto it = sim[k].find(name);
            if (it == sim[k].end()) {
                c.bit_identical = false;
                c.first_mismatch = "step " + std::to_string(k) + ": simulator lacks " + name;
                return;
            }
            for (std::size_t i = 0; i < bits.size(); ++i) {
                if (i >= it->second.size() || it->second[i].bits != bits[i]) {
                    c.bit_identical = false;
                    c.first_mismatch = "step " + std::to_string(k) + ": " + name + "[" + std::to_string(i) + "]";
                    return;
                }
            }
        }
    }
}

/// Drift of the BF16 trajectory from the wide-precision one run on the same
/// discrete decisions. Errors are relative to each array's largest wide
/// magnitude over the run.
inline void compare_drift(const reference::Trajectory &narrow, const reference::Trajectory &wide, Comparison &c)
{
    std::map<std::string, double> magnitude;
    for (const auto &step : wide.steps) {
        for (const auto &[name, w] : step) {
            double &mag = magnitude[name];
            for (double x : w) mag = std::max(mag, std::abs(x));
        }
    }
    for (std::size_t k = 0; k < narrow.steps.size() && k < wide.steps.size(); ++k) {
        const double blocks = std::ceil(static_cast<double>(k + 1) / 10.0);
        for (const auto &[name, w] : wide.steps[k]) {
            const double mag = magnitude[name];
            if (mag == 0.0) continue;
            const auto &b = narrow.steps[k].at(name);
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double err = std::abs(b[i] - w[i]);
                c.worst_drift_ratio = std::max(c.worst_drift_ratio, err / reference::drift_bound(k, mag));
                c.worst_relative_per_block = std::max(c.worst_relative_per_block, err / mag / blocks);
            }
        }
    }
}

inline Comparison check_if(const NetworkSpec &spec, const SpikeTrain &input)
{
    const bool learn = spec.learning == Learning::hebbian;
    IfNetworkSim sim(spec, EnergyTable::defaults(), SimOptions{true, nullptr});
    sim.present(input, learn);
    const SimOutcome out = sim.outcome();
    const auto narrow = reference::run_if<reference::Bf16Arith>(spec, input, learn);
    const auto wide = reference::run_if<reference::WideArith>(spec, input, learn, &narrow.decisions);
    Comparison c;
    compare_bits(out.trajectory, narrow, c);
    compare_drift(narrow, wide, c);
    return c;
}

inline Comparison check_sd(const NetworkSpec &spec, const FrameSequence &frames)
{
    const SimOutcome out = run_sd_network(spec, frames, EnergyTable::defaults(), SimOptions{true, nullptr});
    const auto narrow = reference::run_sd<reference::Bf16Arith>(spec, frames);
    const auto wide = reference::run_sd<reference::WideArith>(spec, frames, &narrow.decisions);
    Comparison c;
    compare_bits(out.trajectory, narrow, c);
    compare_drift(narrow, wide, c);
    return c;
}

inline Comparison check_eprop(const NetworkSpec &spec, const LabeledStream &stream)
{
    const SimOutcome out = run_eprop(spec, stream, EnergyTable::defaults(), SimOptions{true, nullptr});
    const auto narrow = reference::run_eprop<reference::Bf16Arith>(spec, stream.spikes, stream.errors);
    const auto wide = reference::run_eprop<reference::WideArith>(spec, stream.spikes, stream.errors,
            &narrow.decisions);
    Comparison c;
    compare_bits(out.trajectory, narrow, c);
    compare_drift(narrow, wide, c);
    return c;
}

} // namespace seneca::testing
