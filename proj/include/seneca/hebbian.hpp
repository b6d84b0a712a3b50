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

// Unsupervised digit classification with Hebbian learning.
//
// Network: Poisson inputs -> relay IF layer (one-to-one) -> M output IF
// neurons. The relay-to-output block learns; outputs inhibit each other
// through a fixed recurrent block and inhibit the relays through a fixed
// feedback block. Each output neuron is labeled with the class it answered
// most strongly during training; a test image gets the class whose labeled
// neurons spike most on average.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "seneca/digits.hpp"
#include "seneca/energy.hpp"
#include "seneca/network.hpp"
#include "seneca/sim.hpp"

namespace seneca {

struct HebbianConfig {
    std::size_t hidden = 100;
    std::size_t steps = 100;
    std::size_t train_count = 300;
    std::size_t test_count = 300;
    std::uint64_t seed = 1;
    double w_max = 0.1;
    double eta = 1e-5;
    double beta = 0.9;
    double relay_threshold = 0.5;
    double output_threshold = 2.0;
    double lateral_weight = 0.02;
    double feedback_weight = 0.01;
    std::optional<double> clip_w_max;
    int lane_count = 8;
};

struct HebbianResult {
    std::size_t hidden = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    std::size_t train_steps = 0;
    /// Mean training-step energy (learning on), dynamic plus leakage.
    Energy energy_per_step{};
    SimOutcome outcome;
};

inline NetworkSpec build_hebbian_network(std::size_t inputs, const HebbianConfig &cfg)
{
    const std::size_t n = inputs;
    const std::size_t m = cfg.hidden;
    NetworkSpec spec;
    spec.name = "hebbian-digits";
    spec.layers = {{n, NeuronModel::input}, {n, NeuronModel::IF}, {m, NeuronModel::IF}};
    spec.learning = Learning::hebbian;
    spec.time_steps = cfg.steps;
    spec.seed = cfg.seed;
    spec.params.vth = bf16(cfg.output_threshold);
    spec.params.eta = bf16(cfg.eta);
    spec.params.beta = bf16(cfg.beta);
    spec.params.one_minus_beta = bf16(1.0 - spec.params.beta.to_double());
    spec.clip_w_max = cfg.clip_w_max;
    spec.lane_count = cfg.lane_count;

    Projection relay;
    relay.name = "relay";
    relay.from = 0;
    relay.to = 1;
    relay.connectivity = Connectivity::one_to_one;
    // Shared threshold: the relay gain sets the relay firing level.
    relay.weights = constant_weights(n, cfg.output_threshold / cfg.relay_threshold);
    spec.projections.push_back(relay);

    spec.projections.push_back(dense_projection("forward", 1, 2, ProjectionKind::forward,
            uniform_weights(n * m, 0.0, cfg.w_max, cfg.seed * 0x9E3779B97F4A7C15ULL + 1), true));

    std::vector<Value16> lateral(m * m, bf16(-cfg.lateral_weight));
    for (std::size_t i = 0; i < m; ++i) lateral[i * m + i] = kZero16;
    spec.projections.push_back(dense_projection("lateral", 2, 2, ProjectionKind::recurrent, std::move(lateral)));
    spec.projections.push_back(dense_projection("feedback", 2, 1, ProjectionKind::feedback,
            constant_weights(m * n, -cfg.feedback_weight)));

    // One 16-bit word per weight and state; grow past the default core
    // memory when the network needs it.
    const std::size_t words = 2 * n + 2 * m + 2 * (n + m) + n * m * 2 + m * m + n;
    spec.memory_bits = std::max(kDefaultCapacityBits, words * static_cast<std::size_t>(kWordBits));
    return spec;
}

/// Deterministic split: shuffled indices, first train_count for training,
/// the last test_count held out.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(
        std::size_t size, std::size_t train, std::size_t test, std::uint64_t seed)
{
    if (train + test > size) {
        throw ValidationError("dataset has " + std::to_string(size) + " samples, split needs " +
                std::to_string(train + test));
    }
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = size - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(idx[i], idx[j]);
    }
    std::vector<std::size_t> tr(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train));
    std::vector<std::size_t> te(idx.end() - static_cast<std::ptrdiff_t>(test), idx.end());
    return {tr, te};
}

/// Class whose labeled neurons have the highest mean spike count; -1 when
/// no output neuron fired.
inline int classify(const std::vector<std::uint64_t> &counts, const std::vector<int> &assigned)
{
    std::vector<double> sum(10, 0.0), members(10, 0.0);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        total += counts[i];
        if (assigned[i] < 0) continue;
        sum[static_cast<std::size_t>(assigned[i])] += static_cast<double>(counts[i]);
        members[static_cast<std::size_t>(assigned[i])] += 1.0;
    }
    if (total == 0) return -1;
    int best = -1;
    double best_score = -1.0;
    for (std::size_t c = 0; c < 10; ++c) {
        if (members[c] == 0.0) continue;
        const double score = sum[c] / members[c];
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(c);
        }
    }
    return best;
}

inline HebbianResult run_hebbian_training(const Dataset &data, const HebbianConfig &cfg,
        const EnergyTable &table = EnergyTable::defaults())
{
    if (data.features == 0) throw ValidationError("dataset has no features");
    NetworkSpec spec = build_hebbian_network(data.features, cfg);
    IfNetworkSim sim(spec, table);
    const std::size_t m = cfg.hidden;
    const auto [train, test] = split_dataset(data.size(), cfg.train_count, cfg.test_count, cfg.seed);

    // Class responses per output neuron, accumulated while training.
    std::vector<std::vector<double>> response(m, std::vector<double>(10, 0.0));
    std::vector<double> class_count(10, 0.0);
    std::uint64_t sample_seed = cfg.seed * 1000003ULL;
    for (std::size_t s : train) {
        const Sample &x = data.samples[s];
        sim.reset_state();
        sim.reset_spike_counts();
        sim.present(poisson_encode(x.pixels, cfg.steps, ++sample_seed), true);
        const auto &counts = sim.spike_counts(2);
        for (std::size_t i = 0; i < m; ++i) response[i][static_cast<std::size_t>(x.label)] += static_cast<double>(counts[i]);
        class_count[static_cast<std::size_t>(x.label)] += 1.0;
    }
    HebbianResult result;
    result.hidden = m;
    result.seed = cfg.seed;
    result.outcome = sim.outcome();
    result.train_steps = result.outcome.steps;
    result.energy_per_step = Energy{result.outcome.total().units / static_cast<std::int64_t>(std::max<std::size_t>(1, result.train_steps))};

    std::vector<int> assigned(m, -1);
    for (std::size_t i = 0; i < m; ++i) {
        double best = 0.0;
        for (std::size_t c = 0; c < 10; ++c) {
            if (class_count[c] == 0.0) continue;
            const double r = response[i][c] / class_count[c];
            if (r > best) {
                best = r;
                assigned[i] = static_cast<int>(c);
            }
        }
    }

    std::size_t correct = 0;
    for (std::size_t s : test) {
        const Sample &x = data.samples[s];
        sim.reset_state();
        sim.reset_spike_counts();
        sim.present(poisson_encode(x.pixels, cfg.steps, ++sample_seed), false);
        const auto &counts = sim.spike_counts(2);
        if (classify(counts, assigned) == x.label) ++correct;
    }
    result.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
    return result;
}

struct SweepPoint {
    std::size_t hidden = 0;
    Energy energy_per_step{}; // mean over seeds
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0; // population standard deviation over seeds
    std::vector<HebbianResult> runs;
};

/// Trains one network per (M, seed) on `jobs` worker threads; results come
/// back ordered by M, then seed.
inline std::vector<SweepPoint> hebbian_sweep(const Dataset &data, const HebbianConfig &base,
        const std::vector<std::size_t> &hidden, const std::vector<std::uint64_t> &seeds, unsigned jobs = 1,
        const EnergyTable &table = EnergyTable::defaults())
{
    if (hidden.empty() || seeds.empty()) throw ValidationError("sweep needs at least one M and one seed");
    const std::size_t total = hidden.size() * seeds.size();
    std::vector<HebbianResult> results(total);
    std::vector<std::exception_ptr> errors(total);
    std::size_t next = 0;
    std::mutex lock;
    const auto worker = [&] {
        for (;;) {
            std::size_t task = 0;
            {
                std::lock_guard<std::mutex> g(lock);
                if (next == total) return;
                task = next++;
            }
            HebbianConfig cfg = base;
            cfg.hidden = hidden[task / seeds.size()];
            cfg.seed = seeds[task % seeds.size()];
            try {
                results[task] = run_hebbian_training(data, cfg, table);
            } catch (...) {
                errors[task] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto &t : pool) t.join();
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::vector<SweepPoint> points;
    for (std::size_t h = 0; h < hidden.size(); ++h) {
        SweepPoint p;
        p.hidden = hidden[h];
        std::int64_t units = 0;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            HebbianResult &r = results[h * seeds.size() + s];
            units += r.energy_per_step.units;
            p.accuracy_mean += r.accuracy;
            p.runs.push_back(std::move(r));
        }
        const auto k = static_cast<double>(seeds.size());
        p.energy_per_step = Energy{units / static_cast<std::int64_t>(seeds.size())};
        p.accuracy_mean /= k;
        double var = 0.0;
        for (const auto &r : p.runs) var += (r.accuracy - p.accuracy_mean) * (r.accuracy - p.accuracy_mean);
        p.accuracy_std = std::sqrt(var / k);
        points.push_back(std::move(p));
    }
    return points;
}

} // namespace seneca
