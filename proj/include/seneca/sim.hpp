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

// Network-level simulation on one core: every neuron and learning update is
// a loop of a micro-kernel on the NPE array. Event routing, spike-flag
// buffers and error-sum resets are host work and carry no modeled energy.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seneca/bf16.hpp"
#include "seneca/energy.hpp"
#include "seneca/engine.hpp"
#include "seneca/errors.hpp"
#include "seneca/kernels.hpp"
#include "seneca/memory.hpp"
#include "seneca/network.hpp"

namespace seneca {

/// Spike indices per time step, ascending.
using SpikeTrain = std::vector<std::vector<std::uint32_t>>;
/// Dense input frames for sigma-delta networks.
using FrameSequence = std::vector<std::vector<double>>;
/// Named state arrays.
using StateSnapshot = std::map<std::string, std::vector<Value16>>;

/// Rate coding: at every step, input j spikes when a uniform draw in [0, 1)
/// falls below its intensity.
inline SpikeTrain poisson_encode(std::span<const double> intensities, std::size_t steps, std::uint64_t seed)
{
    for (double p : intensities) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("spike probabilities must lie in [0, 1]");
    }
    std::mt19937_64 rng(seed);
    SpikeTrain train(steps);
    for (auto &step : train) {
        for (std::size_t j = 0; j < intensities.size(); ++j) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (u < intensities[j]) step.push_back(static_cast<std::uint32_t>(j));
        }
    }
    return train;
}

struct SimOptions {
    bool record_trajectory = false;
    std::ostream *trace = nullptr;
};

struct KernelUsage {
    std::uint64_t invocations = 0;
    std::uint64_t iterations = 0;
    ExecCounts counts;
    Energy dynamic{};
    Energy leakage{};

    Energy total() const { return dynamic + leakage; }
};

struct SimOutcome {
    std::size_t steps = 0;
    /// Events of the last layer, per step.
    std::vector<std::vector<AerEvent>> output_events;
    /// Sigma-delta: quantized activations of the last layer per evaluated frame.
    std::vector<std::vector<Value16>> output_activations;
    /// Events emitted per layer over the run; entry 0 counts input events.
    std::vector<std::uint64_t> layer_events;
    std::map<std::string, KernelUsage> kernels;
    ExecCounts counts;
    Energy dynamic{};
    Energy leakage{};
    EnergyLedger ledger;
    AccessStats mem_stats;
    StateSnapshot final_state;
    std::vector<StateSnapshot> trajectory;

    Energy total() const { return dynamic + leakage; }

    Energy kernel_dynamic(const std::string &name) const
    {
        auto it = kernels.find(name);
        return it == kernels.end() ? Energy{} : it->second.dynamic;
    }
};

/// One core's data memory and NPE array, with per-kernel bookkeeping.
class Core {
public:
    Core(const EnergyTable &table, int lane_count, std::size_t capacity_bits, MemoryLevel level,
            std::ostream *trace = nullptr)
            : table_(table)
            , mem_(capacity_bits, level)
            , npe_(lane_count)
            , trace_(trace)
    {
    }

    std::size_t allocate(const std::string &name, std::size_t words)
    {
        if (next_ + words > mem_.capacity_words()) {
            throw ValidationError("'" + name + "' does not fit: core memory holds " +
                    std::to_string(mem_.capacity_words()) + " words, " + std::to_string(next_) +
                    " already used, " + std::to_string(words) + " requested");
        }
        const std::size_t base = next_;
        next_ += words;
        return base;
    }

    void store(std::size_t base, std::span<const Value16> values)
    {
        for (std::size_t i = 0; i < values.size(); ++i) mem_.poke_value(base + i, values[i]);
    }
    void store_raw(std::size_t base, std::span<const std::uint16_t> words)
    {
        for (std::size_t i = 0; i < words.size(); ++i) mem_.poke(base + i, words[i]);
    }
    void fill(std::size_t base, std::size_t n, Value16 v)
    {
        for (std::size_t i = 0; i < n; ++i) mem_.poke_value(base + i, v);
    }
    std::vector<Value16> load(std::size_t base, std::size_t n) const
    {
        std::vector<Value16> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = mem_.peek_value(base + i);
        return out;
    }
    Value16 load_one(std::size_t addr) const { return mem_.peek_value(addr); }

    std::vector<AerEvent> run(const MicroKernel &kernel, LoopPlan plan)
    {
        plan.kernel = &kernel;
        RunOptions opt;
        opt.build_ledger = false;
        opt.trace = trace_;
        RunResult r = run_loop(plan, mem_, npe_, table_, opt);
        KernelUsage &u = usage_[kernel.name];
        ++u.invocations;
        u.iterations += plan.iterations;
        u.counts += r.counts;
        return std::move(r.events);
    }

    void finish(SimOutcome &out) const
    {
        out.kernels = usage_;
        out.counts = {};
        out.ledger = {};
        for (auto &[name, u] : out.kernels) {
            u.dynamic = u.counts.dynamic_energy(table_);
            u.leakage = u.counts.leakage(table_);
            out.counts += u.counts;
            u.counts.charge(out.ledger, table_, name);
        }
        out.dynamic = out.counts.dynamic_energy(table_);
        out.leakage = out.counts.leakage(table_);
        out.mem_stats = mem_.stats();
    }

    const EnergyTable &table() const noexcept { return table_; }
    DataMemory &memory() noexcept { return mem_; }

private:
    const EnergyTable &table_;
    DataMemory mem_;
    NpeArray npe_;
    std::ostream *trace_;
    std::size_t next_ = 0;
    std::map<std::string, KernelUsage> usage_;
};

namespace detail {

inline std::vector<std::uint32_t> event_sources(const std::vector<AerEvent> &events)
{
    std::vector<std::uint32_t> out;
    out.reserve(events.size());
    for (const auto &e : events) out.push_back(static_cast<std::uint32_t>(e.source));
    return out;
}

inline void check_spikes(const std::vector<std::uint32_t> &spikes, std::size_t n, std::size_t step)
{
    for (std::size_t i = 0; i < spikes.size(); ++i) {
        if (spikes[i] >= n) {
            throw ValidationError("input spike " + std::to_string(spikes[i]) + " at step " +
                    std::to_string(step) + " outside input layer of " + std::to_string(n));
        }
        if (i > 0 && spikes[i] <= spikes[i - 1]) {
            throw ValidationError("input spikes at step " + std::to_string(step) +
                    " must be strictly ascending");
        }
    }
}

inline bool is_default_synop(const SynOpConfig &c)
{
    return c.weight_mode == WeightMode::bf16 && c.events_per_iteration == 1 && !c.weight_scale;
}

} // namespace detail

/// Integrate-and-fire network with optional Hebbian learning. Per step:
/// every neuron layer integrates delayed (recurrent, feedback) events from
/// the previous step, then same-step forward events, then fires. With
/// learning on, traces of the layers touching a plastic projection are
/// updated next, then the plastic weights.
class IfNetworkSim {
public:
    IfNetworkSim(NetworkSpec spec, const EnergyTable &table, SimOptions options = {})
            : spec_(std::move(spec))
            , options_(options)
            , core_(table, spec_.lane_count, spec_.memory_bits, spec_.memory_level, options.trace)
    {
        spec_.validate();
        if (spec_.learning == Learning::eprop) throw ValidationError("use run_eprop for e-prop networks");
        for (std::size_t l = 1; l < spec_.layers.size(); ++l) {
            if (spec_.layers[l].model != NeuronModel::IF) {
                throw ValidationError("IF simulation needs IF neuron layers");
            }
        }
        for (const auto &p : spec_.projections) {
            if (p.connectivity == Connectivity::conv) {
                throw ValidationError("projection '" + p.name + "': conv connectivity is only used for operation counting");
            }
        }
        if (spec_.learning == Learning::hebbian &&
                std::none_of(spec_.projections.begin(), spec_.projections.end(),
                        [](const Projection &p) { return p.plastic; })) {
            throw ValidationError("Hebbian learning needs at least one plastic projection");
        }

        integration_ = build_if_integration();
        generation_ = build_if_generation();
        trace_kernel_ = build_trace_update();
        hebbian_ = build_hebbian_weight();
        use_synop_ = !detail::is_default_synop(spec_.synop);
        if (use_synop_) {
            SynOpConfig one = spec_.synop;
            one.events_per_iteration = 1;
            synop1_ = build_synop(one);
            if (spec_.synop.events_per_iteration > 1) synop_batch_ = build_synop(spec_.synop);
        }

        const std::size_t layers = spec_.layers.size();
        v_base_.assign(layers, 0);
        trace_base_.assign(layers, 0);
        flag_base_.assign(layers, 0);
        traced_.assign(layers, false);
        for (std::size_t l = 1; l < layers; ++l) {
            v_base_[l] = core_.allocate("v" + std::to_string(l), spec_.layers[l].size);
        }
        if (spec_.learning == Learning::hebbian) {
            for (const auto &p : spec_.projections) {
                if (p.plastic) traced_[p.from] = traced_[p.to] = true;
            }
            for (std::size_t l = 0; l < layers; ++l) {
                if (!traced_[l]) continue;
                trace_base_[l] = core_.allocate("trace" + std::to_string(l), spec_.layers[l].size);
                flag_base_[l] = core_.allocate("spikes" + std::to_string(l), spec_.layers[l].size);
            }
        }
        for (const auto &p : spec_.projections) {
            Placed pl;
            pl.synop = use_synop_ && !p.plastic && p.connectivity == Connectivity::dense;
            // BF16 weights stay one per word; only integer modes pack.
            pl.packed = pl.synop && spec_.synop.weight_mode != WeightMode::bf16;
            if (pl.packed) {
                const PackMode mode = spec_.synop.weight_mode == WeightMode::int8 ? PackMode::int8x2
                                                                                  : PackMode::int4x4;
                std::vector<double> real(p.weights.size());
                for (std::size_t i = 0; i < real.size(); ++i) real[i] = p.weights[i].to_double();
                const double scale = spec_.synop.weight_scale ? spec_.synop.weight_scale->to_double() : 1.0;
                const auto ints = quantize(real, mode, scale);
                const auto words = pack_lanes(ints, mode);
                pl.base = core_.allocate("w:" + p.name, words.size());
                core_.store_raw(pl.base, words);
                pl.base *= static_cast<std::size_t>(lane_count(mode)); // cursor in lanes
            } else {
                pl.base = core_.allocate("w:" + p.name, p.weights.size());
                core_.store(pl.base, p.weights);
            }
            placed_.push_back(pl);
        }
        previous_.assign(layers, {});
        current_.assign(layers, {});
        outcome_.layer_events.assign(layers, 0);
        spike_counts_.assign(layers, {});
        for (std::size_t l = 0; l < layers; ++l) spike_counts_[l].assign(spec_.layers[l].size, 0);
    }

    /// Runs one step per entry of `input`.
    void present(const SpikeTrain &input, bool learn = true)
    {
        for (const auto &spikes : input) step(spikes, learn);
    }

    void step(const std::vector<std::uint32_t> &input_spikes, bool learn = true)
    {
        detail::check_spikes(input_spikes, spec_.input_size(), outcome_.steps);
        const std::size_t layers = spec_.layers.size();
        current_[0] = input_spikes;
        for (std::size_t l = 1; l < layers; ++l) {
            for (std::size_t p = 0; p < spec_.projections.size(); ++p) {
                const auto &proj = spec_.projections[p];
                if (proj.to == l && proj.kind != ProjectionKind::forward) integrate(p, previous_[proj.from]);
            }
            for (std::size_t p = 0; p < spec_.projections.size(); ++p) {
                const auto &proj = spec_.projections[p];
                if (proj.to == l && proj.kind == ProjectionKind::forward) integrate(p, current_[proj.from]);
            }
            LoopPlan plan;
            plan.iterations = spec_.layers[l].size;
            plan.bind(1, v_base_[l]);
            plan.constant(1, spec_.params.vth);
            current_[l] = detail::event_sources(core_.run(generation_, plan));
        }

        if (learn && spec_.learning == Learning::hebbian) {
            for (std::size_t l = 0; l < layers; ++l) {
                if (traced_[l]) update_trace(l);
            }
            for (std::size_t p = 0; p < spec_.projections.size(); ++p) {
                if (spec_.projections[p].plastic) hebbian_update(p);
            }
        }

        for (std::size_t l = 0; l < layers; ++l) {
            outcome_.layer_events[l] += current_[l].size();
            for (auto s : current_[l]) ++spike_counts_[l][s];
        }
        std::vector<AerEvent> out;
        for (auto s : current_.back()) out.push_back(AerEvent{s, kOne16});
        outcome_.output_events.push_back(std::move(out));
        ++outcome_.steps;
        if (options_.record_trajectory) outcome_.trajectory.push_back(snapshot());
        std::swap(previous_, current_);
    }

    /// Clears membrane states, traces and in-flight delayed events; weights
    /// and spike counters are kept.
    void reset_state()
    {
        for (std::size_t l = 1; l < spec_.layers.size(); ++l) {
            core_.fill(v_base_[l], spec_.layers[l].size, kZero16);
        }
        for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
            if (!traced_[l]) continue;
            core_.fill(trace_base_[l], spec_.layers[l].size, kZero16);
        }
        for (auto &v : previous_) v.clear();
    }

    void reset_spike_counts()
    {
        for (auto &c : spike_counts_) std::fill(c.begin(), c.end(), 0);
    }
    const std::vector<std::uint64_t> &spike_counts(std::size_t layer) const { return spike_counts_.at(layer); }

    std::vector<Value16> weights(const std::string &projection) const
    {
        const std::size_t p = spec_.projection_index(projection);
        if (placed_[p].packed) throw ValidationError("projection '" + projection + "' holds packed integer weights");
        return core_.load(placed_[p].base, spec_.projections[p].weights.size());
    }

    StateSnapshot snapshot() const
    {
        StateSnapshot s;
        for (std::size_t l = 1; l < spec_.layers.size(); ++l) {
            s["v" + std::to_string(l)] = core_.load(v_base_[l], spec_.layers[l].size);
        }
        for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
            if (traced_[l]) s["trace" + std::to_string(l)] = core_.load(trace_base_[l], spec_.layers[l].size);
        }
        for (std::size_t p = 0; p < spec_.projections.size(); ++p) {
            if (spec_.projections[p].plastic) s["w:" + spec_.projections[p].name] = weights(spec_.projections[p].name);
        }
        return s;
    }

    SimOutcome outcome() const
    {
        SimOutcome out = outcome_;
        core_.finish(out);
        out.final_state = snapshot();
        return out;
    }

    const NetworkSpec &spec() const noexcept { return spec_; }

private:
    struct Placed {
        std::size_t base = 0; // words, or lanes for packed weights
        bool synop = false; // integrates through the synop kernels
        bool packed = false;
    };

    void integrate(std::size_t p, const std::vector<std::uint32_t> &events)
    {
        if (events.empty()) return;
        const Projection &proj = spec_.projections[p];
        const std::size_t n_to = spec_.layers[proj.to].size;
        const std::size_t v = v_base_[proj.to];
        const Placed &pl = placed_[p];

        if (proj.connectivity == Connectivity::one_to_one) {
            for (auto j : events) {
                LoopPlan plan;
                plan.iterations = 1;
                plan.bind(1, pl.base + j).bind(2, v + j);
                core_.run(integration_, plan);
            }
            return;
        }
        if (!pl.synop) {
            for (auto j : events) {
                LoopPlan plan;
                plan.iterations = n_to;
                plan.bind(1, pl.base + j * n_to).bind(2, v);
                core_.run(integration_, plan);
            }
            return;
        }
        std::size_t i = 0;
        const auto batch = static_cast<std::size_t>(spec_.synop.events_per_iteration);
        if (batch > 1) {
            for (; i + batch <= events.size(); i += batch) {
                std::vector<std::size_t> cursor(batch);
                for (std::size_t e = 0; e < batch; ++e) cursor[e] = pl.base + events[i + e] * n_to;
                core_.run(synop_batch_.kernel, synop_batch_.plan(n_to, v, cursor));
            }
        }
        for (; i < events.size(); ++i) {
            const std::size_t cursor = pl.base + events[i] * n_to;
            core_.run(synop1_.kernel, synop1_.plan(n_to, v, std::span<const std::size_t>(&cursor, 1)));
        }
    }

    void update_trace(std::size_t l)
    {
        const std::size_t n = spec_.layers[l].size;
        core_.fill(flag_base_[l], n, kZero16);
        for (auto s : current_[l]) core_.store(flag_base_[l] + s, std::span<const Value16>(&kOne16, 1));
        LoopPlan plan;
        plan.iterations = n;
        plan.bind(1, trace_base_[l]).bind(2, flag_base_[l]);
        plan.constant(2, spec_.params.beta).constant(3, spec_.params.one_minus_beta);
        core_.run(trace_kernel_, plan);
    }

    void hebbian_update(std::size_t p)
    {
        const Projection &proj = spec_.projections[p];
        const std::size_t n_from = spec_.layers[proj.from].size;
        const std::size_t n_to = spec_.layers[proj.to].size;
        const std::size_t w = placed_[p].base;
        for (std::size_t i = 0; i < n_to; ++i) {
            LoopPlan plan;
            plan.iterations = n_from;
            plan.bind(1, w + i, static_cast<std::int64_t>(n_to)).bind(2, trace_base_[proj.from]);
            plan.constant(2, core_.load_one(trace_base_[proj.to] + i)).constant(3, spec_.params.eta);
            core_.run(hebbian_, plan);
        }
        if (spec_.clip_w_max) {
            const Value16 hi = bf16(*spec_.clip_w_max);
            for (std::size_t k = 0; k < proj.weights.size(); ++k) {
                Value16 x = core_.load_one(w + k);
                if (x.to_double() < 0.0) x = kZero16;
                if (x.to_double() > hi.to_double()) x = hi;
                core_.store(w + k, std::span<const Value16>(&x, 1));
            }
        }
    }

    NetworkSpec spec_;
    SimOptions options_;
    Core core_;
    MicroKernel integration_, generation_, trace_kernel_, hebbian_;
    bool use_synop_ = false;
    SynOpKernel synop1_, synop_batch_;
    std::vector<std::size_t> v_base_, trace_base_, flag_base_;
    std::vector<bool> traced_;
    std::vector<Placed> placed_;
    std::vector<std::vector<std::uint32_t>> previous_, current_;
    std::vector<std::vector<std::uint64_t>> spike_counts_;
    SimOutcome outcome_;
};

inline SimOutcome run_if_network(const NetworkSpec &spec, const SpikeTrain &input,
        const EnergyTable &table = EnergyTable::defaults(), const SimOptions &options = {})
{
    IfNetworkSim sim(spec, table, options);
    sim.present(input, spec.learning == Learning::hebbian);
    return sim.outcome();
}

/// Sigma-delta network. Input deltas are the BF16 difference between
/// consecutive frames, taken on the host; zero deltas send no event. Every
/// neuron layer integrates incoming delta events into its sigma states and,
/// on evaluated frames, runs the delta kernel over all neurons.
inline SimOutcome run_sd_network(const NetworkSpec &spec_in, const FrameSequence &frames,
        const EnergyTable &table = EnergyTable::defaults(), const SimOptions &options = {})
{
    NetworkSpec spec = spec_in;
    spec.validate();
    for (std::size_t l = 1; l < spec.layers.size(); ++l) {
        if (spec.layers[l].model != NeuronModel::SD) throw ValidationError("SD simulation needs SD neuron layers");
    }
    for (const auto &p : spec.projections) {
        if (p.kind != ProjectionKind::forward || p.connectivity != Connectivity::dense) {
            throw ValidationError("projection '" + p.name + "': SD networks take dense forward projections");
        }
    }
    Core core(table, spec.lane_count, spec.memory_bits, spec.memory_level, options.trace);
    const MicroKernel sigma = build_sd_sigma();
    const MicroKernel delta = build_sd_delta();
    const std::size_t layers = spec.layers.size();

    std::vector<std::size_t> z(layers, 0), a(layers, 0), w(spec.projections.size(), 0);
    for (std::size_t l = 1; l < layers; ++l) {
        z[l] = core.allocate("z" + std::to_string(l), spec.layers[l].size);
        a[l] = core.allocate("a" + std::to_string(l), spec.layers[l].size);
    }
    for (std::size_t p = 0; p < spec.projections.size(); ++p) {
        w[p] = core.allocate("w:" + spec.projections[p].name, spec.projections[p].weights.size());
        core.store(w[p], spec.projections[p].weights);
    }

    SimOutcome out;
    out.layer_events.assign(layers, 0);
    std::vector<Value16> previous_input(spec.input_size(), kZero16);
    std::vector<std::vector<AerEvent>> events(layers);
    const auto snapshot = [&] {
        StateSnapshot s;
        for (std::size_t l = 1; l < layers; ++l) {
            s["z" + std::to_string(l)] = core.load(z[l], spec.layers[l].size);
            s["a" + std::to_string(l)] = core.load(a[l], spec.layers[l].size);
        }
        return s;
    };

    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto &frame = frames[f];
        if (frame.size() != spec.input_size()) {
            throw ValidationError("frame " + std::to_string(f) + " has " + std::to_string(frame.size()) +
                    " values, input layer has " + std::to_string(spec.input_size()));
        }
        events[0].clear();
        for (std::size_t j = 0; j < frame.size(); ++j) {
            const Value16 x = bf16(frame[j]);
            const Value16 d = exec_arith(Mnemonic::SUB, x, previous_input[j]);
            previous_input[j] = x;
            if (!d.is_zero()) events[0].push_back(AerEvent{j, d});
        }
        const bool evaluate = (f + 1) % spec.delta_every == 0;
        for (std::size_t l = 1; l < layers; ++l) {
            const std::size_t n = spec.layers[l].size;
            for (std::size_t p = 0; p < spec.projections.size(); ++p) {
                const auto &proj = spec.projections[p];
                if (proj.to != l) continue;
                for (const auto &e : events[proj.from]) {
                    LoopPlan plan;
                    plan.iterations = n;
                    plan.bind(1, w[p] + e.source * n).bind(2, z[l]);
                    plan.constant(2, e.payload);
                    core.run(sigma, plan);
                }
            }
            events[l].clear();
            if (evaluate) {
                LoopPlan plan;
                plan.iterations = n;
                plan.bind(1, z[l]).bind(2, a[l]);
                plan.constant(2, kZero16).constant(3, spec.params.q);
                events[l] = core.run(delta, plan);
            }
        }
        for (std::size_t l = 0; l < layers; ++l) out.layer_events[l] += events[l].size();
        out.output_events.push_back(events.back());
        if (evaluate) out.output_activations.push_back(core.load(a[layers - 1], spec.layers.back().size));
        ++out.steps;
        if (options.record_trajectory) out.trajectory.push_back(snapshot());
    }
    core.finish(out);
    out.final_state = snapshot();
    return out;
}

/// Spikes plus, on supervised steps, one error value per channel. An empty
/// error vector marks an unsupervised step.
struct LabeledStream {
    SpikeTrain spikes;
    std::vector<std::vector<double>> errors;
};

/// e-prop on one input and one hidden IF layer. Per step: input traces,
/// integration, eligibility from the integrated states, spike generation.
/// On supervised steps the learning signals are cleared, each non-zero error
/// event is spread over the hidden neurons through the feedback matrix, and
/// the weights are updated.
inline SimOutcome run_eprop(const NetworkSpec &spec_in, const LabeledStream &stream,
        const EnergyTable &table = EnergyTable::defaults(), const SimOptions &options = {})
{
    NetworkSpec spec = spec_in;
    spec.validate();
    if (spec.learning != Learning::eprop) throw ValidationError("network is not configured for e-prop");
    if (spec.layers[1].model != NeuronModel::IF) throw ValidationError("e-prop hidden layer must be IF");
    if (spec.projections.size() != 1 || spec.projections[0].from != 0 || spec.projections[0].to != 1 ||
            spec.projections[0].connectivity != Connectivity::dense) {
        throw ValidationError("e-prop networks take exactly one dense input-to-hidden projection");
    }
    if (!stream.errors.empty() && stream.errors.size() != stream.spikes.size()) {
        throw ValidationError("errors must be given per step or not at all");
    }
    const std::size_t n = spec.layers[0].size;
    const std::size_t m = spec.layers[1].size;
    const std::size_t k_channels = spec.error_channels;
    const auto &par = spec.params;

    Core core(table, spec.lane_count, spec.memory_bits, spec.memory_level, options.trace);
    const MicroKernel integration = build_if_integration();
    const MicroKernel generation = build_if_generation();
    const MicroKernel trace = build_trace_update();
    const MicroKernel eligibility = build_eprop_eligibility();
    const MicroKernel weight = build_eprop_weight();
    const MicroKernel sigma = build_sd_sigma();

    const std::size_t w = core.allocate("w", n * m);
    const std::size_t v = core.allocate("v", m);
    const std::size_t tr = core.allocate("trace", n);
    const std::size_t flags = core.allocate("spikes", n);
    const std::size_t e = core.allocate("e", m * n);
    const std::size_t sig = core.allocate("L", m);
    const std::size_t b = core.allocate("B", k_channels * m);
    core.store(w, spec.projections[0].weights);
    core.store(b, spec.error_feedback);

    SimOutcome out;
    out.layer_events.assign(2, 0);
    const auto snapshot = [&] {
        StateSnapshot s;
        s["v1"] = core.load(v, m);
        s["trace0"] = core.load(tr, n);
        s["e"] = core.load(e, m * n);
        s["L"] = core.load(sig, m);
        s["w:" + spec.projections[0].name] = core.load(w, n * m);
        return s;
    };

    for (std::size_t k = 0; k < stream.spikes.size(); ++k) {
        const auto &spikes = stream.spikes[k];
        detail::check_spikes(spikes, n, k);

        core.fill(flags, n, kZero16);
        for (auto j : spikes) core.store(flags + j, std::span<const Value16>(&kOne16, 1));
        {
            LoopPlan plan;
            plan.iterations = n;
            plan.bind(1, tr).bind(2, flags);
            plan.constant(2, par.beta).constant(3, par.one_minus_beta);
            core.run(trace, plan);
        }
        for (auto j : spikes) {
            LoopPlan plan;
            plan.iterations = m;
            plan.bind(1, w + j * m).bind(2, v);
            core.run(integration, plan);
        }
        for (std::size_t i = 0; i < m; ++i) {
            LoopPlan plan;
            plan.iterations = n;
            plan.bind(1, e + i * n).bind(2, tr).bind(3, v + i, 0);
            plan.constant(3, par.vth).constant(4, par.a1_half).constant(5, par.inv_a1);
            core.run(eligibility, plan);
        }
        std::vector<AerEvent> fired;
        {
            LoopPlan plan;
            plan.iterations = m;
            plan.bind(1, v);
            plan.constant(1, par.vth);
            fired = core.run(generation, plan);
        }

        const bool supervised = !stream.errors.empty() && !stream.errors[k].empty();
        if (supervised) {
            const auto &y = stream.errors[k];
            if (y.size() != k_channels) {
                throw ValidationError("step " + std::to_string(k) + ": expected " + std::to_string(k_channels) +
                        " error values, got " + std::to_string(y.size()));
            }
            core.fill(sig, m, kZero16);
            for (std::size_t c = 0; c < k_channels; ++c) {
                const Value16 yc = bf16(y[c]);
                if (yc.is_zero()) continue;
                LoopPlan plan;
                plan.iterations = m;
                plan.bind(1, b + c * m).bind(2, sig);
                plan.constant(2, yc);
                core.run(sigma, plan);
            }
            for (std::size_t i = 0; i < m; ++i) {
                LoopPlan plan;
                plan.iterations = n;
                plan.bind(1, w + i, static_cast<std::int64_t>(m)).bind(2, e + i * n).bind(3, sig + i, 0);
                plan.constant(3, par.eta);
                core.run(weight, plan);
            }
        }

        out.layer_events[0] += spikes.size();
        out.layer_events[1] += fired.size();
        out.output_events.push_back(std::move(fired));
        ++out.steps;
        if (options.record_trajectory) out.trajectory.push_back(snapshot());
    }
    core.finish(out);
    out.final_state = snapshot();
    return out;
}

} // namespace seneca
