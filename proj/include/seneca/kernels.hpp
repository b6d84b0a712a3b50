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

// Built-in micro-kernels: IF and sigma-delta neurons, Hebbian and e-prop
// learning, and the quantized / multi-event synaptic operation.
//
// Register conventions (constants are bound through LoopPlan::constant):
//
//   kernel              address registers                constants
//   if_integration      A1 weight row, A2 states         -
//   if_generation       A1 states                        R1 v_th
//   sd_sigma            A1 weight row, A2 sigma states   R2 event payload
//   sd_delta            A1 sigma states, A2 activations  R2 0, R3 q
//   hebbian_weight      A1 weights, A2 input traces      R2 output trace, R3 eta
//   trace_update        A1 traces, A2 spikes             R2 beta, R3 1-beta
//   eprop_eligibility   A1 e, A2 input traces, A3 v      R3 v_th, R4 a1/2, R5 1/a1
//   eprop_weight        A1 weights, A2 e, A3 feedback    R3 eta

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seneca/assembler.hpp"
#include "seneca/bf16.hpp"
#include "seneca/energy.hpp"
#include "seneca/engine.hpp"
#include "seneca/errors.hpp"
#include "seneca/isa.hpp"

namespace seneca {

/// Neuron and learning-rule constants, already in BF16.
struct KernelParams {
    Value16 vth = bf16(1.0);
    Value16 q = bf16(1.0);
    Value16 eta = bf16(0.01);
    Value16 beta = bf16(0.9);
    Value16 one_minus_beta = bf16(1.0 - bf16(0.9).to_double());
    Value16 a1_half = bf16(0.5);
    Value16 inv_a1 = bf16(1.0);

    static KernelParams from_reals(double vth, double q, double eta, double beta, double a1)
    {
        if (!(q > 0.0)) throw ValidationError("q must be positive");
        if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0, 1]");
        if (!(a1 > 0.0)) throw ValidationError("a1 must be positive");
        KernelParams p;
        p.vth = bf16(vth);
        p.q = bf16(q);
        p.eta = bf16(eta);
        p.beta = bf16(beta);
        p.one_minus_beta = bf16(1.0 - p.beta.to_double());
        p.a1_half = bf16(a1 / 2.0);
        p.inv_a1 = bf16(1.0 / a1);
        return p;
    }
};

namespace kernel_source {

inline constexpr std::string_view if_integration = R"(
MLD R0, A1, 1 // load weight w_ij
MLD R1, A2, 0 // load state v_i
ADD R1, R0, R1 // v_i = v_i + w_ij
MST A2, R1, 1 // store R1 in v_i
)";

inline constexpr std::string_view if_generation = R"(
MLD R0, A1, 0 // load state v_i
GTH R2, R0, R1 // spike = H(v_i - v_th)
MUL R3, R2, R0 // v_i * s_out
SUB R0, R0, R3 // reset state if spike
MST A1, R0, 1 // store R0 in v_i
EVC R2 // capture event
)";

inline constexpr std::string_view sd_sigma = R"(
MLD R0, A1, 1 // load weight w_ij
MLD R1, A2, 0 // load sigma state z_i
MUL R3, R0, R2 // w_ij * o_in
ADD R1, R1, R3 // z_i = z_i + w_ij * o_in
MST A2, R1, 1 // store R1 in z_i
)";

inline constexpr std::string_view sd_delta = R"(
MLD R0, A1, 1 // load sigma state z_i
MLD R1, A2, 0 // load previous quantized activation
MAX R0, R0, R2 // ReLU
DIV R0, R0, R3 // f(z) / q
RND R0, R0 // round to closest integer
MUL R0, R0, R3 // rescale
SUB R4, R0, R1 // delta; kept out of R3 so q survives the next iteration
MST A2, R0, 1 // store new quantized activation
EVC R4 // capture event
)";

inline constexpr std::string_view hebbian_weight = R"(
MLD R0, A1, 0 // load weight w_ij
MLD R1, A2, 1 // load input trace
MUL R1, R1, R2 // trace_out * trace_in
MUL R1, R1, R3 // eta * R1
ADD R0, R0, R1 // update weight
MST A1, R0, 1 // store R0 in w_ij
)";

inline constexpr std::string_view trace_update = R"(
MLD R0, A1, 0 // load trace
MLD R1, A2, 1 // load input spike s
MUL R0, R0, R2 // beta * trace
MUL R1, R1, R3 // (1 - beta) * s
ADD R0, R0, R1 // update trace
MST A1, R0, 1 // store R0 in trace
)";

inline constexpr std::string_view eprop_eligibility = R"(
MLD R0, A1, 0 // load e_ij
MLD R1, A2, 1 // load input trace
MLD R2, A3, 1 // load state v_i
SUB R2, R2, R3 // v_i - v_th
ABS R2, R2 // |v_i - v_th|
GTH R2, R4, R2 // a1/2 > |v_i - v_th|
MUL R2, R2, R5 // h(v_i)
MUL R2, R2, R1 // h(v_i) * trace_in
ADD R0, R0, R2 // update e_ij
MST A1, R0, 1 // store R0 in e_ij
)";

inline constexpr std::string_view eprop_weight = R"(
MLD R0, A1, 0 // load weight w_ij
MLD R1, A2, 1 // load e_ij
MLD R2, A3, 1 // load feedback error sum_k b_ik * y_k
MUL R1, R3, R1 // eta * e_ij
MUL R2, R2, R1 // eta * e_ij * feedback
SUB R0, R0, R2 // update weight
MST A1, R0, 1 // store R0 in w_ij
)";

} // namespace kernel_source

inline MicroKernel build_if_integration() { return assemble(kernel_source::if_integration, "if_integration"); }
inline MicroKernel build_if_generation() { return assemble(kernel_source::if_generation, "if_generation"); }
inline MicroKernel build_sd_sigma() { return assemble(kernel_source::sd_sigma, "sd_sigma"); }
inline MicroKernel build_sd_delta() { return assemble(kernel_source::sd_delta, "sd_delta"); }
inline MicroKernel build_hebbian_weight() { return assemble(kernel_source::hebbian_weight, "hebbian_weight"); }
inline MicroKernel build_trace_update() { return assemble(kernel_source::trace_update, "trace_update"); }
inline MicroKernel build_eprop_eligibility()
{
    return assemble(kernel_source::eprop_eligibility, "eprop_eligibility");
}
inline MicroKernel build_eprop_weight() { return assemble(kernel_source::eprop_weight, "eprop_weight"); }

// ---------------------------------------------------------------------------
// Synaptic operation with quantized weights and multi-event batches.

enum class WeightMode : std::uint8_t { bf16, int8, int4, int4FullInteger };
enum class StateMode : std::uint8_t { bf16, int8 };

inline const char *to_string(WeightMode m) noexcept
{
    switch (m) {
    case WeightMode::bf16: return "bf16";
    case WeightMode::int8: return "int8";
    case WeightMode::int4: return "int4";
    case WeightMode::int4FullInteger: return "int4full";
    }
    return "?";
}

inline WeightMode parse_weight_mode(std::string_view text)
{
    if (text == "bf16") return WeightMode::bf16;
    if (text == "int8") return WeightMode::int8;
    if (text == "int4") return WeightMode::int4;
    if (text == "int4full" || text == "int4FullInteger") return WeightMode::int4FullInteger;
    throw ValidationError("unknown weight mode '" + std::string(text) + "'");
}

struct SynOpConfig {
    WeightMode weight_mode = WeightMode::bf16;
    int events_per_iteration = 1;
    StateMode state_mode = StateMode::bf16;
    /// Power-of-two dequantization scale applied after I2F; none means 1.
    std::optional<Value16> weight_scale;

    static SynOpConfig make(WeightMode mode, int events)
    {
        SynOpConfig c;
        c.weight_mode = mode;
        c.events_per_iteration = events;
        c.state_mode = mode == WeightMode::int4FullInteger ? StateMode::int8 : StateMode::bf16;
        return c;
    }

    void validate() const
    {
        if (events_per_iteration != 1 && events_per_iteration != 4) {
            throw ValidationError("events per iteration must be 1 or 4");
        }
        const bool full = weight_mode == WeightMode::int4FullInteger;
        if (full != (state_mode == StateMode::int8)) {
            throw ValidationError("int8 states go with int4 full-integer weights, and only with them");
        }
        if (weight_scale) {
            if (weight_mode == WeightMode::bf16 || full) {
                throw ValidationError("a weight scale applies to int8/int4 weights with BF16 states");
            }
            int exponent = 0;
            const double mant = std::frexp(weight_scale->to_double(), &exponent);
            if (mant != 0.5) throw ValidationError("weight scale must be a positive power of two");
        }
    }
};

/// Register map of the synop kernel: A0 states, A1..A4 one weight stream per
/// event in the batch, R5 the optional weight scale.
struct SynOpKernel {
    MicroKernel kernel;
    SynOpConfig config;
    Packing weight_packing = Packing::word;
    /// Neurons updated per iteration; 2 when int8 states are packed in pairs.
    int neurons_per_iteration = 1;

    static constexpr int kStateRegister = 0;
    static constexpr int kScaleRegister = 5;
    static constexpr int weight_register(int event) noexcept { return 1 + event; }

    /// Builds the loop plan for `neurons` targets; `weight_cursor[e]` is the
    /// start of event e's weight row in packing units.
    LoopPlan plan(std::size_t neurons, std::size_t state_addr,
            std::span<const std::size_t> weight_cursor) const
    {
        if (static_cast<int>(weight_cursor.size()) != config.events_per_iteration) {
            throw ValidationError("need one weight row per event in the batch");
        }
        if (neurons % static_cast<std::size_t>(neurons_per_iteration) != 0) {
            throw ValidationError("int8 state pairs need an even neuron count");
        }
        LoopPlan p;
        p.kernel = &kernel;
        p.iterations = neurons / static_cast<std::size_t>(neurons_per_iteration);
        p.bind(kStateRegister, state_addr);
        for (int e = 0; e < config.events_per_iteration; ++e) {
            p.bind(weight_register(e), weight_cursor[static_cast<std::size_t>(e)], 1, weight_packing);
        }
        if (config.weight_scale) p.constant(kScaleRegister, *config.weight_scale);
        return p;
    }

    /// Per-synaptic-operation energy from the instruction sum, with packed
    /// weight loads divided by the lanes sharing one physical read.
    double derived_energy_pj(const EnergyTable &t) const
    {
        const std::int64_t share = values_per_word(weight_packing);
        std::int64_t scaled_units = 0; // in units / share
        for (const auto &ins : kernel.instructions) {
            const std::int64_t u = t.instruction(ins.op).units;
            const bool packed_load = ins.op == Mnemonic::MLD && ins.src_a != kStateRegister &&
                    weight_packing != Packing::word;
            scaled_units += packed_load ? u : u * share;
        }
        const double per_iteration = static_cast<double>(scaled_units) / static_cast<double>(share);
        return per_iteration / static_cast<double>(config.events_per_iteration * neurons_per_iteration) /
                static_cast<double>(Energy::kUnitsPerPj);
    }

    /// Table value: the instruction sum, except for the full-integer mode,
    /// whose measured cost is taken from the table.
    double energy_pj(const EnergyTable &t) const
    {
        if (config.weight_mode == WeightMode::int4FullInteger) {
            return (config.events_per_iteration == 1 ? t.synop_int4_full_1 : t.synop_int4_full_4).pj();
        }
        return derived_energy_pj(t);
    }
};

inline SynOpKernel build_synop(const SynOpConfig &cfg)
{
    cfg.validate();
    SynOpKernel out;
    out.config = cfg;
    const bool full = cfg.weight_mode == WeightMode::int4FullInteger;
    switch (cfg.weight_mode) {
    case WeightMode::bf16: out.weight_packing = Packing::word; break;
    case WeightMode::int8: out.weight_packing = Packing::int8; break;
    case WeightMode::int4: out.weight_packing = Packing::int4; break;
    case WeightMode::int4FullInteger: out.weight_packing = Packing::int4_pair; break;
    }
    out.neurons_per_iteration = full ? 2 : 1;

    const bool convert = cfg.weight_mode == WeightMode::int8 || cfg.weight_mode == WeightMode::int4;
    const std::string add = full ? "ADD_I8X2" : "ADD";
    const auto load_weight = [&](std::string &src, int event) {
        src += "MLD R0, A" + std::to_string(SynOpKernel::weight_register(event)) + ", 1\n";
        if (convert) src += "I2F R0, R0\n";
        if (cfg.weight_scale) src += "MUL R0, R0, R5\n";
    };

    std::string src;
    if (cfg.events_per_iteration == 1) {
        // Same layout as the spike-integration kernel.
        load_weight(src, 0);
        src += "MLD R1, A0, 0\n";
        src += add + " R1, R0, R1\n";
        src += "MST A0, R1, 1\n";
    } else {
        // The state stays in R1 while the batch's events are applied in order.
        src += "MLD R1, A0, 0\n";
        for (int e = 0; e < cfg.events_per_iteration; ++e) {
            load_weight(src, e);
            src += add + " R1, R0, R1\n";
        }
        src += "MST A0, R1, 1\n";
    }
    out.kernel = assemble(src, "synop:" + std::string(to_string(cfg.weight_mode)) + ":" +
                    std::to_string(cfg.events_per_iteration));
    return out;
}

/// Parses `synop:<mode>:<events>`.
inline SynOpConfig parse_synop_name(std::string_view name)
{
    if (name.rfind("synop:", 0) != 0) throw ValidationError("not a synop kernel name: " + std::string(name));
    const std::string_view rest = name.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
        throw ValidationError("expected synop:<mode>:<events>, got '" + std::string(name) + "'");
    }
    const std::string events(rest.substr(colon + 1));
    if (events != "1" && events != "4") throw ValidationError("events per iteration must be 1 or 4");
    return SynOpConfig::make(parse_weight_mode(rest.substr(0, colon)), std::stoi(events));
}

inline const std::vector<std::string> &builtin_kernel_names()
{
    static const std::vector<std::string> names = {"if_integration", "if_generation", "sd_sigma",
            "sd_delta", "hebbian_weight", "trace_update", "eprop_eligibility", "eprop_weight"};
    return names;
}

/// Looks up a built-in kernel or a `synop:<mode>:<events>` variant.
inline MicroKernel kernel_by_name(std::string_view name)
{
    if (name == "if_integration") return build_if_integration();
    if (name == "if_generation") return build_if_generation();
    if (name == "sd_sigma") return build_sd_sigma();
    if (name == "sd_delta") return build_sd_delta();
    if (name == "hebbian_weight") return build_hebbian_weight();
    if (name == "trace_update") return build_trace_update();
    if (name == "eprop_eligibility") return build_eprop_eligibility();
    if (name == "eprop_weight") return build_eprop_weight();
    if (name.rfind("synop:", 0) == 0) return build_synop(parse_synop_name(name)).kernel;
    throw ValidationError("unknown kernel '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Weight quantization helpers.

/// Smallest power of two s such that every |w| / s fits the lane range.
inline double choose_pow2_scale(std::span<const double> weights, PackMode mode)
{
    double max_abs = 0.0;
    for (double w : weights) max_abs = std::max(max_abs, std::abs(w));
    if (max_abs == 0.0) return 1.0;
    const double ratio = max_abs / static_cast<double>(lane_max(mode));
    return std::exp2(std::ceil(std::log2(ratio)));
}

/// Symmetric per-tensor quantization: round(w / scale), clamped to the lane range.
inline std::vector<int> quantize(std::span<const double> weights, PackMode mode, double scale = 1.0)
{
    std::vector<int> out;
    out.reserve(weights.size());
    for (double w : weights) {
        const double q = round_to_integer(w / scale);
        out.push_back(static_cast<int>(std::clamp(q, static_cast<double>(lane_min(mode)),
                static_cast<double>(lane_max(mode)))));
    }
    return out;
}

/// Packs integer values lane-first into words; a short tail is zero-padded.
inline std::vector<std::uint16_t> pack_lanes(std::span<const int> values, PackMode mode)
{
    const auto lanes = static_cast<std::size_t>(lane_count(mode));
    std::vector<std::uint16_t> words;
    words.reserve((values.size() + lanes - 1) / lanes);
    std::array<int, 4> buf{};
    for (std::size_t i = 0; i < values.size(); i += lanes) {
        buf.fill(0);
        for (std::size_t l = 0; l < lanes && i + l < values.size(); ++l) buf[l] = values[i + l];
        words.push_back(PackedWord::pack(mode, std::span<const int>(buf.data(), lanes)).bits);
    }
    return words;
}

} // namespace seneca
