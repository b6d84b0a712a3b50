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

// Network description shared by the core simulator and the reference model.

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "seneca/bf16.hpp"
#include "seneca/errors.hpp"
#include "seneca/kernels.hpp"
#include "seneca/memory.hpp"

namespace seneca {

enum class NeuronModel : std::uint8_t { input, IF, SD };
enum class Learning : std::uint8_t { none, hebbian, eprop };

/// forward: same time step, source layer earlier than the target.
/// recurrent: a layer onto itself, delivered one step later.
/// feedback: a later layer onto an earlier one, delivered one step later.
enum class ProjectionKind : std::uint8_t { forward, recurrent, feedback };
enum class Connectivity : std::uint8_t { dense, one_to_one, conv };

inline const char *to_string(NeuronModel m) noexcept
{
    switch (m) {
    case NeuronModel::input: return "input";
    case NeuronModel::IF: return "IF";
    case NeuronModel::SD: return "SD";
    }
    return "?";
}

inline const char *to_string(Learning l) noexcept
{
    switch (l) {
    case Learning::none: return "none";
    case Learning::hebbian: return "hebbian";
    case Learning::eprop: return "eprop";
    }
    return "?";
}

inline const char *to_string(ProjectionKind k) noexcept
{
    switch (k) {
    case ProjectionKind::forward: return "forward";
    case ProjectionKind::recurrent: return "recurrent";
    case ProjectionKind::feedback: return "feedback";
    }
    return "?";
}

/// Convolution geometry; used for operation counting only.
struct ConvDescriptor {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel = 3;
    std::size_t stride = 1;

    /// Output neurons touched by one input event, ignoring borders.
    std::size_t fan_out() const noexcept
    {
        const std::size_t reach = (kernel + stride - 1) / stride;
        return out_channels * reach * reach;
    }
};

struct LayerSpec {
    std::size_t size = 0;
    NeuronModel model = NeuronModel::IF;
};

struct Projection {
    std::string name;
    std::size_t from = 0;
    std::size_t to = 0;
    ProjectionKind kind = ProjectionKind::forward;
    Connectivity connectivity = Connectivity::dense;
    std::optional<ConvDescriptor> conv;
    /// Dense: from_size * to_size values, row j holds the fan-out of source j.
    /// One-to-one: one value per source.
    std::vector<Value16> weights;
    bool plastic = false;

    std::size_t fan_out(std::size_t to_size) const noexcept
    {
        switch (connectivity) {
        case Connectivity::dense: return to_size;
        case Connectivity::one_to_one: return 1;
        case Connectivity::conv: return conv ? conv->fan_out() : 0;
        }
        return 0;
    }
};

struct NetworkSpec {
    std::string name = "network";
    /// layers[0] is the input layer.
    std::vector<LayerSpec> layers;
    std::vector<Projection> projections;
    Learning learning = Learning::none;
    SynOpConfig synop;
    std::size_t time_steps = 1;
    /// Sigma-delta: evaluate the delta kernels every n frames.
    std::size_t delta_every = 1;
    KernelParams params;
    std::uint64_t seed = 0;
    /// Hebbian: clamp weights to [0, w_max] after each update when set.
    std::optional<double> clip_w_max;
    /// e-prop: error channels and their feedback matrix, error_channels x hidden.
    std::size_t error_channels = 0;
    std::vector<Value16> error_feedback;

    int lane_count = 8;
    std::size_t memory_bits = kDefaultCapacityBits;
    MemoryLevel memory_level = MemoryLevel::localSram;

    std::size_t input_size() const { return layers.empty() ? 0 : layers.front().size; }

    std::size_t projection_index(const std::string &pname) const
    {
        for (std::size_t i = 0; i < projections.size(); ++i) {
            if (projections[i].name == pname) return i;
        }
        throw ValidationError("network has no projection '" + pname + "'");
    }

    void validate() const
    {
        if (layers.size() < 2) throw ValidationError("network needs an input layer and at least one neuron layer");
        if (layers.front().model != NeuronModel::input) {
            throw ValidationError("layer 0 must be the input layer");
        }
        for (std::size_t l = 0; l < layers.size(); ++l) {
            if (layers[l].size == 0) throw ValidationError("layer " + std::to_string(l) + " has size 0");
            if (l > 0 && layers[l].model == NeuronModel::input) {
                throw ValidationError("only layer 0 may be an input layer");
            }
        }
        if (time_steps == 0) throw ValidationError("time_steps must be positive");
        if (delta_every == 0) throw ValidationError("delta_every must be positive");
        if (lane_count <= 0) throw ValidationError("lane_count must be positive");
        synop.validate();
        if (synop.weight_mode == WeightMode::int4FullInteger) {
            throw ValidationError("int4 full-integer mode keeps int8 states; network simulation needs BF16 states");
        }
        for (const auto &p : projections) {
            const std::string where = "projection '" + p.name + "'";
            if (p.from >= layers.size() || p.to >= layers.size()) throw ValidationError(where + ": layer index out of range");
            if (p.to == 0) throw ValidationError(where + ": the input layer takes no projections");
            switch (p.kind) {
            case ProjectionKind::forward:
                if (p.from >= p.to) throw ValidationError(where + ": forward projections go to a later layer");
                break;
            case ProjectionKind::recurrent:
                if (p.from != p.to) throw ValidationError(where + ": recurrent projections stay within a layer");
                break;
            case ProjectionKind::feedback:
                if (p.from <= p.to) throw ValidationError(where + ": feedback projections go to an earlier layer");
                break;
            }
            const std::size_t n_from = layers[p.from].size;
            const std::size_t n_to = layers[p.to].size;
            switch (p.connectivity) {
            case Connectivity::dense:
                if (p.weights.size() != n_from * n_to) {
                    throw ValidationError(where + ": expected " + std::to_string(n_from * n_to) +
                            " weights, got " + std::to_string(p.weights.size()));
                }
                break;
            case Connectivity::one_to_one:
                if (n_from != n_to) throw ValidationError(where + ": one-to-one needs equal layer sizes");
                if (p.weights.size() != n_from) {
                    throw ValidationError(where + ": expected " + std::to_string(n_from) + " weights");
                }
                break;
            case Connectivity::conv:
                if (!p.conv) throw ValidationError(where + ": conv connectivity needs a descriptor");
                break;
            }
            if (p.plastic && p.connectivity != Connectivity::dense) {
                throw ValidationError(where + ": only dense projections can learn");
            }
        }
        if (learning == Learning::eprop) {
            if (error_channels == 0) throw ValidationError("e-prop needs at least one error channel");
            if (layers.size() != 2) throw ValidationError("e-prop networks have one input and one hidden layer");
            if (error_feedback.size() != error_channels * layers[1].size) {
                throw ValidationError("error_feedback must hold error_channels x hidden values");
            }
        }
    }
};

/// Uniform weights in [lo, hi] from a seeded generator, rounded to BF16.
inline std::vector<Value16> uniform_weights(std::size_t count, double lo, double hi, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<Value16> out(count);
    for (auto &w : out) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        w = bf16(lo + (hi - lo) * u);
    }
    return out;
}

inline std::vector<Value16> constant_weights(std::size_t count, double value)
{
    return std::vector<Value16>(count, bf16(value));
}

inline Projection dense_projection(std::string name, std::size_t from, std::size_t to,
        ProjectionKind kind, std::vector<Value16> weights, bool plastic = false)
{
    Projection p;
    p.name = std::move(name);
    p.from = from;
    p.to = to;
    p.kind = kind;
    p.connectivity = Connectivity::dense;
    p.weights = std::move(weights);
    p.plastic = plastic;
    return p;
}

} // namespace seneca
