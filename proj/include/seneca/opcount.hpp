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

// Operation counts for sigma-delta networks and their per-frame energy.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seneca/energy.hpp"
#include "seneca/errors.hpp"
#include "seneca/kernels.hpp"
#include "seneca/network.hpp"

namespace seneca {

struct OpCountSheet {
    /// Synaptic (sigma) operations per frame.
    double sigma_ops = 0.0;
    /// Neuron output (delta) evaluations per frame.
    double delta_evals = 0.0;

    void validate() const
    {
        if (!(sigma_ops >= 0.0) || !(delta_evals >= 0.0)) throw ValidationError("operation counts must be >= 0");
    }
};

/// Fraction of each layer's neurons emitting an event per frame.
struct SparsityProfile {
    std::vector<double> event_rate;

    void validate(std::size_t layers) const
    {
        if (event_rate.size() != layers) {
            throw ValidationError("sparsity profile needs one rate per layer (" + std::to_string(layers) + ")");
        }
        for (double r : event_rate) {
            if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("event rates must lie in [0, 1]");
        }
    }
};

/// sigma = sum over projections of source events x fan-out;
/// delta = neurons of every non-input layer, scaled by the evaluation rate.
inline OpCountSheet count_operations(const NetworkSpec &spec, const SparsityProfile &profile)
{
    profile.validate(spec.layers.size());
    OpCountSheet sheet;
    for (const auto &p : spec.projections) {
        const double events = profile.event_rate[p.from] * static_cast<double>(spec.layers[p.from].size);
        sheet.sigma_ops += events * static_cast<double>(p.fan_out(spec.layers[p.to].size));
    }
    for (std::size_t l = 1; l < spec.layers.size(); ++l) {
        sheet.delta_evals += static_cast<double>(spec.layers[l].size) / static_cast<double>(spec.delta_every);
    }
    return sheet;
}

struct FrameEnergy {
    double sigma_pj = 0.0;
    double delta_pj = 0.0;

    double sigma_uj() const { return sigma_pj * 1e-6; }
    double delta_uj() const { return delta_pj * 1e-6; }
    double total_uj() const { return (sigma_pj + delta_pj) * 1e-6; }
};

/// sigma x (sigma kernel energy) + delta x (delta kernel energy at the given
/// output event rate).
inline FrameEnergy frame_energy(const OpCountSheet &sheet, const EnergyTable &table, double delta_event_rate = 1.0)
{
    sheet.validate();
    FrameEnergy e;
    e.sigma_pj = sheet.sigma_ops * kernel_energy(build_sd_sigma(), table, 0.0);
    e.delta_pj = sheet.delta_evals * kernel_energy(build_sd_delta(), table, delta_event_rate);
    return e;
}

/// Per-frame counts for ResNet-50 and MobileNet sigma-delta video networks:
/// their per-frame sigma and delta energies divided by the default sigma
/// (14.1 pJ) and delta (19.7 pJ) kernel energies.
inline std::optional<OpCountSheet> preset_counts(const std::string &name)
{
    if (name == "resnet50") return OpCountSheet{248'510'638.0, 9'197'970.0};
    if (name == "mobilenet") return OpCountSheet{127'113'475.0, 5'299'492.0};
    return std::nullopt;
}

} // namespace seneca
