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

// Straight-line reference models of the neuron and learning equations, for
// tests. No kernels, no engine, no bf16.hpp arithmetic: values are rounded
// by an independent significand-scaling routine, or kept in double.
//
// Each model can record its threshold and rounding decisions and can be
// forced to replay another run's decisions, so a double-precision run
// measures arithmetic drift alone.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "seneca/network.hpp"

namespace seneca::reference {

/// Nearest BF16 value of x, ties to even, through frexp and nearbyint.
inline std::uint16_t round_to_bits(double x)
{
    if (std::isnan(x)) return std::signbit(x) ? 0xFFC0 : 0x7FC0;
    float f = 0.0f;
    if (std::isinf(x) || x == 0.0) {
        f = static_cast<float>(x);
    } else {
        int e = 0;
        std::frexp(x, &e); // |x| = m * 2^e, m in [0.5, 1)
        e = std::max(e, -125); // below 2^-126 the grid stops shrinking
        const double scaled = std::ldexp(x, 8 - e);
        const double r = std::ldexp(std::nearbyint(scaled), e - 8);
        const double max_finite = std::ldexp(255.0, 120); // 0x7F7F
        if (std::abs(r) > max_finite) {
            f = std::signbit(x) ? -std::numeric_limits<float>::infinity()
                                : std::numeric_limits<float>::infinity();
        } else {
            f = static_cast<float>(r); // exact
        }
    }
    return static_cast<std::uint16_t>(std::bit_cast<std::uint32_t>(f) >> 16);
}

inline double bits_to_double(std::uint16_t bits)
{
    return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16));
}

/// Emulated BF16: every operation computed in double and rounded once.
struct Bf16Arith {
    using T = std::uint16_t;
    static T from_bits(std::uint16_t b) { return b; }
    static T lit(double x) { return round_to_bits(x); }
    static double real(T a) { return bits_to_double(a); }
    static T add(T a, T b) { return round_to_bits(real(a) + real(b)); }
    static T sub(T a, T b) { return round_to_bits(real(a) - real(b)); }
    static T mul(T a, T b) { return round_to_bits(real(a) * real(b)); }
    static T div(T a, T b) { return round_to_bits(real(a) / real(b)); }
    static T max(T a, T b) { return real(a) > real(b) ? a : b; }
    static T gth(T a, T b) { return real(a) > real(b) ? lit(1.0) : lit(0.0); }
    static T abs(T a) { return static_cast<T>(a & 0x7FFF); }
    static T rnd(T a) { return round_to_bits(std::round(real(a))); }
    static bool nonzero(T a) { return (a & 0x7FFF) != 0; }
    static std::uint16_t bits(T a) { return a; }
};

/// Double precision throughout; the drift baseline.
struct WideArith {
    using T = double;
    static T from_bits(std::uint16_t b) { return bits_to_double(b); }
    static T lit(double x) { return x; }
    static double real(T a) { return a; }
    static T add(T a, T b) { return a + b; }
    static T sub(T a, T b) { return a - b; }
    static T mul(T a, T b) { return a * b; }
    static T div(T a, T b) { return a / b; }
    static T max(T a, T b) { return a > b ? a : b; }
    static T gth(T a, T b) { return a > b ? 1.0 : 0.0; }
    static T abs(T a) { return std::abs(a); }
    static T rnd(T a) { return std::round(a); }
    static bool nonzero(T a) { return a != 0.0; }
    static std::uint16_t bits(T a) { return round_to_bits(a); }
};

/// Per step: fired neurons per layer (IF), surrogate window bits (e-prop)
/// or rounded integers per layer (SD).
struct Decisions {
    std::vector<std::vector<std::vector<std::uint32_t>>> spikes; // [step][layer]
    std::vector<std::vector<bool>> window;                       // [step][i * n + j]
    std::vector<std::vector<std::vector<double>>> levels;         // [step][layer][i]
};

/// Real-valued state arrays per step, named as in the simulator snapshots.
using RealSnapshot = std::map<std::string, std::vector<double>>;

struct Trajectory {
    std::vector<RealSnapshot> steps;
    Decisions decisions;
    /// SD: last-layer activations per evaluated frame.
    std::vector<std::vector<double>> outputs;
    /// Bit patterns per step, for comparison with the simulator.
    std::vector<std::map<std::string, std::vector<std::uint16_t>>> bits;
};

namespace detail {

template <class A>
std::vector<typename A::T> convert(const std::vector<Value16> &v)
{
    std::vector<typename A::T> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = A::from_bits(v[i].bits);
    return out;
}

template <class A>
void record(Trajectory &t, std::size_t step, const std::string &name, const std::vector<typename A::T> &v)
{
    if (t.steps.size() <= step) t.steps.resize(step + 1);
    if (t.bits.size() <= step) t.bits.resize(step + 1);
    auto &r = t.steps[step][name];
    auto &b = t.bits[step][name];
    r.resize(v.size());
    b.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        r[i] = A::real(v[i]);
        b[i] = A::bits(v[i]);
    }
}

inline std::int64_t round_away(double x) { return static_cast<std::int64_t>(std::round(x)); }

/// Weights of a dense projection as the integration sees them: quantized to
/// the synop weight mode and dequantized, or unchanged for BF16 weights.
inline std::vector<std::uint16_t> effective_weights(const NetworkSpec &spec, const Projection &p)
{
    std::vector<std::uint16_t> out(p.weights.size());
    const bool quantized = !(spec.synop.weight_mode == WeightMode::bf16 && spec.synop.events_per_iteration == 1 &&
                                     !spec.synop.weight_scale) &&
            !p.plastic && p.connectivity == Connectivity::dense;
    if (!quantized) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = p.weights[i].bits;
        return out;
    }
    std::int64_t lo = -128, hi = 127;
    if (spec.synop.weight_mode == WeightMode::int4) {
        lo = -8;
        hi = 7;
    }
    const bool integer = spec.synop.weight_mode != WeightMode::bf16;
    const double scale = spec.synop.weight_scale ? bits_to_double(spec.synop.weight_scale->bits) : 1.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double w = bits_to_double(p.weights[i].bits);
        if (!integer) {
            out[i] = p.weights[i].bits;
            continue;
        }
        const std::int64_t q = std::clamp(round_away(w / scale), lo, hi);
        out[i] = round_to_bits(static_cast<double>(q) * scale);
    }
    return out;
}

} // namespace detail

/// IF network with optional Hebbian learning; same step order as the core
/// simulator. `force` replays another run's spike decisions.
template <class A>
Trajectory run_if(const NetworkSpec &spec, const std::vector<std::vector<std::uint32_t>> &input,
        bool learn, const Decisions *force = nullptr)
{
    using T = typename A::T;
    const std::size_t layers = spec.layers.size();
    const T vth = A::from_bits(spec.params.vth.bits);
    const T beta = A::from_bits(spec.params.beta.bits);
    const T omb = A::from_bits(spec.params.one_minus_beta.bits);
    const T eta = A::from_bits(spec.params.eta.bits);
    const T one = A::lit(1.0);
    const T zero = A::lit(0.0);

    std::vector<std::vector<T>> v(layers), trace(layers), w(spec.projections.size());
    std::vector<bool> traced(layers, false);
    for (std::size_t l = 0; l < layers; ++l) {
        v[l].assign(spec.layers[l].size, zero);
        trace[l].assign(spec.layers[l].size, zero);
    }
    for (std::size_t p = 0; p < spec.projections.size(); ++p) {
        const auto eff = detail::effective_weights(spec, spec.projections[p]);
        w[p].resize(eff.size());
        for (std::size_t i = 0; i < eff.size(); ++i) w[p][i] = A::from_bits(eff[i]);
        if (spec.projections[p].plastic) traced[spec.projections[p].from] = traced[spec.projections[p].to] = true;
    }
    const bool hebbian = learn && spec.learning == Learning::hebbian;

    Trajectory out;
    std::vector<std::vector<std::uint32_t>> prev(layers), cur(layers);
    for (std::size_t k = 0; k < input.size(); ++k) {
        cur[0] = input[k];
        for (std::size_t l = 1; l < layers; ++l) {
            const std::size_t m = spec.layers[l].size;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t p = 0; p < spec.projections.size(); ++p) {
                    const auto &pr = spec.projections[p];
                    if (pr.to != l) continue;
                    const bool delayed = pr.kind != ProjectionKind::forward;
                    if (delayed != (pass == 0)) continue;
                    const auto &src = delayed ? prev[pr.from] : cur[pr.from];
                    for (auto j : src) {
                        if (pr.connectivity == Connectivity::one_to_one) {
                            v[l][j] = A::add(w[p][j], v[l][j]);
                        } else {
                            for (std::size_t i = 0; i < m; ++i) v[l][i] = A::add(w[p][j * m + i], v[l][i]);
                        }
                    }
                }
            }
            cur[l].clear();
            for (std::size_t i = 0; i < m; ++i) {
                T s = A::gth(v[l][i], vth);
                if (force != nullptr) {
                    const auto &f = force->spikes.at(k).at(l);
                    s = std::binary_search(f.begin(), f.end(), static_cast<std::uint32_t>(i)) ? one : zero;
                }
                v[l][i] = A::sub(v[l][i], A::mul(s, v[l][i]));
                if (A::nonzero(s)) cur[l].push_back(static_cast<std::uint32_t>(i));
            }
        }
        if (hebbian) {
            for (std::size_t l = 0; l < layers; ++l) {
                if (!traced[l]) continue;
                std::vector<T> flag(spec.layers[l].size, zero);
                for (auto s : cur[l]) flag[s] = one;
                for (std::size_t i = 0; i < flag.size(); ++i) {
                    trace[l][i] = A::add(A::mul(trace[l][i], beta), A::mul(flag[i], omb));
                }
            }
            for (std::size_t p = 0; p < spec.projections.size(); ++p) {
                const auto &pr = spec.projections[p];
                if (!pr.plastic) continue;
                const std::size_t n = spec.layers[pr.from].size;
                const std::size_t m = spec.layers[pr.to].size;
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const T dw = A::mul(A::mul(trace[pr.from][j], trace[pr.to][i]), eta);
                        w[p][j * m + i] = A::add(w[p][j * m + i], dw);
                    }
                }
                if (spec.clip_w_max) {
                    const T hi = A::lit(bits_to_double(round_to_bits(*spec.clip_w_max)));
                    for (auto &x : w[p]) {
                        if (A::real(x) < 0.0) x = zero;
                        if (A::real(x) > A::real(hi)) x = hi;
                    }
                }
            }
        }

        out.decisions.spikes.push_back(cur);
        for (std::size_t l = 1; l < layers; ++l) detail::record<A>(out, k, "v" + std::to_string(l), v[l]);
        if (hebbian || spec.learning == Learning::hebbian) {
            for (std::size_t l = 0; l < layers; ++l) {
                if (traced[l]) detail::record<A>(out, k, "trace" + std::to_string(l), trace[l]);
            }
            for (std::size_t p = 0; p < spec.projections.size(); ++p) {
                if (spec.projections[p].plastic) detail::record<A>(out, k, "w:" + spec.projections[p].name, w[p]);
            }
        }
        std::swap(prev, cur);
    }
    return out;
}

/// Sigma-delta network over a frame stream. `force` replays the rounded
/// integer levels of another run.
template <class A>
Trajectory run_sd(const NetworkSpec &spec, const std::vector<std::vector<double>> &frames,
        const Decisions *force = nullptr)
{
    using T = typename A::T;
    const std::size_t layers = spec.layers.size();
    const T q = A::from_bits(spec.params.q.bits);
    const T zero = A::lit(0.0);
    std::vector<std::vector<T>> z(layers), a(layers), w(spec.projections.size());
    for (std::size_t l = 0; l < layers; ++l) {
        z[l].assign(spec.layers[l].size, zero);
        a[l].assign(spec.layers[l].size, zero);
    }
    for (std::size_t p = 0; p < spec.projections.size(); ++p) w[p] = detail::convert<A>(spec.projections[p].weights);

    Trajectory out;
    std::vector<T> prev_in(spec.input_size(), zero);
    std::vector<std::vector<std::pair<std::size_t, T>>> ev(layers);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        ev[0].clear();
        for (std::size_t j = 0; j < frames[f].size(); ++j) {
            const T x = A::from_bits(round_to_bits(frames[f][j]));
            const T d = A::sub(x, prev_in[j]);
            prev_in[j] = x;
            if (A::nonzero(d)) ev[0].emplace_back(j, d);
        }
        const bool evaluate = (f + 1) % spec.delta_every == 0;
        std::vector<std::vector<double>> levels(layers);
        for (std::size_t l = 1; l < layers; ++l) {
            const std::size_t m = spec.layers[l].size;
            for (std::size_t p = 0; p < spec.projections.size(); ++p) {
                if (spec.projections[p].to != l) continue;
                for (const auto &[j, d] : ev[spec.projections[p].from]) {
                    for (std::size_t i = 0; i < m; ++i) z[l][i] = A::add(z[l][i], A::mul(w[p][j * m + i], d));
                }
            }
            ev[l].clear();
            if (!evaluate) continue;
            levels[l].resize(m);
            for (std::size_t i = 0; i < m; ++i) {
                T n = A::rnd(A::div(A::max(z[l][i], zero), q));
                if (force != nullptr) n = A::lit(force->levels.at(f).at(l).at(i));
                levels[l][i] = A::real(n);
                const T next = A::mul(n, q);
                const T d = A::sub(next, a[l][i]);
                a[l][i] = next;
                if (A::nonzero(d)) ev[l].emplace_back(i, d);
            }
        }
        out.decisions.levels.push_back(levels);
        for (std::size_t l = 1; l < layers; ++l) {
            detail::record<A>(out, f, "z" + std::to_string(l), z[l]);
            detail::record<A>(out, f, "a" + std::to_string(l), a[l]);
        }
        if (evaluate) {
            std::vector<double> o(a.back().size());
            for (std::size_t i = 0; i < o.size(); ++i) o[i] = A::real(a.back()[i]);
            out.outputs.push_back(std::move(o));
        }
    }
    return out;
}

/// Dense network of quantizing ReLU units evaluated frame by frame in double:
/// a = q * round(max(W^T a_prev, 0) / q).
inline std::vector<std::vector<double>> dense_quantized_dnn(const NetworkSpec &spec,
        const std::vector<std::vector<double>> &frames)
{
    const double q = bits_to_double(spec.params.q.bits);
    std::vector<std::vector<double>> outputs;
    for (const auto &frame : frames) {
        std::vector<std::vector<double>> act(spec.layers.size());
        act[0].resize(frame.size());
        for (std::size_t j = 0; j < frame.size(); ++j) act[0][j] = bits_to_double(round_to_bits(frame[j]));
        for (std::size_t l = 1; l < spec.layers.size(); ++l) {
            const std::size_t m = spec.layers[l].size;
            std::vector<double> zsum(m, 0.0);
            for (const auto &p : spec.projections) {
                if (p.to != l) continue;
                for (std::size_t j = 0; j < act[p.from].size(); ++j) {
                    for (std::size_t i = 0; i < m; ++i) {
                        zsum[i] += bits_to_double(p.weights[j * m + i].bits) * act[p.from][j];
                    }
                }
            }
            act[l].resize(m);
            for (std::size_t i = 0; i < m; ++i) act[l][i] = q * std::round(std::max(zsum[i], 0.0) / q);
        }
        outputs.push_back(act.back());
    }
    return outputs;
}

/// e-prop on one input and one hidden IF layer, same order as the core
/// simulator. `force` replays spikes and surrogate-window decisions.
template <class A>
Trajectory run_eprop(const NetworkSpec &spec, const std::vector<std::vector<std::uint32_t>> &spikes,
        const std::vector<std::vector<double>> &errors, const Decisions *force = nullptr)
{
    using T = typename A::T;
    const std::size_t n = spec.layers[0].size;
    const std::size_t m = spec.layers[1].size;
    const std::size_t kc = spec.error_channels;
    const auto &par = spec.params;
    const T vth = A::from_bits(par.vth.bits);
    const T beta = A::from_bits(par.beta.bits);
    const T omb = A::from_bits(par.one_minus_beta.bits);
    const T eta = A::from_bits(par.eta.bits);
    const T half = A::from_bits(par.a1_half.bits);
    const T inv = A::from_bits(par.inv_a1.bits);
    const T one = A::lit(1.0);
    const T zero = A::lit(0.0);

    std::vector<T> w = detail::convert<A>(spec.projections.at(0).weights);
    const std::vector<T> b = detail::convert<A>(spec.error_feedback);
    std::vector<T> v(m, zero), tr(n, zero), e(m * n, zero), sig(m, zero);

    Trajectory out;
    for (std::size_t k = 0; k < spikes.size(); ++k) {
        std::vector<T> flag(n, zero);
        for (auto j : spikes[k]) flag[j] = one;
        for (std::size_t j = 0; j < n; ++j) tr[j] = A::add(A::mul(tr[j], beta), A::mul(flag[j], omb));
        for (auto j : spikes[k]) {
            for (std::size_t i = 0; i < m; ++i) v[i] = A::add(w[j * m + i], v[i]);
        }
        std::vector<bool> window(m * n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                T inside = A::gth(half, A::abs(A::sub(v[i], vth)));
                if (force != nullptr) inside = force->window.at(k).at(i * n + j) ? one : zero;
                window[i * n + j] = A::nonzero(inside);
                const T h = A::mul(inside, inv);
                e[i * n + j] = A::add(e[i * n + j], A::mul(h, tr[j]));
            }
        }
        std::vector<std::vector<std::uint32_t>> fired(2);
        fired[0] = spikes[k];
        for (std::size_t i = 0; i < m; ++i) {
            T s = A::gth(v[i], vth);
            if (force != nullptr) {
                const auto &f = force->spikes.at(k).at(1);
                s = std::binary_search(f.begin(), f.end(), static_cast<std::uint32_t>(i)) ? one : zero;
            }
            v[i] = A::sub(v[i], A::mul(s, v[i]));
            if (A::nonzero(s)) fired[1].push_back(static_cast<std::uint32_t>(i));
        }
        if (!errors.empty() && !errors[k].empty()) {
            std::fill(sig.begin(), sig.end(), zero);
            for (std::size_t c = 0; c < kc; ++c) {
                const T y = A::from_bits(round_to_bits(errors[k][c]));
                if (!A::nonzero(y)) continue;
                for (std::size_t i = 0; i < m; ++i) sig[i] = A::add(sig[i], A::mul(b[c * m + i], y));
            }
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const T step = A::mul(sig[i], A::mul(eta, e[i * n + j]));
                    w[j * m + i] = A::sub(w[j * m + i], step);
                }
            }
        }
        out.decisions.spikes.push_back(fired);
        out.decisions.window.push_back(std::move(window));
        detail::record<A>(out, k, "v1", v);
        detail::record<A>(out, k, "trace0", tr);
        detail::record<A>(out, k, "e", e);
        detail::record<A>(out, k, "L", sig);
        detail::record<A>(out, k, "w:" + spec.projections[0].name, w);
    }
    return out;
}

/// Allowed |bf16 - wide| after `step` + 1 steps: 2^-6 of the state
/// magnitude per started block of 10 steps.
inline double drift_bound(std::size_t step, double magnitude)
{
    const double blocks = std::ceil(static_cast<double>(step + 1) / 10.0);
    return std::ldexp(1.0, -6) * blocks * magnitude;
}

} // namespace seneca::reference
