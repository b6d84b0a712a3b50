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

// JSON form of NetworkSpec and of simulation inputs.
//
// Weight blocks are given inline or by reference:
//   {"values": [..]}                       explicit list
//   {"constant": 0.5}                      one value everywhere
//   {"uniform": [lo, hi], "seed": 7}       seeded uniform draw
//   {"image": "w.bin", "manifest": "w.txt", "symbol": "fwd"}
// Relative image paths resolve against the spec file's directory.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seneca/errors.hpp"
#include "seneca/memory.hpp"
#include "seneca/network.hpp"
#include "seneca/sim.hpp"

namespace seneca {

namespace json_detail {

using nlohmann::json;

inline const json &require(const json &j, const char *key, const std::string &where)
{
    if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
    return j.at(key);
}

template <class T>
T get_as(const json &j, const std::string &where)
{
    try {
        return j.get<T>();
    } catch (const json::exception &) {
        throw ValidationError(where + ": wrong type (" + std::string(j.type_name()) + ")");
    }
}

template <class T>
T value_or(const json &j, const char *key, T fallback, const std::string &where)
{
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return get_as<T>(j.at(key), where + "." + key);
}

inline std::size_t get_size(const json &j, const std::string &where)
{
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
        throw ValidationError(where + ": expected a non-negative integer");
    }
    return j.get<std::size_t>();
}

inline NeuronModel parse_model(const std::string &s, const std::string &where)
{
    if (s == "input") return NeuronModel::input;
    if (s == "IF") return NeuronModel::IF;
    if (s == "SD") return NeuronModel::SD;
    throw ValidationError(where + ": unknown neuron model '" + s + "' (input, IF, SD)");
}

inline Learning parse_learning(const std::string &s, const std::string &where)
{
    if (s == "none") return Learning::none;
    if (s == "hebbian") return Learning::hebbian;
    if (s == "eprop") return Learning::eprop;
    throw ValidationError(where + ": unknown learning '" + s + "' (none, hebbian, eprop)");
}

inline ProjectionKind parse_kind(const std::string &s, const std::string &where)
{
    if (s == "forward") return ProjectionKind::forward;
    if (s == "recurrent") return ProjectionKind::recurrent;
    if (s == "feedback") return ProjectionKind::feedback;
    throw ValidationError(where + ": unknown projection kind '" + s + "'");
}

inline Connectivity parse_connectivity(const std::string &s, const std::string &where)
{
    if (s == "dense") return Connectivity::dense;
    if (s == "one_to_one") return Connectivity::one_to_one;
    if (s == "conv") return Connectivity::conv;
    throw ValidationError(where + ": unknown connectivity '" + s + "' (dense, one_to_one, conv)");
}

inline MemoryLevel parse_level(const std::string &s, const std::string &where)
{
    if (s == "registerFile") return MemoryLevel::registerFile;
    if (s == "localSram") return MemoryLevel::localSram;
    if (s == "sharedMem") return MemoryLevel::sharedMem;
    throw ValidationError(where + ": unknown memory level '" + s + "'");
}

inline std::vector<Value16> symbol_values(const MemoryImage &image, const ImageSymbol &sym)
{
    std::vector<Value16> out;
    out.reserve(sym.count);
    if (sym.mode == PackMode::bf16) {
        for (std::size_t i = 0; i < sym.count; ++i) out.push_back(Value16::from_bits(image.words[sym.address + i]));
        return out;
    }
    const auto lanes = static_cast<std::size_t>(lane_count(sym.mode));
    for (std::size_t i = 0; i < sym.count; ++i) {
        const PackedWord w{image.words[sym.address + i / lanes], sym.mode};
        out.push_back(bf16(static_cast<double>(w.lane(static_cast<int>(i % lanes)))));
    }
    return out;
}

inline std::vector<Value16> weight_block(const json &src, std::size_t count, const std::filesystem::path &base,
        std::uint64_t default_seed, const std::string &where)
{
    if (!src.is_object()) throw ValidationError(where + ": expected a weight source object");
    std::vector<Value16> out;
    if (src.contains("values")) {
        const auto &v = src.at("values");
        if (!v.is_array()) throw ValidationError(where + ".values: expected an array");
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(bf16(get_as<double>(v[i], where + ".values[" + std::to_string(i) + "]")));
        }
    } else if (src.contains("constant")) {
        out = constant_weights(count, get_as<double>(src.at("constant"), where + ".constant"));
    } else if (src.contains("uniform")) {
        const auto &u = src.at("uniform");
        if (!u.is_array() || u.size() != 2) throw ValidationError(where + ".uniform: expected [lo, hi]");
        const double lo = get_as<double>(u[0], where + ".uniform[0]");
        const double hi = get_as<double>(u[1], where + ".uniform[1]");
        if (!(lo <= hi)) throw ValidationError(where + ".uniform: lo must not exceed hi");
        out = uniform_weights(count, lo, hi, value_or<std::uint64_t>(src, "seed", default_seed, where));
    } else if (src.contains("image")) {
        auto resolve = [&](const char *key) {
            std::filesystem::path p = get_as<std::string>(require(src, key, where), where + "." + key);
            return (p.is_relative() ? base / p : p).string();
        };
        const MemoryImage image = load_image(resolve("image"), resolve("manifest"));
        const std::string sym = get_as<std::string>(require(src, "symbol", where), where + ".symbol");
        out = symbol_values(image, image.symbol(sym));
    } else {
        throw ValidationError(where + ": weight source needs one of values, constant, uniform, image");
    }
    if (out.size() != count) {
        throw ValidationError(where + ": expected " + std::to_string(count) + " weights, got " +
                std::to_string(out.size()));
    }
    return out;
}

} // namespace json_detail

/// Builds a NetworkSpec from JSON text. `base_dir` anchors relative image paths.
inline NetworkSpec parse_network_spec(const std::string &text, const std::filesystem::path &base_dir = {},
        const std::string &origin = "spec")
{
    using namespace json_detail;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ValidationError(origin + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ValidationError(origin + ": top level must be an object");

    NetworkSpec spec;
    spec.name = value_or<std::string>(j, "name", spec.name, origin);
    spec.seed = value_or<std::uint64_t>(j, "seed", 0, origin);
    spec.time_steps = value_or<std::size_t>(j, "time_steps", 1, origin);
    spec.delta_every = value_or<std::size_t>(j, "delta_every", 1, origin);
    spec.learning = parse_learning(value_or<std::string>(j, "learning", "none", origin), origin + ".learning");
    spec.lane_count = value_or<int>(j, "lane_count", 8, origin);
    spec.memory_bits = value_or<std::size_t>(j, "memory_bits", kDefaultCapacityBits, origin);
    spec.memory_level = parse_level(value_or<std::string>(j, "memory_level", "localSram", origin), origin + ".memory_level");
    if (j.contains("clip_w_max") && !j.at("clip_w_max").is_null()) {
        spec.clip_w_max = get_as<double>(j.at("clip_w_max"), origin + ".clip_w_max");
    }

    const auto &layers = require(j, "layers", origin);
    if (!layers.is_array()) throw ValidationError(origin + ".layers: expected an array");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string where = origin + ".layers[" + std::to_string(l) + "]";
        LayerSpec ls;
        ls.size = get_size(require(layers[l], "size", where), where + ".size");
        ls.model = parse_model(value_or<std::string>(layers[l], "model", l == 0 ? "input" : "IF", where), where + ".model");
        spec.layers.push_back(ls);
    }

    if (j.contains("params")) {
        const auto &p = j.at("params");
        const std::string where = origin + ".params";
        spec.params = KernelParams::from_reals(value_or<double>(p, "vth", 1.0, where),
                value_or<double>(p, "q", 1.0, where), value_or<double>(p, "eta", 0.01, where),
                value_or<double>(p, "beta", 0.9, where), value_or<double>(p, "a1", 1.0, where));
    }
    if (j.contains("synop")) {
        const auto &s = j.at("synop");
        const std::string where = origin + ".synop";
        spec.synop = SynOpConfig::make(parse_weight_mode(value_or<std::string>(s, "weight_mode", "bf16", where)),
                value_or<int>(s, "events", 1, where));
        if (s.contains("scale") && !s.at("scale").is_null()) {
            spec.synop.weight_scale = bf16(get_as<double>(s.at("scale"), where + ".scale"));
        }
    }

    const auto size_of = [&](std::size_t layer, const std::string &where) {
        if (layer >= spec.layers.size()) throw ValidationError(where + ": layer " + std::to_string(layer) + " does not exist");
        return spec.layers[layer].size;
    };
    if (j.contains("projections")) {
        const auto &projs = j.at("projections");
        if (!projs.is_array()) throw ValidationError(origin + ".projections: expected an array");
        for (std::size_t i = 0; i < projs.size(); ++i) {
            const auto &pj = projs[i];
            Projection p;
            p.name = value_or<std::string>(pj, "name", "p" + std::to_string(i), origin);
            const std::string where = origin + ".projections[" + p.name + "]";
            p.from = get_size(require(pj, "from", where), where + ".from");
            p.to = get_size(require(pj, "to", where), where + ".to");
            p.kind = parse_kind(value_or<std::string>(pj, "kind", "forward", where), where + ".kind");
            p.connectivity = parse_connectivity(value_or<std::string>(pj, "connectivity", "dense", where), where + ".connectivity");
            p.plastic = value_or<bool>(pj, "plastic", false, where);
            if (p.connectivity == Connectivity::conv) {
                const auto &c = require(pj, "conv", where);
                ConvDescriptor d;
                d.in_channels = value_or<std::size_t>(c, "in_channels", 1, where + ".conv");
                d.out_channels = value_or<std::size_t>(c, "out_channels", 1, where + ".conv");
                d.kernel = value_or<std::size_t>(c, "kernel", 3, where + ".conv");
                d.stride = value_or<std::size_t>(c, "stride", 1, where + ".conv");
                if (d.kernel == 0 || d.stride == 0) throw ValidationError(where + ".conv: kernel and stride must be positive");
                p.conv = d;
            } else {
                const std::size_t n_from = size_of(p.from, where + ".from");
                const std::size_t n_to = size_of(p.to, where + ".to");
                const std::size_t count = p.connectivity == Connectivity::dense ? n_from * n_to : n_from;
                p.weights = weight_block(require(pj, "weights", where), count, base_dir,
                        spec.seed + 0x100 * (i + 1), where + ".weights");
            }
            spec.projections.push_back(std::move(p));
        }
    }
    if (spec.learning == Learning::eprop) {
        spec.error_channels = get_size(require(j, "error_channels", origin), origin + ".error_channels");
        if (spec.layers.size() < 2) throw ValidationError(origin + ": e-prop needs a hidden layer");
        spec.error_feedback = weight_block(require(j, "error_feedback", origin),
                spec.error_channels * spec.layers[1].size, base_dir, spec.seed + 0xFEED, origin + ".error_feedback");
    }
    spec.validate();
    return spec;
}

inline std::string read_text_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline NetworkSpec load_network_spec(const std::string &path)
{
    return parse_network_spec(read_text_file(path), std::filesystem::path(path).parent_path(), path);
}

/// Simulation input: spikes (explicit or Poisson-encoded), frames, errors.
struct SimInput {
    SpikeTrain spikes;
    FrameSequence frames;
    std::vector<std::vector<double>> errors;
};

inline SimInput parse_sim_input(const std::string &text, std::size_t input_size, const std::string &origin = "input")
{
    using namespace json_detail;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ValidationError(origin + ": invalid JSON: " + e.what());
    }
    SimInput in;
    if (j.contains("spikes")) {
        const auto &s = j.at("spikes");
        if (!s.is_array()) throw ValidationError(origin + ".spikes: expected an array of steps");
        for (std::size_t k = 0; k < s.size(); ++k) {
            const std::string where = origin + ".spikes[" + std::to_string(k) + "]";
            std::vector<std::uint32_t> step;
            if (!s[k].is_array()) throw ValidationError(where + ": expected an array of indices");
            for (const auto &idx : s[k]) step.push_back(static_cast<std::uint32_t>(get_size(idx, where)));
            in.spikes.push_back(std::move(step));
        }
    } else if (j.contains("poisson")) {
        const auto &p = j.at("poisson");
        const std::string where = origin + ".poisson";
        const auto values = get_as<std::vector<double>>(require(p, "values", where), where + ".values");
        if (values.size() != input_size) {
            throw ValidationError(where + ".values: expected " + std::to_string(input_size) + " intensities");
        }
        in.spikes = poisson_encode(values, get_size(require(p, "steps", where), where + ".steps"),
                value_or<std::uint64_t>(p, "seed", 0, where));
    }
    if (j.contains("frames")) {
        in.frames = get_as<FrameSequence>(j.at("frames"), origin + ".frames");
    }
    if (j.contains("errors")) {
        in.errors = get_as<std::vector<std::vector<double>>>(j.at("errors"), origin + ".errors");
    }
    if (in.spikes.empty() && in.frames.empty()) {
        throw ValidationError(origin + ": needs 'spikes', 'poisson' or 'frames'");
    }
    return in;
}

} // namespace seneca
