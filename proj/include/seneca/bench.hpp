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

// Benchmark commands behind seneca-bench. Each returns a Report; the tool
// only parses flags and writes the rendered text.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seneca/energy.hpp"
#include "seneca/hebbian.hpp"
#include "seneca/kernels.hpp"
#include "seneca/network_io.hpp"
#include "seneca/opcount.hpp"
#include "seneca/report.hpp"
#include "seneca/sim.hpp"

namespace seneca {

/// Settings shared by every command.
struct BenchContext {
    EnergyTable table = EnergyTable::defaults();
    std::uint64_t seed = 0;
};

inline Report make_report(const std::string &command, const BenchContext &ctx, const std::string &config)
{
    Report r(command);
    r.meta("config_hash", fnv1a_hex(command + '\n' + config));
    r.meta("seed", std::to_string(ctx.seed));
    r.meta("cost_table_hash", ctx.table.hash());
    return r;
}

// ---------------------------------------------------------------------------

inline Report cmd_kernel_energy(const BenchContext &ctx, const std::string &name, double event_rate)
{
    const MicroKernel k = kernel_by_name(name);
    const double per_iteration = kernel_energy(k, ctx.table, event_rate);
    Report r = make_report("kernel-energy", ctx, name + ' ' + format_fixed(event_rate, 6));
    r.text("kernel", name);
    r.row("event_rate", event_rate, "", 3);
    r.row("instructions", static_cast<std::int64_t>(k.instructions.size()), "");
    r.row("energy_per_iteration", per_iteration, "pJ", 5);
    if (name.rfind("synop:", 0) == 0) {
        const SynOpKernel s = build_synop(parse_synop_name(name));
        r.row("energy_per_synop", s.energy_pj(ctx.table), "pJ", 5);
    }
    for (std::size_t i = 0; i < k.instructions.size(); ++i) {
        const auto &ins = k.instructions[i];
        r.row(std::to_string(i) + ':' + format_instruction(ins), ctx.table.instruction(ins.op));
        if (ins.op == Mnemonic::EVC) {
            r.row(std::to_string(i) + ":EVC_EVENT x rate", (ctx.table.evc_event.pj() * event_rate), "pJ", 5);
        }
    }
    return r;
}

inline Report cmd_kernel_list(const BenchContext &ctx)
{
    Report r = make_report("kernel-energy", ctx, "list");
    for (const auto &name : builtin_kernel_names()) {
        r.row(name, kernel_energy(kernel_by_name(name), ctx.table, 1.0), "pJ", 5);
    }
    return r;
}

// ---------------------------------------------------------------------------

/// The 1/4-event x bf16/int8/int4/int4-full grid. The full-integer cells come
/// from the cost table; their instruction sums are listed beside them.
inline Report cmd_synop_table(const BenchContext &ctx)
{
    Report r = make_report("synop-table", ctx, "");
    for (WeightMode mode : {WeightMode::bf16, WeightMode::int8, WeightMode::int4, WeightMode::int4FullInteger}) {
        for (int events : {1, 4}) {
            const SynOpKernel k = build_synop(SynOpConfig::make(mode, events));
            const std::string cell = std::string(to_string(mode)) + ":" + std::to_string(events);
            r.row(cell, k.energy_pj(ctx.table), "pJ", 5);
            if (mode == WeightMode::int4FullInteger) {
                r.row(cell + ":instruction_sum", k.derived_energy_pj(ctx.table), "pJ", 5);
            }
        }
    }
    r.text("note", "int4full cells are configured per-synop costs (SYNOP_INT4_FULL_1/4); the instruction "
                   "sum of the modeled kernel is lower because it omits the integer state handling the "
                   "measured figures include");
    return r;
}

// ---------------------------------------------------------------------------

inline Report cmd_sd_frame_energy(const BenchContext &ctx, const OpCountSheet &sheet, double delta_event_rate,
        const std::string &source)
{
    const FrameEnergy e = frame_energy(sheet, ctx.table, delta_event_rate);
    Report r = make_report("sd-frame-energy", ctx,
            source + ' ' + format_fixed(sheet.sigma_ops, 3) + ' ' + format_fixed(sheet.delta_evals, 3) + ' ' +
                    format_fixed(delta_event_rate, 6));
    r.text("source", source);
    r.row("sigma_ops", sheet.sigma_ops, "", 0);
    r.row("delta_evals", sheet.delta_evals, "", 0);
    r.row("sigma_energy", e.sigma_uj(), "uJ", 1);
    r.row("delta_energy", e.delta_uj(), "uJ", 1);
    r.row("total_energy", e.total_uj(), "uJ", 1);
    return r;
}

/// `{"event_rates": [r0, r1, ...]}`, one rate per layer.
inline SparsityProfile parse_sparsity(const std::string &text, const std::string &origin)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(origin + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("event_rates") || !j["event_rates"].is_array()) {
        throw ValidationError(origin + ": expected {\"event_rates\": [...]}");
    }
    SparsityProfile p;
    for (const auto &v : j["event_rates"]) {
        if (!v.is_number()) throw ValidationError(origin + ".event_rates: expected numbers");
        p.event_rate.push_back(v.get<double>());
    }
    return p;
}

// ---------------------------------------------------------------------------

struct SweepRequest {
    std::string dataset_path;
    std::vector<std::size_t> hidden = {10, 25, 50, 100, 200};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    HebbianConfig base;
    unsigned jobs = 1;
};

struct SweepReport {
    Report report{"hebbian-sweep"};
    std::vector<SweepPoint> points;
};

/// Columns: M, energy_uJ_per_step, accuracy_mean, accuracy_std.
inline std::string sweep_table_csv(const std::vector<SweepPoint> &points)
{
    std::ostringstream out;
    out << "M,energy_uJ_per_step,accuracy_mean,accuracy_std\n";
    for (const auto &p : points) {
        out << p.hidden << ',' << format_fixed(p.energy_per_step.pj() * 1e-6, 6) << ','
            << format_fixed(p.accuracy_mean, 4) << ',' << format_fixed(p.accuracy_std, 4) << '\n';
    }
    return out.str();
}

inline SweepReport cmd_hebbian_sweep(const BenchContext &ctx, const SweepRequest &req)
{
    const Dataset data = load_digits_csv(req.dataset_path);
    std::ostringstream cfg;
    cfg << "steps=" << req.base.steps << " train=" << req.base.train_count << " test=" << req.base.test_count
        << " eta=" << format_fixed(req.base.eta, 9) << " w_max=" << format_fixed(req.base.w_max, 6) << " M=";
    for (auto m : req.hidden) cfg << m << ';';
    cfg << " seeds=";
    for (auto s : req.seeds) cfg << s << ';';
    cfg << " samples=" << data.size();

    SweepReport out;
    out.points = hebbian_sweep(data, req.base, req.hidden, req.seeds, req.jobs, ctx.table);
    out.report = make_report("hebbian-sweep", ctx, cfg.str());
    for (const auto &p : out.points) {
        const std::string m = "M=" + std::to_string(p.hidden);
        out.report.row(m + ":energy_per_step", p.energy_per_step.pj() * 1e-6, "uJ", 6);
        out.report.row(m + ":accuracy_mean", p.accuracy_mean, "", 4);
        out.report.row(m + ":accuracy_std", p.accuracy_std, "", 4);
        for (const auto &run : p.runs) {
            out.report.row(m + ":seed=" + std::to_string(run.seed) + ":accuracy", run.accuracy, "", 4);
        }
    }
    return out;
}

/// Gnuplot-ready columns: energy (uJ per step), mean accuracy, std, M.
inline std::string sweep_plot_data(const std::vector<SweepPoint> &points)
{
    std::ostringstream out;
    out << "# energy_uJ_per_step accuracy_mean accuracy_std M\n";
    for (const auto &p : points) {
        out << format_fixed(p.energy_per_step.pj() * 1e-6, 6) << ' ' << format_fixed(p.accuracy_mean, 4) << ' '
            << format_fixed(p.accuracy_std, 4) << ' ' << p.hidden << '\n';
    }
    return out.str();
}

/// Accuracy against energy per step, log-scaled energy axis, one marker per M
/// with a standard-deviation bar.
inline std::string sweep_plot_svg(const std::vector<SweepPoint> &points)
{
    const double w = 640, h = 420, left = 70, right = 20, top = 20, bottom = 60;
    double lo = 1e300, hi = 0;
    for (const auto &p : points) {
        const double e = std::max(p.energy_per_step.pj() * 1e-6, 1e-9);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    double llo = std::floor(std::log10(lo)), lhi = std::ceil(std::log10(hi));
    if (lhi <= llo) lhi = llo + 1;
    const auto px = [&](double e) {
        return left + (std::log10(std::max(e, 1e-9)) - llo) / (lhi - llo) * (w - left - right);
    };
    const auto py = [&](double a) { return top + (1.0 - a) * (h - top - bottom); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<g stroke=\"black\" fill=\"none\">\n";
    s << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
      << "\"/>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom << "\"/>\n";
    s << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (double d = llo; d <= lhi + 1e-9; d += 1.0) {
        s << "<text x=\"" << format_fixed(px(std::pow(10.0, d)), 1) << "\" y=\"" << h - bottom + 18
          << "\" text-anchor=\"middle\">1e" << static_cast<int>(d) << "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double a = t / 4.0;
        s << "<text x=\"" << left - 8 << "\" y=\"" << format_fixed(py(a) + 4, 1) << "\" text-anchor=\"end\">"
          << format_fixed(a, 2) << "</text>\n";
    }
    s << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 15
      << "\" text-anchor=\"middle\">energy per step (uJ)</text>\n";
    s << "<text x=\"18\" y=\"" << (top + h - bottom) / 2 << "\" transform=\"rotate(-90 18 "
      << (top + h - bottom) / 2 << ")\" text-anchor=\"middle\">test accuracy</text>\n";
    for (const auto &p : points) {
        const double x = px(p.energy_per_step.pj() * 1e-6);
        s << "<line x1=\"" << format_fixed(x, 1) << "\" y1=\"" << format_fixed(py(p.accuracy_mean - p.accuracy_std), 1)
          << "\" x2=\"" << format_fixed(x, 1) << "\" y2=\"" << format_fixed(py(p.accuracy_mean + p.accuracy_std), 1)
          << "\" stroke=\"steelblue\"/>\n";
        s << "<circle cx=\"" << format_fixed(x, 1) << "\" cy=\"" << format_fixed(py(p.accuracy_mean), 1)
          << "\" r=\"4\" fill=\"steelblue\"/>\n";
        s << "<text x=\"" << format_fixed(x + 6, 1) << "\" y=\"" << format_fixed(py(p.accuracy_mean) - 6, 1)
          << "\">M=" << p.hidden << "</text>\n";
    }
    s << "</g>\n</svg>\n";
    return s.str();
}

// ---------------------------------------------------------------------------

/// Replaces the spec's top-level seed before parsing, so seeded weight blocks
/// follow it.
inline std::string override_spec_seed(const std::string &text, std::uint64_t seed, const std::string &origin)
{
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(origin + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ValidationError(origin + ": expected a JSON object");
    j["seed"] = seed;
    return j.dump();
}

inline Report cmd_run(const BenchContext &ctx, const std::string &spec_path, const std::string &input_path,
        bool override_seed)
{
    std::string spec_text = read_text_file(spec_path);
    if (override_seed) spec_text = override_spec_seed(spec_text, ctx.seed, spec_path);
    const NetworkSpec spec =
            parse_network_spec(spec_text, std::filesystem::path(spec_path).parent_path(), spec_path);
    const std::string input_text = read_text_file(input_path);
    const SimInput input = parse_sim_input(input_text, spec.input_size(), input_path);

    SimOutcome out;
    const bool sd = spec.layers.back().model == NeuronModel::SD;
    if (spec.learning == Learning::eprop) {
        if (input.spikes.empty()) throw ValidationError(input_path + ": e-prop needs spikes");
        out = run_eprop(spec, LabeledStream{input.spikes, input.errors}, ctx.table);
    } else if (sd) {
        if (input.frames.empty()) throw ValidationError(input_path + ": sigma-delta networks need frames");
        out = run_sd_network(spec, input.frames, ctx.table);
    } else {
        if (input.spikes.empty()) throw ValidationError(input_path + ": IF networks need spikes");
        SpikeTrain train = input.spikes;
        if (train.size() < spec.time_steps) train.resize(spec.time_steps);
        out = run_if_network(spec, train, ctx.table);
    }

    Report r = make_report("run", ctx, spec_text + '\n' + input_text);
    r.text("network", spec.name);
    r.text("learning", to_string(spec.learning));
    r.row("steps", static_cast<std::int64_t>(out.steps), "");
    for (std::size_t l = 0; l < out.layer_events.size(); ++l) {
        r.row("layer" + std::to_string(l) + ":events", static_cast<std::int64_t>(out.layer_events[l]), "");
    }
    for (const auto &[name, usage] : out.kernels) {
        r.row(name + ":invocations", static_cast<std::int64_t>(usage.invocations), "");
        r.row(name + ":iterations", static_cast<std::int64_t>(usage.iterations), "");
        r.row(name + ":energy", usage.total());
    }
    r.row("cycles", static_cast<std::int64_t>(out.counts.cycles), "");
    const auto &mem = out.mem_stats[spec.memory_level];
    r.row("memory_reads", static_cast<std::int64_t>(mem.reads), "");
    r.row("memory_writes", static_cast<std::int64_t>(mem.writes), "");
    r.row("dynamic_energy", out.dynamic);
    r.row("leakage_energy", out.leakage);
    r.row("total_energy", out.total());
    r.ledger(out.ledger);
    return r;
}

} // namespace seneca
