#pragma once

// One-level loading-aware leakage estimation of a whole circuit.
//
// PASS A solves every gate in isolation with rail-level inputs and records
// the gate-tunneling current each gate draws from its input nets. Those draws
// are summed per net into loading currents. PASS B re-solves every gate with
// (a) its output net carrying the loading current of its readers and (b)
// each non-primary input at the voltage its driver settles to when that
// driver (inputs at the rails) carries the loading of the net. Loading
// currents are not refreshed from PASS B voltages.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "leakload/device_model.hpp"
#include "leakload/error.hpp"
#include "leakload/gate_library.hpp"
#include "leakload/netlist.hpp"
#include "leakload/node_solver.hpp"
#include "leakload/technology.hpp"

namespace leakload {

/// Relative change of the reported components; nullopt when the nominal
/// value is zero.
struct LdValues {
    std::optional<double> isub;
    std::optional<double> igate;
    std::optional<double> ibtbt;
    std::optional<double> itotal;
};

inline std::optional<double> relative_change(double nominal, double loaded) {
    if (nominal == 0.0) return std::nullopt;
    return (loaded - nominal) / nominal;
}

inline LdValues ld(const LeakageComponents& nominal, const LeakageComponents& loaded) {
    return {relative_change(nominal.isub, loaded.isub), relative_change(nominal.igate(), loaded.igate()),
            relative_change(nominal.ibtbt(), loaded.ibtbt()), relative_change(nominal.itotal(), loaded.itotal())};
}

struct LdMetrics {
    LdValues ld_in;
    LdValues ld_out;
    LdValues ld_all;
};

/// Input, output and combined loading effect of one gate.
inline LdMetrics ld_metrics(const LeakageComponents& nominal, const LeakageComponents& loaded_input_only,
                            const LeakageComponents& loaded_output_only, const LeakageComponents& loaded_all) {
    return {ld(nominal, loaded_input_only), ld(nominal, loaded_output_only), ld(nominal, loaded_all)};
}

/// Per net: current injected into the net by the gate pins of its readers.
struct LoadingCurrents {
    struct Contribution {
        int gate = -1;
        int pin = 0;
        double current = 0.0;  // A into the net
    };
    std::vector<double> total;  // A into the net
    std::vector<std::vector<Contribution>> per_reader;
};

struct GateReport {
    int gate = -1;
    GateType type = GateType::INV;
    std::string name;  // output net
    std::vector<std::uint8_t> input_bits;
    bool output_bit = false;

    LeakageComponents nominal;
    LeakageComponents loaded;  // input and output loading
    std::optional<LeakageComponents> loaded_input_only;
    std::optional<LeakageComponents> loaded_output_only;
    std::vector<LdValues> ld_in_per_input;
    LdValues ld_in;
    LdValues ld_out;
    LdValues ld_all;

    std::vector<double> loaded_input_voltages;
    double nominal_output_voltage = 0.0;
    double loaded_output_voltage = 0.0;
    double max_residual = 0.0;
    bool solver_failed = false;
    std::string failure;
};

struct LoadingReport {
    InputVector vector;
    std::optional<std::uint64_t> seed;
    Environment env;
    bool loading_enabled = true;
    std::vector<GateReport> gates;
    LoadingCurrents loading;
    LeakageComponents total_nominal;
    LeakageComponents total_loaded;
    LdValues ld_total;
    int warnings = 0;
};

struct EstimateOptions {
    bool loading = true;
    // Per-input LD_IN and the input-only solve. Off for bulk sweeps, where
    // only nominal and fully loaded totals are needed.
    bool detailed = true;
};

/// Per-gate device parameters (width ratios folded in), indexed like
/// `Circuit::gates` then like the gate template's transistors.
using GateDeviceTable = std::vector<std::vector<DeviceParams>>;

inline GateDeviceTable bind_circuit(const Circuit& c, const Technology& tech,
                                    const GateLibrary& lib = standard_library()) {
    GateDeviceTable table;
    table.reserve(c.gates.size());
    for (const auto& g : c.gates) table.push_back(bind_devices(lib.template_for(g.type), tech));
    return table;
}

namespace detail {

struct SolvedGate {
    GateOperatingPoint point;
    GateLeakage leakage;
};

class GateSolveCache {
public:
    // Results only depend on the template, the device table row and the
    // numeric inputs; rows are shared when the technology is uniform.
    const SolvedGate* find(const std::string& key) const {
        auto it = map_.find(key);
        return it == map_.end() ? nullptr : &it->second;
    }
    const SolvedGate& insert(std::string key, SolvedGate value) {
        return map_.emplace(std::move(key), std::move(value)).first->second;
    }

private:
    std::unordered_map<std::string, SolvedGate> map_;
};

inline void append_bytes(std::string& key, double x) {
    char buf[sizeof(double)];
    std::memcpy(buf, &x, sizeof(double));
    key.append(buf, sizeof(double));
}

class Estimator {
public:
    Estimator(const Circuit& c, const GateLibrary& lib, const GateDeviceTable& devices, bool uniform,
              const Environment& env, const SolverConfig& cfg)
        : c_(c), lib_(lib), devices_(devices), uniform_(uniform), env_(env), cfg_(cfg) {
        env.validate();
        cfg.validate();
        if (devices.size() != c.gates.size()) throw InvalidInput("device table does not match the circuit");
    }

    SolvedGate solve(int gi, std::span<const double> inputs, double injected, const GateOperatingPoint* warm) {
        const auto& g = c_.gates[static_cast<std::size_t>(gi)];
        const auto& t = lib_.template_for(g.type);
        std::span<const DeviceParams> params = devices_[static_cast<std::size_t>(gi)];
        std::string key;
        if (uniform_) {
            key.push_back(static_cast<char>(g.type));
            append_bytes(key, injected);
            for (double v : inputs) append_bytes(key, v);
            if (const auto* hit = cache_.find(key)) return *hit;
        }
        SolvedGate s;
        s.point = solve_gate(t, params, inputs, injected, env_, cfg_, warm);
        s.leakage = gate_leakage(s.point, t, params, env_);
        if (uniform_) cache_.insert(std::move(key), s);
        return s;
    }

private:
    const Circuit& c_;
    const GateLibrary& lib_;
    const GateDeviceTable& devices_;
    bool uniform_;
    Environment env_;
    SolverConfig cfg_;
    GateSolveCache cache_;
};

inline LoadingReport estimate_impl(const Circuit& c, const InputVector& vector, Estimator& est,
                                   const Environment& env, const EstimateOptions& opt) {

    LoadingReport rep;
    rep.vector = vector;
    rep.env = env;
    rep.loading_enabled = opt.loading;
    const auto logic = simulate_logic(c, vector);
    const std::size_t ng = c.gates.size();

    // PASS A: isolation at rail-level inputs.
    std::vector<std::optional<SolvedGate>> nominal(ng);
    rep.gates.resize(ng);
    for (int gi : c.topo_order) {
        const auto& g = c.gates[static_cast<std::size_t>(gi)];
        auto& gr = rep.gates[static_cast<std::size_t>(gi)];
        gr.gate = gi;
        gr.type = g.type;
        gr.name = c.net_names[static_cast<std::size_t>(g.output)];
        for (int n : g.inputs) gr.input_bits.push_back(logic[static_cast<std::size_t>(n)]);
        gr.output_bit = logic[static_cast<std::size_t>(g.output)] != 0;
        auto rails = rail_voltages(gr.input_bits, env.vdd);
        try {
            nominal[static_cast<std::size_t>(gi)] = est.solve(gi, rails, 0.0, nullptr);
            gr.nominal = nominal[static_cast<std::size_t>(gi)]->leakage.components;
            gr.nominal_output_voltage = nominal[static_cast<std::size_t>(gi)]->point.output_voltage();
        } catch (const SolverError& e) {
            gr.solver_failed = true;
            gr.failure = e.what();
            ++rep.warnings;
        }
    }

    // Loading currents per net from the PASS A draws.
    rep.loading.total.assign(c.net_count(), 0.0);
    rep.loading.per_reader.assign(c.net_count(), {});
    for (std::size_t gi = 0; gi < ng; ++gi) {
        if (!nominal[gi]) continue;
        const auto& g = c.gates[gi];
        for (std::size_t pin = 0; pin < g.inputs.size(); ++pin) {
            double into_net = -nominal[gi]->leakage.input_draw[pin];
            auto net = static_cast<std::size_t>(g.inputs[pin]);
            rep.loading.per_reader[net].push_back({static_cast<int>(gi), static_cast<int>(pin), into_net});
        }
    }
    for (std::size_t n = 0; n < c.net_count(); ++n)
        for (const auto& contrib : rep.loading.per_reader[n]) rep.loading.total[n] += contrib.current;

    if (!opt.loading) {
        for (auto& gr : rep.gates) {
            gr.loaded = gr.nominal;
            gr.loaded_input_voltages = rail_voltages(gr.input_bits, env.vdd);
            gr.loaded_output_voltage = gr.nominal_output_voltage;
        }
    } else {
        // Output-only solves; they also give the loaded voltage of each driven net.
        std::vector<double> net_voltage(c.net_count(), 0.0);
        for (std::size_t n = 0; n < c.net_count(); ++n) net_voltage[n] = logic[n] ? env.vdd : 0.0;
        std::vector<std::optional<SolvedGate>> out_only(ng);
        for (int gi : c.topo_order) {
            auto idx = static_cast<std::size_t>(gi);
            if (!nominal[idx]) continue;
            auto& gr = rep.gates[idx];
            double inj = rep.loading.total[static_cast<std::size_t>(c.gates[idx].output)];
            try {
                if (inj == 0.0) out_only[idx] = nominal[idx];
                else out_only[idx] = est.solve(gi, rail_voltages(gr.input_bits, env.vdd), inj, &nominal[idx]->point);
                net_voltage[static_cast<std::size_t>(c.gates[idx].output)] = out_only[idx]->point.output_voltage();
            } catch (const SolverError& e) {
                gr.solver_failed = true;
                gr.failure = e.what();
                ++rep.warnings;
            }
        }

        for (int gi : c.topo_order) {
            auto idx = static_cast<std::size_t>(gi);
            auto& gr = rep.gates[idx];
            const auto& g = c.gates[idx];
            if (gr.solver_failed || !nominal[idx]) {
                gr.loaded = gr.nominal;
                continue;
            }
            auto rails = rail_voltages(gr.input_bits, env.vdd);
            std::vector<double> perturbed = rails;
            for (std::size_t pin = 0; pin < g.inputs.size(); ++pin) {
                auto net = static_cast<std::size_t>(g.inputs[pin]);
                if (c.driver[net] >= 0) perturbed[pin] = net_voltage[net];
            }
            const double inj = rep.loading.total[static_cast<std::size_t>(g.output)];
            const auto* warm = &nominal[idx]->point;
            try {
                auto all = est.solve(gi, perturbed, inj, warm);
                gr.loaded = all.leakage.components;
                gr.loaded_input_voltages = perturbed;
                gr.loaded_output_voltage = all.point.output_voltage();
                gr.max_residual = all.point.max_residual();
                gr.loaded_output_only = out_only[idx]->leakage.components;
                if (opt.detailed) {
                    gr.loaded_input_only = est.solve(gi, perturbed, 0.0, warm).leakage.components;
                    for (std::size_t pin = 0; pin < g.inputs.size(); ++pin) {
                        if (perturbed[pin] == rails[pin]) {
                            gr.ld_in_per_input.push_back(ld(gr.nominal, gr.nominal));
                            continue;
                        }
                        auto one = rails;
                        one[pin] = perturbed[pin];
                        gr.ld_in_per_input.push_back(ld(gr.nominal, est.solve(gi, one, 0.0, warm).leakage.components));
                    }
                }
            } catch (const SolverError& e) {
                gr.solver_failed = true;
                gr.failure = e.what();
                gr.loaded = gr.nominal;
                gr.loaded_input_only.reset();
                gr.loaded_output_only.reset();
                gr.ld_in_per_input.clear();
                ++rep.warnings;
            }
        }
    }

    for (auto& gr : rep.gates) {
        gr.ld_all = ld(gr.nominal, gr.loaded);
        if (gr.loaded_input_only) gr.ld_in = ld(gr.nominal, *gr.loaded_input_only);
        if (gr.loaded_output_only) gr.ld_out = ld(gr.nominal, *gr.loaded_output_only);
        if (!opt.loading) {
            gr.ld_in = gr.ld_all;
            gr.ld_out = gr.ld_all;
        }
        rep.total_nominal += gr.nominal;
        rep.total_loaded += gr.loaded;
    }
    rep.ld_total = ld(rep.total_nominal, rep.total_loaded);
    return rep;
}

}  // namespace detail

/// Loading-aware estimate with one technology shared by every gate.
inline LoadingReport estimate(const Circuit& c, const InputVector& vector, const Technology& tech,
                              const Environment& env, const SolverConfig& cfg = {}, const EstimateOptions& opt = {},
                              const GateLibrary& lib = standard_library()) {
    tech.validate();
    auto table = bind_circuit(c, tech, lib);
    detail::Estimator est(c, lib, table, true, env, cfg);
    return detail::estimate_impl(c, vector, est, env, opt);
}

/// Estimate with individual device parameters per transistor.
inline LoadingReport estimate(const Circuit& c, const InputVector& vector, const GateDeviceTable& devices,
                              const Environment& env, const SolverConfig& cfg = {}, const EstimateOptions& opt = {},
                              const GateLibrary& lib = standard_library()) {
    detail::Estimator est(c, lib, devices, false, env, cfg);
    return detail::estimate_impl(c, vector, est, env, opt);
}

// ---------------------------------------------------------------------------
// Vector sweeps

inline std::vector<InputVector> random_vectors(const Circuit& c, int count, std::uint64_t seed) {
    if (count < 1) throw InvalidInput("random vector count must be at least 1");
    std::mt19937_64 rng(seed);
    std::vector<InputVector> out(static_cast<std::size_t>(count));
    for (auto& v : out) {
        v.resize(c.input_count());
        std::uint64_t word = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i % 64 == 0) word = rng();
            v[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
        }
    }
    return out;
}

inline constexpr std::size_t kMaxExhaustiveInputs = 20;

inline std::vector<InputVector> exhaustive_vectors(const Circuit& c) {
    const auto n = c.input_count();
    if (n > kMaxExhaustiveInputs) throw InvalidInput("exhaustive enumeration refused for more than 20 inputs");
    std::vector<InputVector> out;
    out.reserve(std::size_t{1} << n);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        InputVector v(n);
        // Bit 0 of the vector is the most significant bit of the counter.
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::uint8_t>((m >> (n - 1 - i)) & 1u);
        out.push_back(std::move(v));
    }
    return out;
}

struct SweepResult {
    std::vector<InputVector> vectors;
    std::optional<std::uint64_t> seed;
    std::vector<LeakageComponents> nominal;  // circuit totals per vector
    std::vector<LeakageComponents> loaded;
    std::vector<LdValues> delta;  // per vector, circuit-level relative change
    LdValues average;             // mean of per-vector deltas
    LdValues maximum;             // signed delta of largest magnitude
    std::size_t min_nominal = 0;  // index of the minimum-leakage vector without loading
    std::size_t min_loaded = 0;   // ... and with loading
    int warnings = 0;

    [[nodiscard]] bool min_vector_changes() const { return min_nominal != min_loaded; }
};

inline SweepResult vector_sweep(const Circuit& c, std::vector<InputVector> vectors, const Technology& tech,
                                const Environment& env, const SolverConfig& cfg = {}, bool loading = true,
                                const GateLibrary& lib = standard_library()) {
    if (vectors.empty()) throw InvalidInput("vector sweep needs at least one vector");
    tech.validate();
    SweepResult out;
    auto table = bind_circuit(c, tech, lib);
    // One solve cache for the whole sweep.
    detail::Estimator est(c, lib, table, true, env, cfg);
    for (const auto& v : vectors) {
        auto rep = detail::estimate_impl(c, v, est, env, {loading, false});
        out.nominal.push_back(rep.total_nominal);
        out.loaded.push_back(rep.total_loaded);
        out.delta.push_back(rep.ld_total);
        out.warnings += rep.warnings;
    }
    out.vectors = std::move(vectors);

    auto reduce = [&](auto member) {
        double sum = 0.0;
        std::size_t n = 0;
        std::optional<double> extreme;
        for (const auto& d : out.delta) {
            const std::optional<double>& x = d.*member;
            if (!x) continue;
            sum += *x;
            ++n;
            if (!extreme || std::fabs(*x) > std::fabs(*extreme)) extreme = *x;
        }
        return std::pair<std::optional<double>, std::optional<double>>{
            n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt, extreme};
    };
    std::tie(out.average.isub, out.maximum.isub) = reduce(&LdValues::isub);
    std::tie(out.average.igate, out.maximum.igate) = reduce(&LdValues::igate);
    std::tie(out.average.ibtbt, out.maximum.ibtbt) = reduce(&LdValues::ibtbt);
    std::tie(out.average.itotal, out.maximum.itotal) = reduce(&LdValues::itotal);

    for (std::size_t i = 1; i < out.vectors.size(); ++i) {
        if (out.nominal[i].itotal() < out.nominal[out.min_nominal].itotal()) out.min_nominal = i;
        if (out.loaded[i].itotal() < out.loaded[out.min_loaded].itotal()) out.min_loaded = i;
    }
    return out;
}

}  // namespace leakload
