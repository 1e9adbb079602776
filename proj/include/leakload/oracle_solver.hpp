#pragma once

// Reference solution: every net and internal node of the circuit solved
// together, with each net's readers drawing gate current at their actual
// voltages. Damped Gauss-Seidel over gates in topological order; each step
// re-solves one gate's output and stack nodes for the reader current seen at
// the current iterate.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "leakload/device_model.hpp"
#include "leakload/error.hpp"
#include "leakload/gate_library.hpp"
#include "leakload/loading_estimator.hpp"
#include "leakload/netlist.hpp"
#include "leakload/node_solver.hpp"
#include "leakload/technology.hpp"

namespace leakload {

struct OracleConfig {
    double tolerance = 1e-13;  // V, largest undamped change in a sweep
    int max_iterations = 500;
    double damping = 0.7;
    SolverConfig gate{1e-17, 1e-13, 200, 100};

    void validate() const {
        if (!(tolerance > 0) || !std::isfinite(tolerance)) throw InvalidInput("oracle tolerance must be positive");
        if (max_iterations < 1) throw InvalidInput("oracle max_iterations must be at least 1");
        if (!(damping > 0.0 && damping <= 1.0)) throw InvalidInput("oracle damping must lie in (0, 1]");
        gate.validate();
    }
};

struct OracleSolution {
    InputVector vector;
    Environment env;
    std::vector<double> net_voltages;
    std::vector<std::vector<double>> gate_voltages;  // local node vectors, rails included
    std::vector<LeakageComponents> gate_leakage;
    LeakageComponents total;
    int iterations = 0;
    double last_change = 0.0;   // V
    double max_residual = 0.0;  // A, over every net and internal node
    bool converged = false;
    std::string diagnostic;
};

namespace detail {

class OracleState {
public:
    OracleState(const Circuit& c, const GateDeviceTable& devices, const GateLibrary& lib, const Environment& env)
        : c_(c), devices_(devices), lib_(lib), env_(env) {}

    const GateTemplate& tmpl(std::size_t gi) const { return lib_.template_for(c_.gates[gi].type); }

    void load_inputs(std::size_t gi, std::vector<double>& local, const std::vector<double>& nets) const {
        const auto& g = c_.gates[gi];
        for (std::size_t p = 0; p < g.inputs.size(); ++p) local[p] = nets[static_cast<std::size_t>(g.inputs[p])];
        local[g.inputs.size()] = nets[static_cast<std::size_t>(g.output)];
    }

    // Current flowing into `net` from the gate pins of its readers.
    double reader_current(int net, std::vector<std::vector<double>>& locals, const std::vector<double>& nets) const {
        double into = 0.0;
        for (int r : c_.fanout[static_cast<std::size_t>(net)]) {
            auto ri = static_cast<std::size_t>(r);
            load_inputs(ri, locals[ri], nets);
        }
        // A reader on several pins of the net is listed once per pin.
        for (std::size_t k = 0; k < c_.fanout[static_cast<std::size_t>(net)].size(); ++k) {
            int r = c_.fanout[static_cast<std::size_t>(net)][k];
            bool dup = false;
            for (std::size_t j = 0; j < k; ++j) dup = dup || c_.fanout[static_cast<std::size_t>(net)][j] == r;
            if (dup) continue;
            auto ri = static_cast<std::size_t>(r);
            const auto& g = c_.gates[ri];
            const auto& t = tmpl(ri);
            for (std::size_t p = 0; p < g.inputs.size(); ++p)
                if (g.inputs[p] == net)
                    into -= node_current(t, devices_[ri], locals[ri], static_cast<int>(p), env_.temperature);
        }
        return into;
    }

private:
    const Circuit& c_;
    const GateDeviceTable& devices_;
    const GateLibrary& lib_;
    Environment env_;
};

inline OracleSolution solve_full_impl(const Circuit& c, const InputVector& vector, const GateDeviceTable& devices,
                                      const Environment& env, const OracleConfig& cfg, const GateLibrary& lib) {
    env.validate();
    cfg.validate();
    if (devices.size() != c.gates.size()) throw InvalidInput("device table does not match the circuit");
    OracleSolution sol;
    sol.vector = vector;
    sol.env = env;
    const auto logic = simulate_logic(c, vector);
    const std::size_t ng = c.gates.size();
    OracleState state(c, devices, lib, env);

    sol.net_voltages.resize(c.net_count());
    for (std::size_t n = 0; n < c.net_count(); ++n) sol.net_voltages[n] = logic[n] ? env.vdd : 0.0;
    sol.gate_voltages.resize(ng);
    std::vector<GateOperatingPoint> points(ng);
    for (std::size_t gi = 0; gi < ng; ++gi) {
        const auto& t = state.tmpl(gi);
        auto& local = sol.gate_voltages[gi];
        local.assign(static_cast<std::size_t>(t.node_count()), 0.0);
        state.load_inputs(gi, local, sol.net_voltages);
        local[static_cast<std::size_t>(t.vdd_node())] = env.vdd;
        detail::initial_guess(t, local, env.vdd);
        points[gi].voltages = local;
        points[gi].inputs = t.inputs;
    }

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        sol.iterations = it;
        double change = 0.0;
        for (int gi_int : c.topo_order) {
            auto gi = static_cast<std::size_t>(gi_int);
            const auto& g = c.gates[gi];
            const auto& t = state.tmpl(gi);
            auto& local = sol.gate_voltages[gi];
            state.load_inputs(gi, local, sol.net_voltages);
            double inj = state.reader_current(g.output, sol.gate_voltages, sol.net_voltages);
            std::vector<double> inputs(local.begin(), local.begin() + t.inputs);
            GateOperatingPoint pt;
            try {
                points[gi].voltages = local;
                pt = solve_gate(t, devices[gi], inputs, inj, env, cfg.gate, &points[gi]);
            } catch (const SolverError& e) {
                sol.diagnostic = "gate " + c.net_names[static_cast<std::size_t>(g.output)] + ": " + e.what();
                sol.converged = false;
                return sol;
            }
            // Only the output couples gates; stack nodes take the solved values.
            for (int node = t.inputs; node < t.vdd_node(); ++node) {
                auto k = static_cast<std::size_t>(node);
                double delta = pt.voltages[k] - local[k];
                change = std::max(change, std::fabs(delta));
                local[k] = node == t.output_node() ? local[k] + cfg.damping * delta : pt.voltages[k];
            }
            sol.net_voltages[static_cast<std::size_t>(g.output)] = local[static_cast<std::size_t>(t.output_node())];
            points[gi].voltages = local;
        }
        sol.last_change = change;
        if (change < cfg.tolerance) {
            sol.converged = true;
            break;
        }
    }
    if (!sol.converged)
        sol.diagnostic = "no convergence after " + std::to_string(cfg.max_iterations) + " sweeps (last change " +
                         text::format_double(sol.last_change) + " V)";

    // Residuals and leakage at the final iterate.
    sol.gate_leakage.resize(ng);
    sol.max_residual = 0.0;
    for (std::size_t gi = 0; gi < ng; ++gi) {
        const auto& g = c.gates[gi];
        const auto& t = state.tmpl(gi);
        auto& local = sol.gate_voltages[gi];
        state.load_inputs(gi, local, sol.net_voltages);
        double out = state.reader_current(g.output, sol.gate_voltages, sol.net_voltages) -
                     node_current(t, devices[gi], local, t.output_node(), env.temperature);
        sol.max_residual = std::max(sol.max_residual, std::fabs(out));
        for (int i = 0; i < t.internal_count(); ++i)
            sol.max_residual = std::max(
                sol.max_residual, std::fabs(node_current(t, devices[gi], local, t.internal_node(i), env.temperature)));
        GateOperatingPoint pt;
        pt.voltages = local;
        pt.inputs = t.inputs;
        sol.gate_leakage[gi] = gate_leakage(pt, t, devices[gi], env).components;
        sol.total += sol.gate_leakage[gi];
    }
    return sol;
}

}  // namespace detail

inline OracleSolution solve_full(const Circuit& c, const InputVector& vector, const Technology& tech,
                                 const Environment& env, const OracleConfig& cfg = {},
                                 const GateLibrary& lib = standard_library()) {
    tech.validate();
    auto table = bind_circuit(c, tech, lib);
    return detail::solve_full_impl(c, vector, table, env, cfg, lib);
}

inline OracleSolution solve_full(const Circuit& c, const InputVector& vector, const GateDeviceTable& devices,
                                 const Environment& env, const OracleConfig& cfg = {},
                                 const GateLibrary& lib = standard_library()) {
    return detail::solve_full_impl(c, vector, devices, env, cfg, lib);
}

/// Relative error of the estimate against the oracle, (estimate - oracle) / oracle.
struct Comparison {
    std::vector<LdValues> per_gate;
    LdValues total;
    int worst_gate = -1;     // largest |itotal| error
    double worst_error = 0.0;
};

inline Comparison compare(const OracleSolution& oracle, const LoadingReport& report) {
    if (oracle.gate_leakage.size() != report.gates.size())
        throw InvalidInput("oracle solution and report cover different circuits");
    if (oracle.vector != report.vector) throw InvalidInput("oracle solution and report use different vectors");
    if (oracle.env.temperature != report.env.temperature || oracle.env.vdd != report.env.vdd)
        throw InvalidInput("oracle solution and report use different environments");
    Comparison out;
    for (std::size_t gi = 0; gi < report.gates.size(); ++gi) {
        out.per_gate.push_back(ld(oracle.gate_leakage[gi], report.gates[gi].loaded));
        const auto& e = out.per_gate.back().itotal;
        if (e && std::fabs(*e) >= std::fabs(out.worst_error)) {
            if (out.worst_gate < 0 || std::fabs(*e) > std::fabs(out.worst_error)) out.worst_gate = static_cast<int>(gi);
            out.worst_error = *e;
        }
    }
    out.total = ld(oracle.total, report.total_loaded);
    return out;
}

}  // namespace leakload
