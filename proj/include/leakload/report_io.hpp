#pragma once

// JSON and CSV serialization of estimator, sweep, oracle, Monte Carlo and
// characterization results. Numbers in CSV use the shortest round-trip form.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "leakload/characterize.hpp"
#include "leakload/loading_estimator.hpp"
#include "leakload/netlist.hpp"
#include "leakload/oracle_solver.hpp"
#include "leakload/text_util.hpp"
#include "leakload/variation.hpp"

namespace leakload::io {

using nlohmann::ordered_json;

struct RunInfo {
    std::string netlist;
    std::string preset;
    std::optional<std::uint64_t> seed;
};

inline ordered_json to_json(const LeakageComponents& c) {
    return {{"isub", c.isub},
            {"igc", c.igc},
            {"igso", c.igso},
            {"igdo", c.igdo},
            {"igb", c.igb},
            {"ibtbt_drain", c.ibtbt_drain},
            {"ibtbt_source", c.ibtbt_source},
            {"igate", c.igate()},
            {"ibtbt", c.ibtbt()},
            {"itotal", c.itotal()}};
}

inline ordered_json to_json(const std::optional<double>& x) { return x ? ordered_json(*x) : ordered_json(nullptr); }

inline ordered_json to_json(const LdValues& v) {
    return {{"isub", to_json(v.isub)}, {"igate", to_json(v.igate)}, {"ibtbt", to_json(v.ibtbt)},
            {"itotal", to_json(v.itotal)}};
}

inline ordered_json run_json(const RunInfo& info, const Environment& env) {
    ordered_json j;
    j["netlist"] = info.netlist;
    j["preset"] = info.preset;
    j["temperature"] = env.temperature;
    j["vdd"] = env.vdd;
    j["seed"] = info.seed ? ordered_json(*info.seed) : ordered_json(nullptr);
    return j;
}

inline ordered_json report_json(const LoadingReport& r, const Circuit& c, const RunInfo& info) {
    ordered_json j;
    j["run"] = run_json(info, r.env);
    j["vector"] = format_vector(r.vector);
    j["loading"] = r.loading_enabled;
    j["warnings"] = r.warnings;
    j["total_nominal"] = to_json(r.total_nominal);
    j["total_loaded"] = to_json(r.total_loaded);
    j["ld_total"] = to_json(r.ld_total);
    ordered_json gates = ordered_json::array();
    for (const auto& g : r.gates) {
        ordered_json gj;
        gj["name"] = g.name;
        gj["type"] = to_string(g.type);
        std::string bits;
        for (auto b : g.input_bits) bits.push_back(b ? '1' : '0');
        gj["inputs"] = bits;
        gj["output"] = g.output_bit ? 1 : 0;
        gj["nominal"] = to_json(g.nominal);
        gj["loaded"] = to_json(g.loaded);
        gj["ld_all"] = to_json(g.ld_all);
        gj["ld_out"] = to_json(g.ld_out);
        ordered_json ld_in = ordered_json::array();
        for (const auto& v : g.ld_in_per_input) ld_in.push_back(to_json(v));
        gj["ld_in"] = ld_in;
        gj["input_voltages"] = g.loaded_input_voltages;
        gj["output_voltage_nominal"] = g.nominal_output_voltage;
        gj["output_voltage_loaded"] = g.loaded_output_voltage;
        gj["loading_current"] = r.loading.total[static_cast<std::size_t>(c.gates[static_cast<std::size_t>(g.gate)].output)];
        gj["solver_failed"] = g.solver_failed;
        if (g.solver_failed) gj["failure"] = g.failure;
        gates.push_back(std::move(gj));
    }
    j["gates"] = std::move(gates);
    return j;
}

namespace detail {

inline std::string num(double x) { return text::format_double(x); }
inline std::string num(const std::optional<double>& x) { return x ? text::format_double(*x) : ""; }

inline void components_cells(std::string& row, const LeakageComponents& c) {
    row += "," + num(c.isub) + "," + num(c.igate()) + "," + num(c.ibtbt()) + "," + num(c.itotal());
}

inline void ld_cells(std::string& row, const LdValues& v) {
    row += "," + num(v.isub) + "," + num(v.igate) + "," + num(v.ibtbt) + "," + num(v.itotal);
}

}  // namespace detail

/// Per-gate table. Empty LD cells mark undefined ratios (zero nominal).
inline std::string gates_csv(const LoadingReport& r) {
    std::string out =
        "gate,type,inputs,output,nom_isub,nom_igate,nom_ibtbt,nom_itotal,"
        "ld_isub,ld_igate,ld_ibtbt,ld_itotal,ldall_isub,ldall_igate,ldall_ibtbt,ldall_itotal,"
        "ldout_itotal,vout_nominal,vout_loaded,solver_failed\n";
    for (const auto& g : r.gates) {
        std::string row = g.name + "," + to_string(g.type) + ",";
        for (auto b : g.input_bits) row.push_back(b ? '1' : '0');
        row += g.output_bit ? ",1" : ",0";
        detail::components_cells(row, g.nominal);
        detail::components_cells(row, g.loaded);
        detail::ld_cells(row, g.ld_all);
        row += "," + detail::num(g.ld_out.itotal);
        row += "," + detail::num(g.nominal_output_voltage) + "," + detail::num(g.loaded_output_voltage);
        row += g.solver_failed ? ",1\n" : ",0\n";
        out += row;
    }
    return out;
}

inline std::string sweep_csv(const SweepResult& s) {
    std::string out =
        "vector,nom_isub,nom_igate,nom_ibtbt,nom_itotal,ld_isub,ld_igate,ld_ibtbt,ld_itotal,"
        "delta_isub,delta_igate,delta_ibtbt,delta_itotal\n";
    for (std::size_t i = 0; i < s.vectors.size(); ++i) {
        std::string row = format_vector(s.vectors[i]);
        detail::components_cells(row, s.nominal[i]);
        detail::components_cells(row, s.loaded[i]);
        detail::ld_cells(row, s.delta[i]);
        out += row + "\n";
    }
    return out;
}

inline ordered_json sweep_json(const SweepResult& s, const RunInfo& info, const Environment& env) {
    ordered_json j;
    j["run"] = run_json(info, env);
    j["vectors"] = s.vectors.size();
    j["average_delta"] = to_json(s.average);
    j["maximum_delta"] = to_json(s.maximum);
    j["min_vector_nominal"] = format_vector(s.vectors[s.min_nominal]);
    j["min_vector_loaded"] = format_vector(s.vectors[s.min_loaded]);
    j["min_vector_changes"] = s.min_vector_changes();
    j["warnings"] = s.warnings;
    return j;
}

inline ordered_json oracle_json(const OracleSolution& o, const Comparison& cmp, const Circuit& c) {
    ordered_json j;
    j["converged"] = o.converged;
    j["iterations"] = o.iterations;
    j["max_residual"] = o.max_residual;
    if (!o.diagnostic.empty()) j["diagnostic"] = o.diagnostic;
    j["total"] = to_json(o.total);
    j["relative_error_total"] = to_json(cmp.total);
    j["worst_gate"] = cmp.worst_gate >= 0
                          ? ordered_json(c.net_names[static_cast<std::size_t>(
                                c.gates[static_cast<std::size_t>(cmp.worst_gate)].output)])
                          : ordered_json(nullptr);
    j["worst_gate_error"] = cmp.worst_error;
    ordered_json nets = ordered_json::object();
    for (std::size_t n = 0; n < c.net_count(); ++n) nets[c.net_names[n]] = o.net_voltages[n];
    j["net_voltages"] = std::move(nets);
    return j;
}

inline std::string statistics_header() { return "quantity,mode,mean,stddev,min,max,p1,p50,p99\n"; }

inline std::string montecarlo_summary_csv(const MonteCarloResult& r) {
    std::string out = statistics_header();
    auto add = [&](const char* q, const char* mode, const Statistics& s) {
        out += std::string(q) + "," + mode + "," + detail::num(s.mean) + "," + detail::num(s.stddev) + "," +
               detail::num(s.min) + "," + detail::num(s.max) + "," + detail::num(s.p1) + "," + detail::num(s.p50) +
               "," + detail::num(s.p99) + "\n";
    };
    for (const auto& [mode, d] : {std::pair{"loaded", &r.loaded}, std::pair{"unloaded", &r.unloaded}}) {
        add("isub", mode, d->isub);
        add("igate", mode, d->igate);
        add("ibtbt", mode, d->ibtbt);
        add("itotal", mode, d->itotal);
    }
    return out;
}

inline std::string montecarlo_histogram_csv(const MonteCarloResult& r) {
    std::string out = "mode,bin,lo,hi,count\n";
    for (const auto& [mode, s] :
         {std::pair{"loaded", &r.loaded.itotal}, std::pair{"unloaded", &r.unloaded.itotal}}) {
        const auto& h = s->histogram;
        const auto bins = h.counts.size();
        for (std::size_t b = 0; b < bins; ++b) {
            double lo = h.lo + (h.hi - h.lo) * static_cast<double>(b) / static_cast<double>(bins);
            double hi = h.lo + (h.hi - h.lo) * static_cast<double>(b + 1) / static_cast<double>(bins);
            out += std::string(mode) + "," + std::to_string(b) + "," + detail::num(lo) + "," + detail::num(hi) + "," +
                   std::to_string(h.counts[b]) + "\n";
        }
    }
    return out;
}

inline ordered_json to_json(const Statistics& s) {
    return {{"mean", s.mean}, {"stddev", s.stddev}, {"min", s.min}, {"max", s.max},
            {"p1", s.p1},     {"p50", s.p50},       {"p99", s.p99}};
}

inline ordered_json montecarlo_json(const MonteCarloResult& r, const RunInfo& info, const Environment& env) {
    ordered_json j;
    j["run"] = run_json(info, env);
    const auto& s = r.spec;
    j["spec"] = {{"samples", s.samples},
                 {"seed", s.seed},
                 {"inter", {{"vth0", s.inter.vth0}, {"l", s.inter.l}, {"tox", s.inter.tox}, {"vdd", s.inter.vdd}}},
                 {"intra", {{"vth0", s.intra.vth0}, {"l", s.intra.l}, {"tox", s.intra.tox}}},
                 {"mapping", {{"l_to_vth", s.l_to_vth}, {"tox_to_vth", s.tox_to_vth}, {"tox_beta", s.tox_beta}}}};
    j["failures"] = r.failures;
    for (const auto& [mode, d] : {std::pair{"loaded", &r.loaded}, std::pair{"unloaded", &r.unloaded}})
        j[mode] = {{"isub", to_json(d->isub)},
                   {"igate", to_json(d->igate)},
                   {"ibtbt", to_json(d->ibtbt)},
                   {"itotal", to_json(d->itotal)}};
    j["stddev_ratio"] = r.unloaded.itotal.stddev > 0 ? ordered_json(r.loaded.itotal.stddev / r.unloaded.itotal.stddev)
                                                     : ordered_json(nullptr);
    return j;
}

inline std::string montecarlo_samples_csv(const MonteCarloResult& r) {
    std::string out = "sample,itotal_loaded,itotal_unloaded\n";
    for (std::size_t i = 0; i < r.with_loading.size(); ++i)
        out += std::to_string(i) + "," + detail::num(r.with_loading[i].itotal()) + "," +
               detail::num(r.without_loading[i].itotal()) + "\n";
    return out;
}

inline std::string characterize_csv(const std::vector<CharacterizationRow>& rows, const std::string& axis) {
    std::string out = axis + ",case,isub,igate,ibtbt,itotal\n";
    for (const auto& r : rows) {
        for (const auto& [name, c] : {std::pair{"nmos_off", &r.nmos_off}, std::pair{"pmos_off", &r.pmos_off},
                                      std::pair{"inv_in0", &r.inv0}, std::pair{"inv_in1", &r.inv1}}) {
            std::string row = detail::num(r.x) + "," + name;
            detail::components_cells(row, *c);
            out += row + "\n";
        }
    }
    return out;
}

/// gnuplot script plotting each component of one case against the axis.
inline std::string characterize_plot_script(const std::string& csv_name, const std::string& axis,
                                            const std::string& case_name) {
    return "set datafile separator ','\nset logscale y\nset xlabel '" + axis + "'\nset ylabel 'A'\n"
           "plot for [col=3:6] '< grep " + case_name + " " + csv_name +
           "' using 1:col with linespoints title word('isub igate ibtbt itotal', col - 2)\n";
}

inline std::string temperature_csv(const std::vector<TemperaturePoint>& series, int gate) {
    std::string out = "temperature,ldall_isub,ldall_igate,ldall_ibtbt,ldall_itotal,ldin_itotal,ldout_itotal\n";
    for (const auto& p : series) {
        const auto& g = p.report.gates[static_cast<std::size_t>(gate)];
        std::string row = detail::num(p.temperature);
        detail::ld_cells(row, g.ld_all);
        row += "," + detail::num(g.ld_in.itotal) + "," + detail::num(g.ld_out.itotal);
        out += row + "\n";
    }
    return out;
}

}  // namespace leakload::io
