#pragma once

// Corpus manifest and golden reports.
//
// The manifest is key=value. `[defaults]` sets preset, environment and
// tolerances for every case; `[case NAME]` names a netlist (relative to the
// manifest) and a space-separated vector list, and may override any default.
// A case with `generated_seed = S` refers to a netlist produced by the random
// generator configured in `[random_dag]`.

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "leakload/error.hpp"
#include "leakload/generator.hpp"
#include "leakload/loading_estimator.hpp"
#include "leakload/netlist.hpp"
#include "leakload/oracle_solver.hpp"
#include "leakload/report_io.hpp"
#include "leakload/technology.hpp"
#include "leakload/text_util.hpp"

namespace leakload::corpus {

using nlohmann::ordered_json;

struct Tolerances {
    double regression = 1e-6;    // relative, fresh results vs stored golden
    double total = 0.02;         // relative, estimator vs oracle circuit itotal
    double gate = 0.10;          // relative, estimator vs oracle per-gate itotal
    double max_residual = 1e-16; // A
};

struct GoldenCase {
    std::string name;
    std::string netlist;
    std::string preset = "D25-S";
    Environment env;
    std::vector<std::string> vectors;
    Tolerances tol;
    std::optional<std::uint64_t> generated_seed;
};

struct Manifest {
    std::vector<GoldenCase> cases;
    RandomCircuitSpec random_dag;
    std::string gate_mix;  // documentation of the generator mix, "TYPE:weight ..."
};

namespace detail {

inline bool apply_common(GoldenCase& c, const text::KeyValue& kv) {
    if (kv.key == "preset") c.preset = kv.value;
    else if (kv.key == "temperature") c.env.temperature = text::value_as_double(kv);
    else if (kv.key == "vdd") c.env.vdd = text::value_as_double(kv);
    else if (kv.key == "tol_regression") c.tol.regression = text::value_as_double(kv);
    else if (kv.key == "tol_total") c.tol.total = text::value_as_double(kv);
    else if (kv.key == "tol_gate") c.tol.gate = text::value_as_double(kv);
    else if (kv.key == "max_residual") c.tol.max_residual = text::value_as_double(kv);
    else return false;
    return true;
}

inline double integer_value(const text::KeyValue& kv) {
    double x = text::value_as_double(kv);
    if (x != std::floor(x) || x < 0) throw ParseError(kv.line, "'" + kv.key + "' must be a non-negative integer");
    return x;
}

}  // namespace detail

inline Manifest parse_manifest(std::string_view text) {
    Manifest m;
    GoldenCase defaults;
    GoldenCase* current = nullptr;
    int current_header = -1;
    for (const auto& kv : text::parse_key_values(text)) {
        if (kv.section_line != current_header) {
            current_header = kv.section_line;
            current = nullptr;
            if (kv.section.rfind("case ", 0) == 0) {
                auto name = std::string(text::trim(std::string_view(kv.section).substr(5)));
                for (const auto& c : m.cases)
                    if (c.name == name) throw ParseError(kv.line, "duplicate case '" + name + "'");
                m.cases.push_back(defaults);
                m.cases.back().name = name;
                current = &m.cases.back();
            } else if (kv.section != "defaults" && kv.section != "random_dag") {
                throw ParseError(kv.line, "unknown section [" + kv.section + "]");
            }
        }
        if (kv.section == "defaults") {
            if (!m.cases.empty()) throw ParseError(kv.line, "[defaults] must precede every case");
            if (!detail::apply_common(defaults, kv)) throw ParseError(kv.line, "unknown key '" + kv.key + "'");
        } else if (kv.section == "random_dag") {
            auto& r = m.random_dag;
            if (kv.key == "inputs") r.inputs = static_cast<int>(detail::integer_value(kv));
            else if (kv.key == "gates") r.gates = static_cast<int>(detail::integer_value(kv));
            else if (kv.key == "max_fanout") r.max_fanout = static_cast<int>(detail::integer_value(kv));
            else if (kv.key == "window") r.window = static_cast<int>(detail::integer_value(kv));
            else if (kv.key == "recent_bias") r.recent_bias = text::value_as_double(kv);
            else if (kv.key == "mix") m.gate_mix = kv.value;
            else throw ParseError(kv.line, "unknown key '" + kv.key + "' in [random_dag]");
        } else if (current) {
            if (detail::apply_common(*current, kv)) continue;
            if (kv.key == "netlist") current->netlist = kv.value;
            else if (kv.key == "generated_seed")
                current->generated_seed = static_cast<std::uint64_t>(detail::integer_value(kv));
            else if (kv.key == "vectors") {
                std::istringstream ss(kv.value);
                for (std::string v; ss >> v;) current->vectors.push_back(v);
            } else {
                throw ParseError(kv.line, "unknown key '" + kv.key + "'");
            }
        } else {
            throw ParseError(kv.line, "key '" + kv.key + "' outside any section");
        }
    }
    m.random_dag.validate();
    for (const auto& c : m.cases) {
        if (c.netlist.empty()) throw InvalidInput("case '" + c.name + "' has no netlist");
        if (c.vectors.empty()) throw InvalidInput("case '" + c.name + "' has no vectors");
        c.env.validate();
        preset(c.preset);
    }
    return m;
}

/// The generator mix as written in the manifest's `mix` key.
inline std::string format_gate_mix() {
    std::string s;
    for (const auto& [t, w] : kRandomGateMix) s += (s.empty() ? "" : " ") + std::string(to_string(t)) + ":" + std::to_string(w);
    return s;
}

inline Circuit load_circuit(const std::filesystem::path& dir, const GoldenCase& gc) {
    return parse_bench(text::read_file(dir / gc.netlist));
}

inline std::filesystem::path golden_path(const std::filesystem::path& dir, const GoldenCase& gc) {
    return dir / "goldens" / (gc.name + ".json");
}

inline InputVector case_vector(const GoldenCase& gc, const Circuit& c, const std::string& bits) {
    auto v = parse_vector(bits);
    if (v.size() != c.input_count())
        throw InvalidInput("case '" + gc.name + "': vector " + bits + " does not match " +
                           std::to_string(c.input_count()) + " inputs");
    return v;
}

/// Oracle and estimator results for every vector of a case. Throws
/// SolverError when the oracle does not converge or misses the residual bound.
inline ordered_json compute_golden(const std::filesystem::path& dir, const GoldenCase& gc) {
    auto c = load_circuit(dir, gc);
    auto tech = preset(gc.preset);
    ordered_json j;
    j["case"] = gc.name;
    j["netlist"] = gc.netlist;
    j["preset"] = gc.preset;
    j["temperature"] = gc.env.temperature;
    j["vdd"] = gc.env.vdd;
    j["tolerances"] = {{"regression", gc.tol.regression},
                       {"total", gc.tol.total},
                       {"gate", gc.tol.gate},
                       {"max_residual", gc.tol.max_residual}};
    ordered_json runs = ordered_json::array();
    for (const auto& bits : gc.vectors) {
        auto v = case_vector(gc, c, bits);
        auto sol = solve_full(c, v, tech, gc.env);
        if (!sol.converged) throw SolverError("case '" + gc.name + "' vector " + bits + ": " + sol.diagnostic, 0, 0);
        if (sol.max_residual > gc.tol.max_residual)
            throw SolverError("case '" + gc.name + "' vector " + bits + ": oracle residual " +
                                  text::format_double(sol.max_residual) + " A above bound",
                              0, sol.max_residual);
        auto rep = estimate(c, v, tech, gc.env);
        auto cmp = compare(sol, rep);
        ordered_json gates = ordered_json::array();
        for (const auto& g : sol.gate_leakage) gates.push_back(g.itotal());
        ordered_json run;
        run["vector"] = bits;
        run["oracle"] = {{"iterations", sol.iterations},
                         {"max_residual", sol.max_residual},
                         {"total", io::to_json(sol.total)},
                         {"gate_itotal", gates}};
        run["estimate"] = {{"nominal", io::to_json(rep.total_nominal)}, {"loaded", io::to_json(rep.total_loaded)}};
        run["error"] = {{"total", io::to_json(cmp.total.itotal)}, {"worst_gate", cmp.worst_error}};
        runs.push_back(std::move(run));
    }
    j["runs"] = std::move(runs);
    return j;
}

namespace detail {

inline bool close(double fresh, double stored, double rel) {
    double scale = std::max(std::fabs(stored), 1e-30);
    return std::fabs(fresh - stored) <= rel * scale;
}

}  // namespace detail

/// Recomputes a case and checks it against the stored golden. Returns one
/// message per violated tolerance; empty means the case passes.
inline std::vector<std::string> check_golden(const std::filesystem::path& dir, const GoldenCase& gc,
                                             const ordered_json& golden) {
    std::vector<std::string> problems;
    auto c = load_circuit(dir, gc);
    auto tech = preset(gc.preset);
    const auto& t = golden.at("tolerances");
    Tolerances tol{t.at("regression").get<double>(), t.at("total").get<double>(), t.at("gate").get<double>(),
                   t.at("max_residual").get<double>()};
    const auto& runs = golden.at("runs");
    if (runs.size() != gc.vectors.size()) problems.push_back(gc.name + ": golden covers a different vector list");
    for (std::size_t k = 0; k < std::min(runs.size(), gc.vectors.size()); ++k) {
        const auto& run = runs[k];
        auto bits = run.at("vector").get<std::string>();
        auto where = gc.name + " " + bits + ": ";
        auto v = case_vector(gc, c, bits);
        auto sol = solve_full(c, v, tech, gc.env);
        auto rep = estimate(c, v, tech, gc.env);
        auto cmp = compare(sol, rep);
        if (!sol.converged) problems.push_back(where + "oracle did not converge");
        if (sol.max_residual > tol.max_residual)
            problems.push_back(where + "oracle residual " + text::format_double(sol.max_residual) + " A");
        auto check = [&](const char* what, double fresh, double stored, double rel) {
            if (!detail::close(fresh, stored, rel))
                problems.push_back(where + what + " " + text::format_double(fresh) + " vs golden " +
                                   text::format_double(stored));
        };
        const auto& ot = run.at("oracle").at("total");
        for (const char* k2 : {"isub", "igate", "ibtbt", "itotal"}) {
            double fresh = std::string(k2) == "isub"    ? sol.total.isub
                           : std::string(k2) == "igate" ? sol.total.igate()
                           : std::string(k2) == "ibtbt" ? sol.total.ibtbt()
                                                        : sol.total.itotal();
            check((std::string("oracle ") + k2).c_str(), fresh, ot.at(k2).get<double>(), tol.regression);
        }
        const auto& gates = run.at("oracle").at("gate_itotal");
        if (gates.size() != sol.gate_leakage.size()) problems.push_back(where + "gate count changed");
        else
            for (std::size_t g = 0; g < gates.size(); ++g)
                check("oracle gate itotal", sol.gate_leakage[g].itotal(), gates[g].get<double>(), tol.regression);
        check("estimate itotal", rep.total_loaded.itotal(),
              run.at("estimate").at("loaded").at("itotal").get<double>(), tol.regression);
        if (!cmp.total.itotal || std::fabs(*cmp.total.itotal) > tol.total)
            problems.push_back(where + "estimator vs oracle total error " + io::detail::num(cmp.total.itotal));
        if (std::fabs(cmp.worst_error) > tol.gate)
            problems.push_back(where + "estimator vs oracle gate error " + text::format_double(cmp.worst_error));
    }
    return problems;
}

}  // namespace leakload::corpus
