#pragma once

// Command-line front end. `run_cli` is the whole program; the executable only
// forwards argv and the process streams.
//
//   leakload characterize --preset D25-G --axis temp --from 300 --to 400 --points 11
//   leakload estimate --netlist c17.bench --vector 10101 --oracle --out out/
//   leakload sweep --netlist c17.bench --random 100 --seed 7
//   leakload montecarlo --fixture 6x6 --spec vth50.var --out mc/
//   leakload tempsweep --fixture 6x6 --preset D25-G --temps 300,325,350,375
//
// Exit codes: 0 success, 1 usage or configuration error, 2 file I/O error,
// 3 parse error in an input file, 4 solver failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "leakload/characterize.hpp"
#include "leakload/error.hpp"
#include "leakload/fixtures.hpp"
#include "leakload/loading_estimator.hpp"
#include "leakload/netlist.hpp"
#include "leakload/oracle_solver.hpp"
#include "leakload/report_io.hpp"
#include "leakload/technology.hpp"
#include "leakload/text_util.hpp"
#include "leakload/variation.hpp"

namespace leakload::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kParse = 3, kSolver = 4 };

struct RunConfig {
    std::string netlist;
    std::string preset = "DEFAULT";
    std::string params;
    Environment env;
    std::string vector;
    int random = 0;
    std::uint64_t seed = 1;
    bool exhaustive = false;
    bool oracle = false;
    bool no_loading = false;
    std::string out;
    // characterize
    std::string axis = "temp";
    double from = 0.0;
    double to = 0.0;
    int points = 11;
    bool plot = false;
    // montecarlo
    std::string spec;
    std::string fixture;
    std::optional<int> samples;
    bool seed_given = false;
    // tempsweep
    std::vector<double> temps;
    std::string gate;
};

/// Exit-code classification for errors escaping a subcommand.
class UsageError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline Technology load_technology(const RunConfig& cfg) {
    if (!cfg.params.empty()) return parse_params(text::read_file(cfg.params));
    return preset(cfg.preset);
}

inline std::string percent(const std::optional<double>& x) {
    if (!x) return "n/a";
    std::ostringstream s;
    s << std::showpos << std::fixed << std::setprecision(3) << *x * 100.0 << "%";
    return s.str();
}

inline std::string amps(double x) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(4) << x << " A";
    return s.str();
}

inline Circuit load_circuit(const RunConfig& cfg) {
    if (cfg.netlist.empty()) throw UsageError("--netlist is required");
    return parse_bench(text::read_file(cfg.netlist));
}

inline std::pair<int, int> parse_fixture(const std::string& s) {
    auto x = s.find('x');
    int a = -1, b = -1;
    if (x != std::string::npos) {
        try {
            std::size_t used = 0;
            a = std::stoi(s.substr(0, x), &used);
            if (used != x) a = -1;
            b = std::stoi(s.substr(x + 1), &used);
            if (used != s.size() - x - 1) b = -1;
        } catch (const std::exception&) {
            a = -1;
        }
    }
    if (a < 0 || b < 0 || a > 64 || b > 64) throw UsageError("--fixture expects NxM with 0 <= N, M <= 64, e.g. 6x6");
    return {a, b};
}

inline std::vector<InputVector> vectors_for(const RunConfig& cfg, const Circuit& c) {
    int sources = (cfg.vector.empty() ? 0 : 1) + (cfg.random > 0 ? 1 : 0) + (cfg.exhaustive ? 1 : 0);
    if (sources > 1) throw UsageError("choose one of --vector, --random, --exhaustive");
    if (cfg.exhaustive) return exhaustive_vectors(c);
    if (cfg.random > 0) return random_vectors(c, cfg.random, cfg.seed);
    if (!cfg.vector.empty()) {
        auto v = parse_vector(cfg.vector);
        if (v.size() != c.input_count())
            throw UsageError("--vector has " + std::to_string(v.size()) + " bits, circuit has " +
                             std::to_string(c.input_count()) + " inputs");
        return {v};
    }
    return {InputVector(c.input_count(), 0)};
}

struct PendingFile {
    std::string name;
    std::string content;
};

inline void write_all(const RunConfig& cfg, const std::vector<PendingFile>& files) {
    std::filesystem::create_directories(cfg.out);
    for (const auto& f : files) text::write_file_atomic(std::filesystem::path(cfg.out) / f.name, f.content);
}

inline io::RunInfo run_info(const RunConfig& cfg, std::optional<std::uint64_t> seed) {
    return {cfg.netlist.empty() ? cfg.fixture : cfg.netlist, cfg.params.empty() ? cfg.preset : cfg.params, seed};
}

inline void print_components(std::ostream& out, const char* label, const LeakageComponents& c) {
    out << "  " << std::left << std::setw(9) << label << " isub " << amps(c.isub) << "  igate " << amps(c.igate())
        << "  ibtbt " << amps(c.ibtbt()) << "  itotal " << amps(c.itotal()) << "\n";
}

inline void print_ld(std::ostream& out, const char* label, const LdValues& v) {
    out << "  " << std::left << std::setw(9) << label << " isub " << percent(v.isub) << "  igate " << percent(v.igate)
        << "  ibtbt " << percent(v.ibtbt) << "  itotal " << percent(v.itotal) << "\n";
}

inline int cmd_characterize(const RunConfig& cfg, std::ostream& out) {
    auto tech = load_technology(cfg);
    auto axis = parse_axis(cfg.axis);
    auto values = linear_range(cfg.from, cfg.to, cfg.points);
    auto rows = characterize(tech, cfg.env, axis, values);
    auto csv = io::characterize_csv(rows, cfg.axis);
    if (cfg.out.empty()) {
        out << csv;
        return kOk;
    }
    std::vector<PendingFile> files{{"characterize.csv", csv}};
    if (cfg.plot)
        for (const char* c : {"nmos_off", "pmos_off", "inv_in0", "inv_in1"})
            files.push_back({std::string("characterize_") + c + ".gp",
                             io::characterize_plot_script("characterize.csv", cfg.axis, c)});
    write_all(cfg, files);
    return kOk;
}

inline int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto tech = load_technology(cfg);
    auto c = load_circuit(cfg);
    if (cfg.exhaustive || cfg.random > 1) throw UsageError("estimate takes a single vector; use sweep for sets");
    auto vectors = vectors_for(cfg, c);
    std::optional<std::uint64_t> seed;
    if (cfg.random > 0) seed = cfg.seed;
    EstimateOptions opt;
    opt.loading = !cfg.no_loading;
    auto rep = estimate(c, vectors.front(), tech, cfg.env, {}, opt);
    rep.seed = seed;

    out << "netlist " << cfg.netlist << ": " << c.gates.size() << " gates, vector " << format_vector(rep.vector)
        << ", " << cfg.env.temperature << " K, " << cfg.env.vdd << " V\n";
    print_components(out, "nominal", rep.total_nominal);
    print_components(out, "loaded", rep.total_loaded);
    print_ld(out, "delta", rep.ld_total);

    std::vector<PendingFile> files;
    auto info = run_info(cfg, seed);
    files.push_back({"report.json", io::report_json(rep, c, info).dump(2) + "\n"});
    files.push_back({"gates.csv", io::gates_csv(rep)});

    int code = kOk;
    if (cfg.oracle) {
        auto sol = solve_full(c, rep.vector, tech, cfg.env);
        auto cmp = compare(sol, rep);
        out << "oracle: " << (sol.converged ? "converged" : "NOT converged") << " after " << sol.iterations
            << " sweeps, max residual " << amps(sol.max_residual) << "\n";
        print_components(out, "oracle", sol.total);
        print_ld(out, "error", cmp.total);
        if (cmp.worst_gate >= 0)
            out << "  worst gate "
                << c.net_names[static_cast<std::size_t>(c.gates[static_cast<std::size_t>(cmp.worst_gate)].output)]
                << " itotal error " << percent(cmp.worst_error) << "\n";
        files.push_back({"oracle.json", io::oracle_json(sol, cmp, c).dump(2) + "\n"});
        if (!sol.converged) {
            err << "error: oracle: " << sol.diagnostic << "\n";
            code = kSolver;
        }
    }
    if (rep.warnings > 0) {
        err << "error: " << rep.warnings << " gate solve(s) failed; see solver_failed in the report\n";
        code = kSolver;
    }
    if (!cfg.out.empty()) write_all(cfg, files);
    return code;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.oracle) throw UsageError("--oracle applies to estimate only");
    auto tech = load_technology(cfg);
    auto c = load_circuit(cfg);
    auto vectors = vectors_for(cfg, c);
    std::optional<std::uint64_t> seed;
    if (cfg.random > 0) seed = cfg.seed;
    auto s = vector_sweep(c, vectors, tech, cfg.env, {}, !cfg.no_loading);
    s.seed = seed;

    out << "netlist " << cfg.netlist << ": " << c.gates.size() << " gates, " << s.vectors.size() << " vectors\n";
    print_ld(out, "average", s.average);
    print_ld(out, "maximum", s.maximum);
    out << "  minimum-leakage vector: nominal " << format_vector(s.vectors[s.min_nominal]) << ", loaded "
        << format_vector(s.vectors[s.min_loaded]) << (s.min_vector_changes() ? " (changed)" : " (unchanged)") << "\n";
    if (!cfg.out.empty())
        write_all(cfg, {{"sweep.json", io::sweep_json(s, run_info(cfg, seed), cfg.env).dump(2) + "\n"},
                        {"sweep.csv", io::sweep_csv(s)}});
    if (s.warnings > 0) {
        err << "error: " << s.warnings << " gate solve(s) failed during the sweep\n";
        return kSolver;
    }
    return kOk;
}

// Netlist or inverter fixture plus one vector. The fixture defaults to
// input '0' on its gate under test.
inline std::pair<Circuit, InputVector> circuit_and_vector(const RunConfig& cfg, const char* command) {
    if (cfg.netlist.empty() == cfg.fixture.empty())
        throw UsageError(std::string(command) + " needs exactly one of --netlist, --fixture");
    if (cfg.exhaustive || cfg.random > 1) throw UsageError(std::string(command) + " takes a single vector");
    Circuit c;
    if (!cfg.fixture.empty()) {
        auto [in_loads, out_loads] = parse_fixture(cfg.fixture);
        c = fixtures::inverter(in_loads, out_loads);
        if (cfg.vector.empty() && cfg.random == 0) return {std::move(c), fixtures::inverter_vector(false)};
    } else {
        c = load_circuit(cfg);
    }
    auto v = vectors_for(cfg, c).front();
    return {std::move(c), std::move(v)};
}

inline int cmd_montecarlo(const RunConfig& cfg, std::ostream& out) {
    auto tech = load_technology(cfg);
    auto [c, vec] = circuit_and_vector(cfg, "montecarlo");
    VariationSpec spec;
    if (cfg.spec.empty()) spec.inter.vth0 = 0.05;
    else spec = parse_variation(text::read_file(cfg.spec));
    if (cfg.samples) spec.samples = *cfg.samples;
    if (cfg.seed_given && cfg.random == 0) spec.seed = cfg.seed;
    spec.validate();
    auto r = monte_carlo(c, vec, tech, spec, cfg.env);
    auto summary = io::montecarlo_summary_csv(r);
    if (cfg.out.empty()) {
        out << summary;
    } else {
        write_all(cfg, {{"montecarlo_summary.csv", summary},
                        {"montecarlo_histogram.csv", io::montecarlo_histogram_csv(r)},
                        {"montecarlo_samples.csv", io::montecarlo_samples_csv(r)},
                        {"montecarlo.json", io::montecarlo_json(r, run_info(cfg, spec.seed), cfg.env).dump(2) + "\n"}});
        out << r.with_loading.size() << " samples (" << r.failures << " failed); itotal std with loading "
            << amps(r.loaded.itotal.stddev) << ", without " << amps(r.unloaded.itotal.stddev) << "\n";
    }
    return kOk;
}

inline int cmd_tempsweep(const RunConfig& cfg, std::ostream& out) {
    auto tech = load_technology(cfg);
    auto [c, vec] = circuit_and_vector(cfg, "tempsweep");
    if (cfg.temps.empty()) throw UsageError("--temps is required");
    std::string name = cfg.gate.empty() ? (cfg.fixture.empty() ? "" : "g") : cfg.gate;
    int gate = 0;
    if (!name.empty()) {
        int net = c.net_index(name);
        if (net < 0 || c.driver[static_cast<std::size_t>(net)] < 0) throw UsageError("no gate drives net '" + name + "'");
        gate = c.driver[static_cast<std::size_t>(net)];
    }
    auto series = temperature_sweep(c, vec, tech, cfg.temps, cfg.env);
    auto csv = io::temperature_csv(series, gate);
    if (cfg.out.empty()) out << csv;
    else write_all(cfg, {{"temperature.csv", csv}});
    for (const auto& p : series)
        if (p.report.warnings > 0) throw SolverError("gate solve failed at " + text::format_double(p.temperature) + " K", 0, 0);
    return kOk;
}

inline void add_common(CLI::App* sub, RunConfig& cfg, bool circuit) {
    auto* p = sub->add_option("--preset", cfg.preset, "Device preset: D25-S, D25-G, D25-JN, DEFAULT");
    auto* f = sub->add_option("--params", cfg.params, "Device parameter file (key=value)");
    p->excludes(f);
    sub->add_option("--temp", cfg.env.temperature, "Temperature in K")->capture_default_str();
    sub->add_option("--vdd", cfg.env.vdd, "Supply voltage in V")->capture_default_str();
    sub->add_option("--out", cfg.out, "Output directory");
    if (!circuit) return;
    sub->add_option("--netlist", cfg.netlist, "Circuit in .bench format");
    sub->add_option("--vector", cfg.vector, "Input bits, primary inputs in declaration order");
    sub->add_option("--random", cfg.random, "Number of random vectors")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_flag("--exhaustive", cfg.exhaustive, "All 2^n vectors (n <= 20)");
    sub->add_flag("--no-loading", cfg.no_loading, "Report nominal leakage only");
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Loading-aware static leakage estimation for CMOS gate netlists", "leakload"};
    app.require_subcommand(1);

    auto* ch = app.add_subcommand("characterize", "Single-device and inverter leakage over one swept axis");
    detail::add_common(ch, cfg, false);
    ch->add_option("--axis", cfg.axis, "temp, vdd or a device parameter name")->capture_default_str();
    ch->add_option("--from", cfg.from, "First axis value")->required();
    ch->add_option("--to", cfg.to, "Last axis value")->required();
    ch->add_option("--points", cfg.points, "Number of points")->capture_default_str();
    ch->add_flag("--plot", cfg.plot, "Also write gnuplot scripts (needs --out)");

    auto* es = app.add_subcommand("estimate", "Loading-aware leakage of one vector");
    detail::add_common(es, cfg, true);
    es->add_flag("--oracle", cfg.oracle, "Also solve the whole circuit and report relative errors");

    auto* sw = app.add_subcommand("sweep", "Average and maximum loading deltas over a vector set");
    detail::add_common(sw, cfg, true);
    sw->add_flag("--oracle", cfg.oracle, "Not supported for sweeps");

    auto* mc = app.add_subcommand("montecarlo", "Leakage distribution under process variation");
    detail::add_common(mc, cfg, true);
    mc->add_option("--spec", cfg.spec, "Variation spec file (key=value); default 50 mV inter-die vth0");
    mc->add_option("--fixture", cfg.fixture, "Inverter fixture NxM: N input loads, M output loads");
    mc->add_option("--samples", cfg.samples, "Override the sample count")->check(CLI::PositiveNumber);

    auto* ts = app.add_subcommand("tempsweep", "Loading deltas of one gate over a temperature list");
    detail::add_common(ts, cfg, true);
    ts->add_option("--fixture", cfg.fixture, "Inverter fixture NxM: N input loads, M output loads");
    ts->add_option("--temps", cfg.temps, "Temperatures in K")->delimiter(',');
    ts->add_option("--gate", cfg.gate, "Output net of the reported gate (fixture default: g)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }
    cfg.seed_given = mc->count("--seed") > 0;

    try {
        if (cfg.plot && cfg.out.empty()) throw UsageError("--plot needs --out");
        cfg.env.validate();
        if (*ch) return detail::cmd_characterize(cfg, out);
        if (*es) return detail::cmd_estimate(cfg, out, err);
        if (*sw) return detail::cmd_sweep(cfg, out, err);
        if (*mc) return detail::cmd_montecarlo(cfg, out);
        if (*ts) return detail::cmd_tempsweep(cfg, out);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kParse;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << "\n";
        return kSolver;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::system_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace leakload::cli
