#pragma once

// Steady-state KCL solve of one gate: output node and internal nodes under
// given input voltages and a current injected into the output net.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "leakload/device_model.hpp"
#include "leakload/error.hpp"
#include "leakload/gate_library.hpp"
#include "leakload/technology.hpp"

namespace leakload {

struct SolverConfig {
    double current_tolerance = 1e-17;  // A
    double voltage_tolerance = 1e-7;   // V
    int max_bisection_steps = 200;
    int max_outer_iterations = 50;

    void validate() const {
        if (!(current_tolerance > 0) || !(voltage_tolerance > 0) || max_bisection_steps <= 0 ||
            max_outer_iterations <= 0)
            throw InvalidInput("solver tolerances and iteration limits must be positive");
    }
};

/// Node voltages are clamped to [-kClampMargin, vdd + kClampMargin].
inline constexpr double kClampMargin = 0.05;

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    double width = 0.0;
    int steps = 0;
    bool converged = false;
};

/// Root of a non-increasing function on [lo, hi], which must change sign
/// there. Bisection-safeguarded regula falsi (Illinois variant); stops when
/// |f| <= current_tolerance or the bracket is narrower than voltage_tolerance.
/// A guess inside the interval seeds a local bracket search.
template <class F>
RootResult find_decreasing_root(F&& f, double lo, double hi, double guess, const SolverConfig& cfg) {
    RootResult r;
    double a = lo, b = hi, fa = 0.0, fb = 0.0;
    int evals = 0;
    auto eval = [&](double x) {
        ++evals;
        return f(x);
    };
    auto done = [&](double x, double fx) {
        r.x = x;
        r.residual = fx;
        r.width = b - a;
        r.steps = evals;
        r.converged = true;
        return r;
    };

    if (guess > lo && guess < hi) {
        double fg = eval(guess);
        if (std::fabs(fg) <= cfg.current_tolerance) return done(guess, fg);
        double step = 1e-4;
        if (fg > 0) {
            a = guess;
            fa = fg;
            for (;;) {
                b = std::min(hi, guess + step);
                fb = eval(b);
                if (fb <= 0 || b >= hi) break;
                a = b;
                fa = fb;
                step *= 8;
            }
        } else {
            b = guess;
            fb = fg;
            for (;;) {
                a = std::max(lo, guess - step);
                fa = eval(a);
                if (fa >= 0 || a <= lo) break;
                b = a;
                fb = fa;
                step *= 8;
            }
        }
    } else {
        fa = eval(a);
        fb = eval(b);
    }
    if (fa < 0 || fb > 0) {
        r.x = std::fabs(fa) < std::fabs(fb) ? a : b;
        r.residual = std::fabs(fa) < std::fabs(fb) ? fa : fb;
        r.width = b - a;
        r.steps = evals;
        r.converged = false;
        throw SolverError("KCL residual does not change sign on the clamp interval", r.x, r.residual);
    }
    if (fa == 0) return done(a, fa);
    if (fb == 0) return done(b, fb);

    int side = 0;
    int since_halving = 0;
    double last_width = b - a;
    while (evals < cfg.max_bisection_steps) {
        double width = b - a;
        if (width <= cfg.voltage_tolerance) break;
        double c = (a * fb - b * fa) / (fb - fa);
        if (since_halving >= 3 || !(c > a && c < b)) {
            c = 0.5 * (a + b);
            since_halving = 0;
            side = 0;
        }
        double fc = eval(c);
        if (std::fabs(fc) <= cfg.current_tolerance) return done(c, fc);
        if (fc > 0) {
            a = c;
            fa = fc;
            if (side == 1) fb *= 0.5;
            side = 1;
        } else {
            b = c;
            fb = fc;
            if (side == -1) fa *= 0.5;
            side = -1;
        }
        if (b - a <= 0.5 * last_width) {
            last_width = b - a;
            since_halving = 0;
        } else {
            ++since_halving;
        }
    }
    // fa/fb may have been scaled by the Illinois step; re-evaluate the ends.
    double ea = f(a);
    double eb = f(b);
    bool pick_a = std::fabs(ea) <= std::fabs(eb);
    r.x = pick_a ? a : b;
    r.residual = pick_a ? ea : eb;
    r.width = b - a;
    r.steps = evals;
    r.converged = r.width <= cfg.voltage_tolerance;
    return r;
}

/// Binds a template's transistors to a technology (width ratios folded in).
inline std::vector<DeviceParams> bind_devices(const GateTemplate& t, const Technology& tech) {
    std::vector<DeviceParams> out;
    out.reserve(t.transistors.size());
    for (const auto& tr : t.transistors) out.push_back(tech.params(tr.polarity).scaled_width(tr.w_ratio));
    return out;
}

inline TerminalVoltages terminal_voltages(const TemplateTransistor& tr, std::span<const double> v) {
    return {v[static_cast<std::size_t>(tr.gate)], v[static_cast<std::size_t>(tr.drain)],
            v[static_cast<std::size_t>(tr.source)], v[static_cast<std::size_t>(tr.body)]};
}

inline double terminal_current(const TerminalCurrents& c, Terminal t) {
    switch (t) {
        case Terminal::Drain: return c.drain;
        case Terminal::Gate: return c.gate;
        case Terminal::Source: return c.source;
        case Terminal::Body: return c.body;
    }
    return 0.0;
}

/// Total current flowing from local node `node` into the transistor pins
/// attached to it.
inline double node_current(const GateTemplate& t, std::span<const DeviceParams> params, std::span<const double> v,
                           int node, double temperature) {
    double sum = 0.0;
    for (const auto& att : t.attachments[static_cast<std::size_t>(node)]) {
        const auto& tr = t.transistors[static_cast<std::size_t>(att.transistor)];
        auto e = evaluate_device(params[static_cast<std::size_t>(att.transistor)], tr.polarity, terminal_voltages(tr, v),
                                 temperature);
        sum += terminal_current(e.terminals, att.terminal);
    }
    return sum;
}

struct GateOperatingPoint {
    std::vector<double> voltages;  // every local node, rails included
    int inputs = 0;
    double injected_current = 0.0;  // A into the output net
    std::vector<double> residuals;  // A; output node first, then internal nodes
    int outer_iterations = 0;
    bool converged = false;

    [[nodiscard]] std::span<const double> input_voltages() const {
        return std::span<const double>(voltages).first(static_cast<std::size_t>(inputs));
    }
    [[nodiscard]] double output_voltage() const { return voltages[static_cast<std::size_t>(inputs)]; }
    [[nodiscard]] std::span<const double> internal_voltages() const {
        return std::span<const double>(voltages).subspan(static_cast<std::size_t>(inputs + 1),
                                                         voltages.size() - static_cast<std::size_t>(inputs) - 3);
    }
    [[nodiscard]] double vdd() const { return voltages[voltages.size() - 2]; }
    [[nodiscard]] double max_residual() const {
        double m = 0.0;
        for (double r : residuals) m = std::max(m, std::fabs(r));
        return m;
    }
};

namespace detail {

// Initial guess from the logic levels implied by the input voltages.
inline void initial_guess(const GateTemplate& t, std::vector<double>& v, double vdd) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(t.inputs));
    for (int i = 0; i < t.inputs; ++i) bits[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] > 0.5 * vdd;
    auto logic = t.node_logic(bits);
    auto on = [&](const TemplateTransistor& tr) {
        bool g = logic[static_cast<std::size_t>(tr.gate)] != 0;
        return tr.polarity == Polarity::NMOS ? g : !g;
    };
    for (const auto& st : t.stages) {
        v[static_cast<std::size_t>(st.output)] = logic[static_cast<std::size_t>(st.output)] ? vdd : 0.0;
        // Walk each series network from the stage output towards its rail.
        for (const auto* net : {&st.pull_down, &st.pull_up}) {
            if (net->size() < 2) continue;
            const auto& first = t.transistors[static_cast<std::size_t>(net->front())];
            const auto& second = t.transistors[static_cast<std::size_t>((*net)[1])];
            if (second.drain == st.output || second.source == st.output) continue;  // parallel network
            bool nmos = first.polarity == Polarity::NMOS;
            double rail = nmos ? 0.0 : vdd;
            double out_v = v[static_cast<std::size_t>(st.output)];
            bool from_out = true;
            for (std::size_t i = 0; i + 1 < net->size(); ++i) {
                const auto& tr = t.transistors[static_cast<std::size_t>((*net)[i])];
                int node = tr.source;
                from_out = from_out && on(tr);
                bool to_rail = true;
                for (std::size_t j = i + 1; j < net->size(); ++j)
                    to_rail = to_rail && on(t.transistors[static_cast<std::size_t>((*net)[j])]);
                double guess = to_rail ? rail : from_out ? out_v : (nmos ? 0.1 * vdd : 0.9 * vdd);
                v[static_cast<std::size_t>(node)] = guess;
            }
        }
    }
}

inline bool solve_linear(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[static_cast<std::size_t>(r * n + c)]) > std::fabs(a[static_cast<std::size_t>(piv * n + c)])) piv = r;
        double p = a[static_cast<std::size_t>(piv * n + c)];
        if (!(std::fabs(p) > 0) || !std::isfinite(p)) return false;
        if (piv != c) {
            for (int k = 0; k < n; ++k) std::swap(a[static_cast<std::size_t>(c * n + k)], a[static_cast<std::size_t>(piv * n + k)]);
            std::swap(b[static_cast<std::size_t>(c)], b[static_cast<std::size_t>(piv)]);
        }
        for (int r = c + 1; r < n; ++r) {
            double m = a[static_cast<std::size_t>(r * n + c)] / p;
            if (m == 0) continue;
            for (int k = c; k < n; ++k) a[static_cast<std::size_t>(r * n + k)] -= m * a[static_cast<std::size_t>(c * n + k)];
            b[static_cast<std::size_t>(r)] -= m * b[static_cast<std::size_t>(c)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<std::size_t>(r)];
        for (int k = r + 1; k < n; ++k) s -= a[static_cast<std::size_t>(r * n + k)] * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r * n + r)];
    }
    return true;
}

}  // namespace detail

/// Solves the gate's output and internal node voltages.
///
/// Each outer iteration is one Gauss-Seidel sweep of per-node root finds
/// followed, for multi-node gates, by a Newton correction on the node system
/// that is kept only if it lowers the largest residual. Converged when a
/// sweep moves no node by more than voltage_tolerance.
inline GateOperatingPoint solve_gate(const GateTemplate& t, std::span<const DeviceParams> params,
                                     std::span<const double> input_voltages, double injected_current,
                                     const Environment& env, const SolverConfig& cfg,
                                     const GateOperatingPoint* warm_start = nullptr) {
    if (static_cast<int>(input_voltages.size()) != t.inputs)
        throw InvalidInput(std::string("input voltage count does not match ") + to_string(t.type));
    if (params.size() != t.transistors.size()) throw InvalidInput("device parameter count does not match template");
    const double vdd = env.vdd;
    const double lo = -kClampMargin;
    const double hi = vdd + kClampMargin;
    for (double x : input_voltages)
        if (!std::isfinite(x) || x < lo || x > hi) throw InvalidInput("input voltage outside the clamp range");
    if (!std::isfinite(injected_current)) throw InvalidInput("injected current must be finite");

    GateOperatingPoint pt;
    pt.inputs = t.inputs;
    pt.injected_current = injected_current;
    pt.voltages.assign(static_cast<std::size_t>(t.node_count()), 0.0);
    std::copy(input_voltages.begin(), input_voltages.end(), pt.voltages.begin());
    pt.voltages[static_cast<std::size_t>(t.vdd_node())] = vdd;
    pt.voltages[static_cast<std::size_t>(t.gnd_node())] = 0.0;
    if (warm_start && warm_start->voltages.size() == pt.voltages.size()) {
        for (int i = t.inputs; i < t.vdd_node(); ++i)
            pt.voltages[static_cast<std::size_t>(i)] = std::clamp(warm_start->voltages[static_cast<std::size_t>(i)], lo, hi);
    } else {
        detail::initial_guess(t, pt.voltages, vdd);
        pt.voltages[static_cast<std::size_t>(t.vdd_node())] = vdd;
        pt.voltages[static_cast<std::size_t>(t.gnd_node())] = 0.0;
    }

    std::vector<int> unknowns;
    for (int i = 0; i < t.internal_count(); ++i) unknowns.push_back(t.internal_node(i));
    unknowns.push_back(t.output_node());
    const int n = static_cast<int>(unknowns.size());
    const double temperature = env.temperature;

    auto residual = [&](int node, std::span<const double> v) {
        double inj = node == t.output_node() ? injected_current : 0.0;
        return inj - node_current(t, params, v, node, temperature);
    };
    auto max_abs_residual = [&](std::span<const double> v) {
        double m = 0.0;
        for (int node : unknowns) m = std::max(m, std::fabs(residual(node, v)));
        return m;
    };

    std::vector<double> trial;
    std::vector<double> jac;
    std::vector<double> rhs;
    for (int outer = 1; outer <= cfg.max_outer_iterations; ++outer) {
        pt.outer_iterations = outer;
        double max_move = 0.0;
        for (int node : unknowns) {
            auto& vn = pt.voltages[static_cast<std::size_t>(node)];
            double old = vn;
            auto f = [&](double x) {
                vn = x;
                return residual(node, pt.voltages);
            };
            RootResult root;
            try {
                root = find_decreasing_root(f, lo, hi, old, cfg);
            } catch (const SolverError& e) {
                vn = old;
                throw SolverError(std::string(to_string(t.type)) + ": " + e.what(), pt.output_voltage(), e.residual());
            }
            if (!root.converged) {
                vn = old;
                throw SolverError(std::string(to_string(t.type)) + ": node root search exceeded the step limit",
                                  pt.output_voltage(), root.residual);
            }
            vn = root.x;
            max_move = std::max(max_move, std::fabs(vn - old));
        }
        if (max_move < cfg.voltage_tolerance) {
            pt.converged = true;
            break;
        }
        if (n < 2) continue;

        // Newton correction with a forward-difference Jacobian.
        const double h = 1e-6;
        rhs.assign(static_cast<std::size_t>(n), 0.0);
        jac.assign(static_cast<std::size_t>(n * n), 0.0);
        for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] = residual(unknowns[static_cast<std::size_t>(i)], pt.voltages);
        trial = pt.voltages;
        for (int j = 0; j < n; ++j) {
            auto idx = static_cast<std::size_t>(unknowns[static_cast<std::size_t>(j)]);
            trial[idx] = pt.voltages[idx] + h;
            for (int i = 0; i < n; ++i)
                jac[static_cast<std::size_t>(i * n + j)] =
                    (residual(unknowns[static_cast<std::size_t>(i)], trial) - rhs[static_cast<std::size_t>(i)]) / h;
            trial[idx] = pt.voltages[idx];
        }
        double base = 0.0;
        for (double r : rhs) base = std::max(base, std::fabs(r));
        for (double& r : rhs) r = -r;
        if (!detail::solve_linear(jac, rhs, n)) continue;
        double step_max = 0.0;
        for (double d : rhs) step_max = std::max(step_max, std::fabs(d));
        if (!std::isfinite(step_max)) continue;
        double scale = step_max > 0.05 ? 0.05 / step_max : 1.0;
        for (int ls = 0; ls < 8; ++ls, scale *= 0.5) {
            trial = pt.voltages;
            for (int j = 0; j < n; ++j) {
                auto idx = static_cast<std::size_t>(unknowns[static_cast<std::size_t>(j)]);
                trial[idx] = std::clamp(trial[idx] + scale * rhs[static_cast<std::size_t>(j)], lo, hi);
            }
            if (max_abs_residual(trial) < base) {
                pt.voltages.swap(trial);
                break;
            }
        }
    }

    pt.residuals.clear();
    pt.residuals.push_back(residual(t.output_node(), pt.voltages));
    for (int i = 0; i < t.internal_count(); ++i) pt.residuals.push_back(residual(t.internal_node(i), pt.voltages));
    if (!pt.converged)
        throw SolverError(std::string(to_string(t.type)) + ": node voltages did not settle within the outer iteration limit",
                          pt.output_voltage(), pt.max_residual());
    return pt;
}

/// Leakage of a gate at an operating point.
struct GateLeakage {
    LeakageComponents components;
    std::vector<double> input_draw;  // A drawn from each input net by the gate's transistor pins
};

/// Aggregates mechanism magnitudes over the gate's transistors. Channel
/// current counts as subthreshold leakage only in the logically off network
/// of each stage, measured at the transistors touching the stage output, so
/// series-stack current is counted once and on-devices carrying it are not.
inline GateLeakage gate_leakage(const GateOperatingPoint& pt, const GateTemplate& t,
                                std::span<const DeviceParams> params, const Environment& env) {
    GateLeakage out;
    const double vdd = pt.vdd();
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(t.inputs));
    for (int i = 0; i < t.inputs; ++i) bits[static_cast<std::size_t>(i)] = pt.voltages[static_cast<std::size_t>(i)] > 0.5 * vdd;
    auto logic = t.node_logic(bits);

    std::vector<DeviceEvaluation> evals;
    evals.reserve(t.transistors.size());
    for (std::size_t i = 0; i < t.transistors.size(); ++i) {
        const auto& tr = t.transistors[i];
        evals.push_back(evaluate_device(params[i], tr.polarity, terminal_voltages(tr, pt.voltages), env.temperature));
        auto c = evals.back().components;
        c.isub = 0.0;
        out.components += c;
    }
    for (const auto& st : t.stages) {
        const auto& off = logic[static_cast<std::size_t>(st.output)] ? st.pull_down : st.pull_up;
        for (int idx : off) {
            const auto& tr = t.transistors[static_cast<std::size_t>(idx)];
            if (tr.drain == st.output || tr.source == st.output)
                out.components.isub += evals[static_cast<std::size_t>(idx)].components.isub;
        }
    }
    out.input_draw.assign(static_cast<std::size_t>(t.inputs), 0.0);
    for (int i = 0; i < t.inputs; ++i)
        for (const auto& att : t.attachments[static_cast<std::size_t>(i)])
            out.input_draw[static_cast<std::size_t>(i)] +=
                terminal_current(evals[static_cast<std::size_t>(att.transistor)].terminals, att.terminal);
    return out;
}

/// Convenience: operating point with every input at its logic rail.
inline std::vector<double> rail_voltages(std::span<const std::uint8_t> bits, double vdd) {
    std::vector<double> v;
    v.reserve(bits.size());
    for (auto b : bits) v.push_back(b ? vdd : 0.0);
    return v;
}

}  // namespace leakload
