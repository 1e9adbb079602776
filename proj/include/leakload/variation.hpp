#pragma once

// Monte Carlo process variation and temperature sweeps.
//
// Variation spec file (key=value):
//
//   samples = 1000
//   seed = 1
//   bins = 20
//   [inter]          # one draw per sample, shared by every transistor
//   vth0 = 0.05      # V
//   l = 0            # relative channel length deviation dL/L
//   tox = 0          # relative oxide thickness deviation dTox/Tox
//   vdd = 0          # V
//   [intra]          # independent draw per transistor
//   vth0 = 0
//   l = 0
//   tox = 0
//   [mapping]
//   l_to_vth = 0.3   # V of threshold shift per unit dL/L
//   tox_to_vth = 0.1 # V of threshold shift per unit dTox/Tox
//   tox_beta = 13.5  # tunneling prefactors scale by exp(-tox_beta * dTox/Tox)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "leakload/device_model.hpp"
#include "leakload/error.hpp"
#include "leakload/loading_estimator.hpp"
#include "leakload/netlist.hpp"
#include "leakload/technology.hpp"
#include "leakload/text_util.hpp"

namespace leakload {

struct VariationSigmas {
    double vth0 = 0.0;
    double l = 0.0;
    double tox = 0.0;
    double vdd = 0.0;
};

struct VariationSpec {
    VariationSigmas inter;
    VariationSigmas intra;  // vdd unused
    double l_to_vth = 0.3;
    double tox_to_vth = 0.1;
    double tox_beta = 13.5;
    int samples = 1000;
    std::uint64_t seed = 1;
    int bins = 20;

    void validate() const {
        for (double s : {inter.vth0, inter.l, inter.tox, inter.vdd, intra.vth0, intra.l, intra.tox})
            if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidInput("variation sigmas must be finite and >= 0");
        if (intra.vdd != 0.0) throw InvalidInput("vdd variation is inter-die only");
        if (samples < 1) throw InvalidInput("sample count must be at least 1");
        if (bins < 1) throw InvalidInput("histogram needs at least one bin");
        for (double k : {l_to_vth, tox_to_vth, tox_beta})
            if (!std::isfinite(k)) throw InvalidInput("variation mapping coefficients must be finite");
    }
};

inline VariationSpec parse_variation(std::string_view text) {
    VariationSpec spec;
    for (const auto& kv : text::parse_key_values(text)) {
        auto num = [&] { return text::value_as_double(kv); };
        auto integer = [&](double lo) {
            double x = num();
            if (x != std::floor(x) || x < lo || x > 9.007199254740992e15)
                throw ParseError(kv.line, "'" + kv.key + "' must be an integer");
            return x;
        };
        if (kv.section.empty()) {
            if (kv.key == "samples") spec.samples = static_cast<int>(std::min(integer(1), 1e9));
            else if (kv.key == "seed") spec.seed = static_cast<std::uint64_t>(integer(0));
            else if (kv.key == "bins") spec.bins = static_cast<int>(std::min(integer(1), 1e6));
            else throw ParseError(kv.line, "unknown key '" + kv.key + "'");
        } else if (kv.section == "inter" || kv.section == "intra") {
            auto& s = kv.section == "inter" ? spec.inter : spec.intra;
            if (kv.key == "vth0") s.vth0 = num();
            else if (kv.key == "l") s.l = num();
            else if (kv.key == "tox") s.tox = num();
            else if (kv.key == "vdd" && kv.section == "inter") s.vdd = num();
            else throw ParseError(kv.line, "unknown key '" + kv.key + "' in [" + kv.section + "]");
        } else if (kv.section == "mapping") {
            if (kv.key == "l_to_vth") spec.l_to_vth = num();
            else if (kv.key == "tox_to_vth") spec.tox_to_vth = num();
            else if (kv.key == "tox_beta") spec.tox_beta = num();
            else throw ParseError(kv.line, "unknown key '" + kv.key + "' in [mapping]");
        } else {
            throw ParseError(kv.line, "unknown section [" + kv.section + "]");
        }
    }
    spec.validate();
    return spec;
}

inline constexpr double kTruncationSigmas = 4.0;

/// Standard normal draws truncated at +-4 sigma. Box-Muller on 53-bit
/// uniforms taken directly from the engine, so streams are identical across
/// standard library implementations.
class TruncatedNormal {
public:
    explicit TruncatedNormal(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        for (;;) {
            double z = raw();
            if (std::fabs(z) <= kTruncationSigmas) return z;
        }
    }

    double draw(double sigma) { return sigma == 0.0 ? 0.0 : sigma * (*this)(); }

private:
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    double raw() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct ParameterShift {
    double vth = 0.0;
    double tunnel_scale = 1.0;
};

inline ParameterShift map_shift(const VariationSpec& s, double dvth0, double dl, double dtox) {
    // Shorter channels lower the threshold; thicker oxide raises it.
    return {dvth0 - s.l_to_vth * dl + s.tox_to_vth * dtox, std::exp(-s.tox_beta * dtox)};
}

inline DeviceParams apply_shift(DeviceParams p, const ParameterShift& a, const ParameterShift& b) {
    p.vth0 += a.vth + b.vth;
    double k = a.tunnel_scale * b.tunnel_scale;
    p.a_ov *= k;
    p.a_ch *= k;
    p.a_gb *= k;
    return p;
}

struct VariationSample {
    GateDeviceTable devices;
    double vdd = 0.0;
};

/// Draws sample parameters. The stream order is fixed: inter-die vth0, l,
/// tox, vdd, then per gate and per transistor vth0, l, tox.
inline VariationSample draw_sample(TruncatedNormal& rng, const GateDeviceTable& base, const VariationSpec& spec,
                                   double vdd) {
    VariationSample s;
    double iv = rng.draw(spec.inter.vth0);
    double il = rng.draw(spec.inter.l);
    double it = rng.draw(spec.inter.tox);
    s.vdd = vdd + rng.draw(spec.inter.vdd);
    auto inter = map_shift(spec, iv, il, it);
    s.devices = base;
    for (auto& gate : s.devices)
        for (auto& p : gate) {
            double v = rng.draw(spec.intra.vth0);
            double l = rng.draw(spec.intra.l);
            double t = rng.draw(spec.intra.tox);
            p = apply_shift(p, inter, map_shift(spec, v, l, t));
        }
    return s;
}

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<int> counts;
};

struct Statistics {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    double min = 0.0;
    double max = 0.0;
    double p1 = 0.0;
    double p50 = 0.0;
    double p99 = 0.0;
    Histogram histogram;
};

/// Linear-interpolated percentile of sorted data, q in [0, 100].
inline double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw InvalidInput("percentile of an empty sample");
    double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
    auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= sorted.size()) return sorted.back();
    double f = pos - static_cast<double>(i);
    return sorted[i] + f * (sorted[i + 1] - sorted[i]);
}

inline Statistics summarize(std::vector<double> x, int bins) {
    if (x.empty()) throw InvalidInput("no samples to summarize");
    Statistics s;
    double sum = 0.0;
    for (double v : x) sum += v;
    s.mean = sum / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.stddev = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
    std::sort(x.begin(), x.end());
    s.min = x.front();
    s.max = x.back();
    s.p1 = percentile(x, 1);
    s.p50 = percentile(x, 50);
    s.p99 = percentile(x, 99);
    s.histogram.lo = s.min;
    s.histogram.hi = s.max;
    s.histogram.counts.assign(static_cast<std::size_t>(bins), 0);
    double width = (s.max - s.min) / bins;
    for (double v : x) {
        auto b = width > 0 ? static_cast<std::size_t>((v - s.min) / width) : 0;
        ++s.histogram.counts[std::min(b, static_cast<std::size_t>(bins - 1))];
    }
    return s;
}

struct DistributionSummary {
    Statistics isub;
    Statistics igate;
    Statistics ibtbt;
    Statistics itotal;
};

inline DistributionSummary summarize(const std::vector<LeakageComponents>& samples, int bins) {
    std::vector<double> s, g, b, t;
    for (const auto& c : samples) {
        s.push_back(c.isub);
        g.push_back(c.igate());
        b.push_back(c.ibtbt());
        t.push_back(c.itotal());
    }
    return {summarize(s, bins), summarize(g, bins), summarize(b, bins), summarize(t, bins)};
}

struct MonteCarloResult {
    VariationSpec spec;
    std::vector<LeakageComponents> with_loading;  // circuit totals per kept sample
    std::vector<LeakageComponents> without_loading;
    DistributionSummary loaded;
    DistributionSummary unloaded;
    int failures = 0;
};

inline constexpr double kFailureBudget = 0.01;

inline MonteCarloResult monte_carlo(const Circuit& c, const InputVector& vector, const Technology& tech,
                                    const VariationSpec& spec, const Environment& env, const SolverConfig& cfg = {},
                                    const GateLibrary& lib = standard_library()) {
    spec.validate();
    tech.validate();
    env.validate();
    MonteCarloResult out;
    out.spec = spec;
    auto base = bind_circuit(c, tech, lib);
    TruncatedNormal rng(spec.seed);
    for (int i = 0; i < spec.samples; ++i) {
        auto sample = draw_sample(rng, base, spec, env.vdd);
        Environment e = env;
        e.vdd = sample.vdd;
        e.validate();
        // Without loading the estimate is the nominal total of the same run.
        detail::Estimator est(c, lib, sample.devices, false, e, cfg);
        auto rep = detail::estimate_impl(c, vector, est, e, {true, false});
        if (rep.warnings > 0) {
            ++out.failures;
            continue;
        }
        out.with_loading.push_back(rep.total_loaded);
        out.without_loading.push_back(rep.total_nominal);
    }
    if (out.failures > kFailureBudget * spec.samples)
        throw SolverError("Monte Carlo: " + std::to_string(out.failures) + " of " + std::to_string(spec.samples) +
                              " samples failed to solve (budget 1%)",
                          0.0, 0.0);
    out.loaded = summarize(out.with_loading, spec.bins);
    out.unloaded = summarize(out.without_loading, spec.bins);
    return out;
}

struct TemperaturePoint {
    double temperature = 0.0;
    LoadingReport report;
};

inline std::vector<TemperaturePoint> temperature_sweep(const Circuit& c, const InputVector& vector,
                                                       const Technology& tech, const std::vector<double>& temperatures,
                                                       const Environment& env, const SolverConfig& cfg = {},
                                                       const GateLibrary& lib = standard_library()) {
    if (temperatures.empty()) throw InvalidInput("temperature list is empty");
    std::vector<TemperaturePoint> out;
    for (double t : temperatures) {
        Environment e = env;
        e.temperature = t;
        e.validate();
        out.push_back({t, estimate(c, vector, tech, e, cfg, {}, lib)});
    }
    return out;
}

}  // namespace leakload
