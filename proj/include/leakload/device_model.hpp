#pragma once

// Closed-form leakage current sources of a single bulk MOSFET: channel
// (subthreshold) current, gate direct tunneling split into overlap/channel/
// bulk parts, and drain/source junction band-to-band tunneling. Every
// evaluator works in the NMOS frame; PMOS devices are evaluated by negating
// all terminal voltages and negating the resulting terminal currents.

#include <cmath>
#include <string>

#include "leakload/error.hpp"

namespace leakload {

enum class Polarity { NMOS, PMOS };

inline const char* to_string(Polarity p) { return p == Polarity::NMOS ? "nmos" : "pmos"; }

inline constexpr double kBoltzmannOverQ = 8.617333262e-5;  // V/K
inline constexpr double kReferenceTemperature = 300.0;     // K

/// Compact-model coefficients for one polarity at one process corner.
struct DeviceParams {
    double is0 = 0.0;          // subthreshold prefactor (A)
    double n = 1.3;            // subthreshold swing factor
    double vth0 = 0.3;         // zero-bias threshold at 300 K (V)
    double lambda_dibl = 0.0;  // DIBL coefficient (V/V)
    double kappa_vth_t = 0.0;  // threshold temperature coefficient (V/K)
    double a_ov = 0.0;         // gate-to-overlap tunneling prefactor (A)
    double a_ch = 0.0;         // gate-to-channel tunneling prefactor (A)
    double a_gb = 0.0;         // gate-to-body tunneling prefactor (A), off by default
    double alpha_g = 1.0;      // tunneling voltage exponent (1/V)
    double jb = 0.0;           // BTBT prefactor (A/V)
    double bb0 = 1.0;          // BTBT exponential constant (V)
    double kappa_bb_t = 0.0;   // BTBT bandgap temperature coefficient (1/K)
    double w_ratio = 1.0;      // width relative to the unit device
    // Strong-inversion current limit per unit width (A). The channel current
    // saturates smoothly towards it once the gate is well above threshold; in
    // subthreshold the limiter's relative effect is (I/i_on)^4 / 4. Zero
    // disables the limiter.
    double i_on = 0.0;

    bool operator==(const DeviceParams&) const = default;

    [[nodiscard]] DeviceParams scaled_width(double factor) const {
        DeviceParams p = *this;
        p.w_ratio *= factor;
        return p;
    }

    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!(finite(is0) && finite(n) && finite(vth0) && finite(lambda_dibl) && finite(kappa_vth_t) &&
              finite(a_ov) && finite(a_ch) && finite(a_gb) && finite(alpha_g) && finite(jb) &&
              finite(bb0) && finite(kappa_bb_t) && finite(w_ratio) && finite(i_on)))
            throw InvalidInput("device parameters must be finite");
        if (is0 < 0 || a_ov < 0 || a_ch < 0 || a_gb < 0 || jb < 0 || i_on < 0)
            throw InvalidInput("device prefactors must be non-negative");
        if (!(n > 1.0 && n <= 3.0)) throw InvalidInput("subthreshold swing factor n must lie in (1, 3]");
        if (!(alpha_g > 0)) throw InvalidInput("alpha_g must be positive");
        if (!(bb0 > 0)) throw InvalidInput("bb0 must be positive");
        if (!(w_ratio > 0)) throw InvalidInput("w_ratio must be positive");
    }
};

/// Operating environment shared by every device of a circuit.
struct Environment {
    double temperature = 300.0;  // K
    double vdd = 0.9;            // V

    [[nodiscard]] double thermal_voltage() const { return kBoltzmannOverQ * temperature; }

    void validate() const {
        if (!std::isfinite(temperature) || temperature < 233.0 || temperature > 425.0)
            throw InvalidInput("temperature must lie in [233, 425] K");
        if (!std::isfinite(vdd) || !(vdd > 0.0) || vdd > 1.5)
            throw InvalidInput("vdd must lie in (0, 1.5] V");
    }
};

struct TerminalVoltages {
    double vg = 0.0;
    double vd = 0.0;
    double vs = 0.0;
    double vb = 0.0;

    [[nodiscard]] TerminalVoltages mirrored() const { return {-vg, -vd, -vs, -vb}; }
    [[nodiscard]] bool finite() const {
        return std::isfinite(vg) && std::isfinite(vd) && std::isfinite(vs) && std::isfinite(vb);
    }
};

/// Current magnitudes (A) per leakage mechanism.
struct LeakageComponents {
    double isub = 0.0;
    double igc = 0.0;
    double igso = 0.0;
    double igdo = 0.0;
    double igb = 0.0;
    double ibtbt_drain = 0.0;
    double ibtbt_source = 0.0;

    [[nodiscard]] double igate() const { return igc + igso + igdo + igb; }
    [[nodiscard]] double ibtbt() const { return ibtbt_drain + ibtbt_source; }
    [[nodiscard]] double itotal() const { return isub + igate() + ibtbt(); }

    LeakageComponents& operator+=(const LeakageComponents& o) {
        isub += o.isub;
        igc += o.igc;
        igso += o.igso;
        igdo += o.igdo;
        igb += o.igb;
        ibtbt_drain += o.ibtbt_drain;
        ibtbt_source += o.ibtbt_source;
        return *this;
    }
    bool operator==(const LeakageComponents&) const = default;
};

/// Signed currents flowing into each device terminal (A). They sum to zero.
struct TerminalCurrents {
    double drain = 0.0;
    double gate = 0.0;
    double source = 0.0;
    double body = 0.0;

    [[nodiscard]] double sum() const { return drain + gate + source + body; }
};

struct DeviceEvaluation {
    LeakageComponents components;
    TerminalCurrents terminals;
    double channel = 0.0;  // signed drain-to-source channel current in the device frame
};

namespace detail {

inline double threshold(const DeviceParams& p, double temperature) {
    return p.vth0 - p.kappa_vth_t * (temperature - kReferenceTemperature);
}

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

// Drain-to-source channel current for vds >= 0, NMOS frame.
inline double forward_channel(const DeviceParams& p, double vgs, double vds, double temperature) {
    if (p.is0 <= 0.0 || vds <= 0.0) return 0.0;
    double vt = kBoltzmannOverQ * temperature;
    double x = (vgs - threshold(p, temperature) + p.lambda_dibl * vds) / (p.n * vt);
    double log_i = std::log(p.is0 * p.w_ratio) + x;
    if (p.i_on > 0.0) log_i -= 0.25 * softplus(4.0 * (log_i - std::log(p.i_on * p.w_ratio)));
    return std::exp(log_i) * -std::expm1(-vds / vt);
}

// The device is symmetric: for vds < 0 drain and source exchange roles.
inline double channel_current(const DeviceParams& p, double vgs, double vds, double temperature) {
    if (vds >= 0.0) return forward_channel(p, vgs, vds, temperature);
    return -forward_channel(p, vgs - vds, -vds, temperature);
}

inline double tunnel_shape(double alpha, double x) {
    double m = std::expm1(alpha * std::fabs(x));
    return x < 0.0 ? -m : m;
}

inline double junction(const DeviceParams& p, double reverse_bias, double temperature) {
    if (p.jb <= 0.0 || reverse_bias <= 1e-9) return 0.0;
    double barrier = p.bb0 * (1.0 - p.kappa_bb_t * (temperature - kReferenceTemperature));
    return p.jb * p.w_ratio * reverse_bias * std::exp(-barrier / reverse_bias);
}

// NMOS-frame evaluation without input validation (hot path of the solvers).
inline DeviceEvaluation evaluate_nmos_frame(const DeviceParams& p, const TerminalVoltages& v, double temperature) {
    const double vgs = v.vg - v.vs;
    const double vgd = v.vg - v.vd;
    const double vgb = v.vg - v.vb;
    const double vds = v.vd - v.vs;

    DeviceEvaluation e;
    e.channel = channel_current(p, vgs, vds, temperature);

    const double w = p.w_ratio;
    const double gso = p.a_ov * w * tunnel_shape(p.alpha_g, vgs);
    const double gdo = p.a_ov * w * tunnel_shape(p.alpha_g, vgd);
    const double gc = vgs > threshold(p, temperature) ? p.a_ch * w * tunnel_shape(p.alpha_g, vgs) : 0.0;
    const double gb = p.a_gb * w * tunnel_shape(p.alpha_g, vgb);
    const double bd = junction(p, v.vd - v.vb, temperature);
    const double bs = junction(p, v.vs - v.vb, temperature);

    // Channel tunneling splits evenly between the source and drain ends.
    const double gcs = 0.5 * gc;
    const double gcd = gc - gcs;

    e.terminals.drain = e.channel - gdo - gcd + bd;
    e.terminals.gate = gso + gdo + gc + gb;
    e.terminals.source = -e.channel - gso - gcs + bs;
    e.terminals.body = -gb - bd - bs;

    e.components.isub = std::fabs(e.channel);
    e.components.igc = std::fabs(gc);
    e.components.igso = std::fabs(gso);
    e.components.igdo = std::fabs(gdo);
    e.components.igb = std::fabs(gb);
    e.components.ibtbt_drain = bd;
    e.components.ibtbt_source = bs;
    return e;
}

inline void check_inputs(const DeviceParams& p, const TerminalVoltages& v, const Environment& env) {
    if (!v.finite()) throw InvalidInput("terminal voltages must be finite");
    env.validate();
    p.validate();
}

}  // namespace detail

/// Evaluates one transistor in its own polarity. `terminals` are the signed
/// currents into the device pins, `components` the mechanism magnitudes.
inline DeviceEvaluation evaluate_device(const DeviceParams& p, Polarity polarity, const TerminalVoltages& v,
                                        double temperature) {
    if (polarity == Polarity::NMOS) return detail::evaluate_nmos_frame(p, v, temperature);
    DeviceEvaluation e = detail::evaluate_nmos_frame(p, v.mirrored(), temperature);
    e.terminals = {-e.terminals.drain, -e.terminals.gate, -e.terminals.source, -e.terminals.body};
    return e;
}

/// Subthreshold drain current, NMOS frame. Negative when vds < 0.
inline double eval_subthreshold(const DeviceParams& p, const TerminalVoltages& v, const Environment& env) {
    detail::check_inputs(p, v, env);
    return detail::channel_current(p, v.vg - v.vs, v.vd - v.vs, env.temperature);
}

struct GateTunneling {
    double igc = 0.0;
    double igso = 0.0;
    double igdo = 0.0;
    double igb = 0.0;
};

/// Gate direct-tunneling magnitudes, NMOS frame. Temperature only enters
/// through the channel-inversion test.
inline GateTunneling eval_gate_tunneling(const DeviceParams& p, const TerminalVoltages& v, const Environment& env) {
    detail::check_inputs(p, v, env);
    auto c = detail::evaluate_nmos_frame(p, v, env.temperature).components;
    return {c.igc, c.igso, c.igdo, c.igb};
}

struct JunctionTunneling {
    double drain = 0.0;
    double source = 0.0;
};

inline JunctionTunneling eval_btbt(const DeviceParams& p, const TerminalVoltages& v, const Environment& env) {
    detail::check_inputs(p, v, env);
    return {detail::junction(p, v.vd - v.vb, env.temperature), detail::junction(p, v.vs - v.vb, env.temperature)};
}

/// Validated full evaluation of one device.
inline DeviceEvaluation eval_components(const DeviceParams& p, Polarity polarity, const TerminalVoltages& v,
                                        const Environment& env) {
    detail::check_inputs(p, v, env);
    return evaluate_device(p, polarity, v, env.temperature);
}

}  // namespace leakload
