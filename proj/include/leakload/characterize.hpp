#pragma once

// Single-device and isolated-gate characterization, plus parameter sweeps
// along one axis.

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "leakload/device_model.hpp"
#include "leakload/error.hpp"
#include "leakload/gate_library.hpp"
#include "leakload/node_solver.hpp"
#include "leakload/technology.hpp"

namespace leakload {

/// Gate solved in isolation with rail-level inputs and no loading.
inline GateLeakage isolated_gate(const Technology& tech, GateType type, std::span<const std::uint8_t> bits,
                                 const Environment& env, const SolverConfig& cfg = {},
                                 const GateLibrary& lib = standard_library()) {
    const auto& t = lib.template_for(type);
    auto params = bind_devices(t, tech);
    auto pt = solve_gate(t, params, rail_voltages(bits, env.vdd), 0.0, env, cfg);
    return gate_leakage(pt, t, params, env);
}

inline LeakageComponents scaled(LeakageComponents c, double f) {
    c.isub *= f;
    c.igc *= f;
    c.igso *= f;
    c.igdo *= f;
    c.igb *= f;
    c.ibtbt_drain *= f;
    c.ibtbt_source *= f;
    return c;
}

/// Isolated inverter leakage averaged over inputs 0 and 1.
inline LeakageComponents inverter_average(const Technology& tech, const Environment& env) {
    LeakageComponents sum;
    for (std::uint8_t b : {std::uint8_t{0}, std::uint8_t{1}}) sum += isolated_gate(tech, GateType::INV, {&b, 1}, env).components;
    return scaled(sum, 0.5);
}

enum class SweepAxis { Temperature, Vdd, Parameter };

struct AxisSpec {
    SweepAxis axis = SweepAxis::Temperature;
    std::string parameter;  // DeviceParams field, applied to both polarities
};

inline AxisSpec parse_axis(std::string_view name) {
    if (name == "temp" || name == "T" || name == "temperature") return {SweepAxis::Temperature, {}};
    if (name == "vdd" || name == "Vdd") return {SweepAxis::Vdd, {}};
    for (const auto& f : detail::kParamFields)
        if (name == f.key) return {SweepAxis::Parameter, std::string(name)};
    throw InvalidInput("unknown sweep axis '" + std::string(name) + "' (temp, vdd or a device parameter name)");
}

/// Evenly spaced points from `from` to `to` inclusive.
inline std::vector<double> linear_range(double from, double to, int points) {
    if (points < 1) throw InvalidInput("range needs at least one point");
    if (!std::isfinite(from) || !std::isfinite(to)) throw InvalidInput("range bounds must be finite");
    if (points == 1) {
        if (from != to) throw InvalidInput("a one-point range needs equal bounds");
        return {from};
    }
    if (from == to) throw InvalidInput("empty range");
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = from + (to - from) * i / (points - 1);
    return out;
}

struct CharacterizationRow {
    double x = 0.0;
    LeakageComponents nmos_off;  // single NMOS, Vg = Vs = Vb = 0, Vd = Vdd
    LeakageComponents pmos_off;  // single PMOS, mirrored bias
    LeakageComponents inv0;      // isolated inverter, input 0
    LeakageComponents inv1;      // isolated inverter, input 1
};

inline std::vector<CharacterizationRow> characterize(const Technology& base, const Environment& base_env,
                                                     const AxisSpec& axis, const std::vector<double>& values) {
    if (values.empty()) throw InvalidInput("empty range");
    std::vector<CharacterizationRow> rows;
    for (double x : values) {
        Technology tech = base;
        Environment env = base_env;
        switch (axis.axis) {
            case SweepAxis::Temperature: env.temperature = x; break;
            case SweepAxis::Vdd: env.vdd = x; break;
            case SweepAxis::Parameter:
                for (const auto& f : detail::kParamFields)
                    if (axis.parameter == f.key) {
                        tech.nmos.*(f.member) = x;
                        tech.pmos.*(f.member) = x;
                    }
                break;
        }
        env.validate();
        tech.validate();
        CharacterizationRow r;
        r.x = x;
        r.nmos_off = eval_components(tech.nmos, Polarity::NMOS, {0.0, env.vdd, 0.0, 0.0}, env).components;
        r.pmos_off = eval_components(tech.pmos, Polarity::PMOS, {env.vdd, 0.0, env.vdd, env.vdd}, env).components;
        std::uint8_t b0 = 0, b1 = 1;
        r.inv0 = isolated_gate(tech, GateType::INV, {&b0, 1}, env).components;
        r.inv1 = isolated_gate(tech, GateType::INV, {&b1, 1}, env).components;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace leakload
