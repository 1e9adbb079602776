#pragma once

// Device parameter pairs (NMOS + PMOS), named presets and the key=value
// parameter file format:
//
//   # comment
//   [nmos]
//   is0 = 4.5e-5
//   ...
//   [pmos]
//   ...
//
// Keys missing from a file keep the value of the DEFAULT preset (or of the
// preset named by a top-level `base = NAME` entry).

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "leakload/device_model.hpp"
#include "leakload/error.hpp"
#include "leakload/text_util.hpp"

namespace leakload {

struct Technology {
    DeviceParams nmos;
    DeviceParams pmos;

    [[nodiscard]] const DeviceParams& params(Polarity p) const { return p == Polarity::NMOS ? nmos : pmos; }
    [[nodiscard]] DeviceParams& params(Polarity p) { return p == Polarity::NMOS ? nmos : pmos; }

    void validate() const {
        nmos.validate();
        pmos.validate();
    }
    bool operator==(const Technology&) const = default;
};

namespace detail {

struct ParamField {
    const char* key;
    double DeviceParams::*member;
};

inline constexpr std::array<ParamField, 14> kParamFields = {{
    {"is0", &DeviceParams::is0},
    {"n", &DeviceParams::n},
    {"vth0", &DeviceParams::vth0},
    {"lambda_dibl", &DeviceParams::lambda_dibl},
    {"kappa_vth_t", &DeviceParams::kappa_vth_t},
    {"a_ov", &DeviceParams::a_ov},
    {"a_ch", &DeviceParams::a_ch},
    {"a_gb", &DeviceParams::a_gb},
    {"alpha_g", &DeviceParams::alpha_g},
    {"jb", &DeviceParams::jb},
    {"bb0", &DeviceParams::bb0},
    {"kappa_bb_t", &DeviceParams::kappa_bb_t},
    {"w_ratio", &DeviceParams::w_ratio},
    {"i_on", &DeviceParams::i_on},
}};

// Shared structure of the 25 nm-class presets. Prefactors (is0, a_ov, a_ch,
// jb) are produced by the calibration tool (tools/calibrate_presets.cpp); the
// remaining coefficients are set by hand per device flavor.
inline DeviceParams base_nmos() {
    DeviceParams p;
    p.n = 1.35;
    p.vth0 = 0.30;
    p.lambda_dibl = 0.08;
    p.kappa_vth_t = 0.8e-3;
    p.alpha_g = 1.5;
    p.bb0 = 8.0;
    p.kappa_bb_t = 4e-4;
    p.w_ratio = 1.0;
    return p;
}

inline DeviceParams base_pmos() {
    DeviceParams p = base_nmos();
    p.n = 1.6;
    p.lambda_dibl = 0.14;
    return p;
}

inline Technology make_tech(double is0_n, double is0_p, double a_ch_n, double a_ch_p, double jb_n, double jb_p,
                            double i_on) {
    Technology t{base_nmos(), base_pmos()};
    t.nmos.is0 = is0_n;
    t.pmos.is0 = is0_p;
    t.nmos.a_ch = a_ch_n;
    t.nmos.a_ov = 0.3 * a_ch_n;
    t.pmos.a_ch = a_ch_p;
    t.pmos.a_ov = 0.3 * a_ch_p;
    t.nmos.jb = jb_n;
    t.pmos.jb = jb_p;
    t.nmos.i_on = i_on;
    t.pmos.i_on = i_on;
    return t;
}

}  // namespace detail

inline constexpr std::array<std::string_view, 4> kPresetNames = {"D25-S", "D25-G", "D25-JN", "DEFAULT"};

/// Calibrated parameter pair for a named device flavor.
inline Technology preset(std::string_view name) {
    auto up = text::upper(name);
    if (up == "DEFAULT" || up == "D25-S")
        return detail::make_tech(7.311e-06, 4.387e-06, 3.457e-09, 1.037e-09, 3.552e-05, 0.0001066, 1.5e-06);
    if (up == "D25-G")
        return detail::make_tech(1.553e-06, 9.318e-07, 1.612e-08, 4.836e-09, 3.46e-05, 0.0001038, 1.2e-05);
    if (up == "D25-JN")
        return detail::make_tech(1.566e-06, 9.396e-07, 3.457e-09, 1.037e-09, 0.0001656, 0.0004968, 1.5e-06);
    std::string valid;
    for (auto n : kPresetNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
    throw InvalidInput("unknown preset '" + std::string(name) + "' (valid: " + valid + ")");
}

inline Technology parse_params(std::string_view text) {
    auto entries = text::parse_key_values(text);
    Technology tech = preset("DEFAULT");
    for (const auto& kv : entries)
        if (kv.section.empty()) {
            if (kv.key != "base") throw ParseError(kv.line, "only 'base' may appear before a section header");
            tech = preset(kv.value);
        }
    for (const auto& kv : entries) {
        if (kv.section.empty()) continue;
        if (kv.section != "nmos" && kv.section != "pmos")
            throw ParseError(kv.line, "unknown section [" + kv.section + "]; expected [nmos] or [pmos]");
        DeviceParams& p = tech.params(kv.section == "nmos" ? Polarity::NMOS : Polarity::PMOS);
        bool found = false;
        for (const auto& f : detail::kParamFields) {
            if (kv.key == f.key) {
                p.*(f.member) = text::value_as_double(kv);
                found = true;
                break;
            }
        }
        if (!found) throw ParseError(kv.line, "unknown parameter '" + kv.key + "'");
    }
    tech.validate();
    return tech;
}

inline std::string format_params(const Technology& tech, std::string_view title = {}) {
    std::string out;
    if (!title.empty()) out += "# " + std::string(title) + "\n";
    for (auto pol : {Polarity::NMOS, Polarity::PMOS}) {
        out += std::string("[") + to_string(pol) + "]\n";
        for (const auto& f : detail::kParamFields)
            out += std::string(f.key) + " = " + text::format_double(tech.params(pol).*(f.member)) + "\n";
    }
    return out;
}

}  // namespace leakload
