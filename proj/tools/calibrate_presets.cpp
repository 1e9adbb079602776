// Fits the prefactors of the named device presets.
//
// Each preset fixes the shape coefficients and the strong-inversion current
// and asks for a component split of the isolated inverter leakage (averaged
// over inputs 0 and 1, 0.9 V, 300 K). is0, a_ch (a_ov follows at 0.3x) and jb
// are rescaled until the split and the common total are met.
//
//   calibrate_presets [--out DIR]
//
// Prints the fitted values as `make_tech` arguments and, with --out, writes
// DIR/<name>.params.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "leakload/characterize.hpp"
#include "leakload/technology.hpp"
#include "leakload/text_util.hpp"

namespace {

using leakload::Technology;

struct Target {
    const char* name;
    double sub, gate, jn;  // fractions of itotal
    double i_on;
    double pmos_is0_ratio, pmos_a_ch_ratio, pmos_jb_ratio;
};

constexpr double kTotal = 100e-9;

constexpr Target kTargets[] = {
    {"D25-S", 0.70, 0.15, 0.15, 1.5e-6, 0.6, 0.3, 3.0},
    {"D25-G", 0.15, 0.70, 0.15, 1.2e-5, 0.6, 0.3, 3.0},
    {"D25-JN", 0.15, 0.15, 0.70, 1.5e-6, 0.6, 0.3, 3.0},
};

double round_sig(double x, int digits) {
    if (x == 0.0) return 0.0;
    double scale = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::fabs(x)))));
    return std::round(x * scale) / scale;
}

Technology build(const Target& t, double is0, double a_ch, double jb) {
    return leakload::detail::make_tech(is0, round_sig(is0 * t.pmos_is0_ratio, 4), a_ch,
                                       round_sig(a_ch * t.pmos_a_ch_ratio, 4), jb,
                                       round_sig(jb * t.pmos_jb_ratio, 4), t.i_on);
}

Technology fit(const Target& t) {
    const leakload::Environment env;
    double is0 = 1e-5, a_ch = 1e-8, jb = 1e-5;
    for (int it = 0; it < 200; ++it) {
        auto c = leakload::inverter_average(build(t, is0, a_ch, jb), env);
        double fs = t.sub * kTotal / c.isub;
        double fg = t.gate * kTotal / c.igate();
        double fj = t.jn * kTotal / c.ibtbt();
        is0 *= fs;
        a_ch *= fg;
        jb *= fj;
        if (std::fabs(fs - 1) < 1e-9 && std::fabs(fg - 1) < 1e-9 && std::fabs(fj - 1) < 1e-9) break;
    }
    return build(t, round_sig(is0, 4), round_sig(a_ch, 4), round_sig(jb, 4));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fit device preset prefactors"};
    std::string out_dir;
    app.add_option("--out", out_dir, "Directory for <name>.params files");
    CLI11_PARSE(app, argc, argv);

    const leakload::Environment env;
    for (const auto& t : kTargets) {
        auto tech = fit(t);
        auto c = leakload::inverter_average(tech, env);
        std::printf("%-7s make_tech(%s, %s, %s, %s, %s, %s, %s)\n", t.name,
                    leakload::text::format_double(tech.nmos.is0).c_str(),
                    leakload::text::format_double(tech.pmos.is0).c_str(),
                    leakload::text::format_double(tech.nmos.a_ch).c_str(),
                    leakload::text::format_double(tech.pmos.a_ch).c_str(),
                    leakload::text::format_double(tech.nmos.jb).c_str(),
                    leakload::text::format_double(tech.pmos.jb).c_str(),
                    leakload::text::format_double(tech.nmos.i_on).c_str());
        std::printf("        itotal %.4g A  sub %.3f  gate %.3f  jn %.3f\n", c.itotal(), c.isub / c.itotal(),
                    c.igate() / c.itotal(), c.ibtbt() / c.itotal());
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            auto path = std::filesystem::path(out_dir) / (std::string(t.name) + ".params");
            leakload::text::write_file_atomic(path.string(),
                                              leakload::format_params(tech, std::string("preset ") + t.name));
        }
    }
    return 0;
}
