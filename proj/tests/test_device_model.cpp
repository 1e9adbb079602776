#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "leakload/device_model.hpp"
#include "leakload/technology.hpp"

using namespace leakload;
using Catch::Matchers::WithinRel;

namespace {

DeviceParams plain() {
    DeviceParams p;
    p.is0 = 2e-6;
    p.n = 1.4;
    p.vth0 = 0.3;
    p.lambda_dibl = 0.1;
    p.kappa_vth_t = 1e-3;
    p.a_ov = 3e-10;
    p.a_ch = 1e-9;
    p.a_gb = 2e-11;
    p.alpha_g = 1.5;
    p.jb = 4e-5;
    p.bb0 = 8.0;
    p.kappa_bb_t = 4e-4;
    p.w_ratio = 2.0;
    return p;
}

// Reference formulas written out independently of the library.
double ref_isub(const DeviceParams& p, double vgs, double vds, double t) {
    double vt = 8.617333262e-5 * t;
    double vth = p.vth0 - p.kappa_vth_t * (t - 300.0);
    return p.is0 * p.w_ratio * std::exp((vgs - vth + p.lambda_dibl * vds) / (p.n * vt)) * (1.0 - std::exp(-vds / vt));
}

double ref_tunnel(double a, double w, double alpha, double v) { return a * w * (std::exp(alpha * std::fabs(v)) - 1.0); }

double ref_btbt(const DeviceParams& p, double vr, double t) {
    return p.jb * p.w_ratio * vr * std::exp(-p.bb0 * (1.0 - p.kappa_bb_t * (t - 300.0)) / vr);
}

}  // namespace

TEST_CASE("subthreshold current matches the reference expression") {
    auto p = plain();
    for (double t : {250.0, 300.0, 400.0})
        for (double vgs : {-0.1, 0.0, 0.1})
            for (double vds : {0.01, 0.3, 0.9}) {
                Environment env{t, 0.9};
                double got = eval_subthreshold(p, {vgs, vds, 0.0, 0.0}, env);
                CHECK_THAT(got, WithinRel(ref_isub(p, vgs, vds, t), 1e-12));
            }
}

TEST_CASE("channel current is antisymmetric under drain/source exchange") {
    auto p = plain();
    Environment env;
    double fwd = eval_subthreshold(p, {0.05, 0.6, 0.1, 0.0}, env);
    double rev = eval_subthreshold(p, {0.05, 0.1, 0.6, 0.0}, env);
    CHECK_THAT(rev, WithinRel(-fwd, 1e-12));
    CHECK(eval_subthreshold(p, {0.0, 0.2, 0.2, 0.0}, env) == 0.0);
}

TEST_CASE("strong-inversion limiter is negligible in subthreshold and caps strong inversion") {
    auto p = plain();
    p.i_on = 1e-5;
    auto q = p;
    q.i_on = 0.0;
    Environment env;
    double off = eval_subthreshold(p, {0.0, 0.9, 0.0, 0.0}, env);
    double off_ref = eval_subthreshold(q, {0.0, 0.9, 0.0, 0.0}, env);
    double x = off_ref / (p.i_on * p.w_ratio);
    CHECK(std::fabs(off / off_ref - 1.0) <= 0.3 * std::pow(x, 4) + 1e-15);
    double on = eval_subthreshold(p, {0.9, 0.9, 0.0, 0.0}, env);
    CHECK(on <= p.i_on * p.w_ratio * (1.0 + 1e-12));
    CHECK(on > 0.7 * p.i_on * p.w_ratio);
}

TEST_CASE("gate tunneling matches the reference expressions") {
    auto p = plain();
    Environment env;
    SECTION("off device: overlap terms only") {
        auto g = eval_gate_tunneling(p, {0.0, 0.9, 0.0, 0.0}, env);
        CHECK(g.igc == 0.0);
        CHECK(g.igso == 0.0);
        CHECK_THAT(g.igdo, WithinRel(ref_tunnel(p.a_ov, p.w_ratio, p.alpha_g, -0.9), 1e-12));
        CHECK(g.igb == 0.0);
    }
    SECTION("on device: channel and both overlaps") {
        auto g = eval_gate_tunneling(p, {0.9, 0.0, 0.0, 0.0}, env);
        CHECK_THAT(g.igc, WithinRel(ref_tunnel(p.a_ch, p.w_ratio, p.alpha_g, 0.9), 1e-12));
        CHECK_THAT(g.igso, WithinRel(ref_tunnel(p.a_ov, p.w_ratio, p.alpha_g, 0.9), 1e-12));
        CHECK_THAT(g.igdo, WithinRel(ref_tunnel(p.a_ov, p.w_ratio, p.alpha_g, 0.9), 1e-12));
        CHECK_THAT(g.igb, WithinRel(ref_tunnel(p.a_gb, p.w_ratio, p.alpha_g, 0.9), 1e-12));
    }
}

TEST_CASE("junction tunneling matches the reference expression") {
    auto p = plain();
    for (double t : {300.0, 375.0}) {
        Environment env{t, 0.9};
        auto j = eval_btbt(p, {0.0, 0.9, 0.0, 0.0}, env);
        CHECK_THAT(j.drain, WithinRel(ref_btbt(p, 0.9, t), 1e-12));
        CHECK(j.source == 0.0);
    }
    auto forward = eval_btbt(p, {0.0, -0.2, 0.0, 0.0}, Environment{});
    CHECK(forward.drain == 0.0);
}

TEST_CASE("terminal currents are conserved for both polarities") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.05, 0.95);
    auto p = plain();
    Environment env;
    for (int i = 0; i < 500; ++i) {
        TerminalVoltages v{u(rng), u(rng), u(rng), u(rng)};
        for (auto pol : {Polarity::NMOS, Polarity::PMOS}) {
            auto e = eval_components(p, pol, v, env);
            double scale = std::fabs(e.terminals.drain) + std::fabs(e.terminals.gate) + std::fabs(e.terminals.source) +
                           std::fabs(e.terminals.body);
            CHECK(std::fabs(e.terminals.sum()) <= 1e-12 * scale + 1e-30);
            CHECK(e.components.isub >= 0);
            CHECK(e.components.igate() >= 0);
            CHECK(e.components.ibtbt() >= 0);
            CHECK(e.components.itotal() == e.components.isub + e.components.igate() + e.components.ibtbt());
        }
    }
}

TEST_CASE("PMOS is the mirrored NMOS evaluation") {
    auto p = plain();
    Environment env;
    TerminalVoltages v{0.9, 0.0, 0.9, 0.9};
    auto pm = eval_components(p, Polarity::PMOS, v, env);
    auto nm = eval_components(p, Polarity::NMOS, v.mirrored(), env);
    CHECK(pm.components == nm.components);
    CHECK(pm.terminals.drain == -nm.terminals.drain);
    CHECK(pm.terminals.gate == -nm.terminals.gate);
}

TEST_CASE("leakage components are monotone in their controlling variables") {
    auto p = plain();
    double prev = 0.0;
    for (double t = 240.0; t <= 420.0; t += 20.0) {
        double i = eval_subthreshold(p, {0.0, 0.9, 0.0, 0.0}, Environment{t, 0.9});
        CHECK(i > prev);
        prev = i;
    }
    prev = 0.0;
    for (double vds = 0.1; vds <= 1.2; vds += 0.1) {
        double i = eval_subthreshold(p, {0.0, vds, 0.0, 0.0}, Environment{});
        CHECK(i > prev);
        prev = i;
    }
    prev = 0.0;
    for (double vg = 0.1; vg <= 1.2; vg += 0.1) {
        double g = eval_components(p, Polarity::NMOS, {vg, 0.0, 0.0, 0.0}, Environment{}).components.igate();
        CHECK(g > prev);
        prev = g;
    }
    prev = 0.0;
    for (double t = 240.0; t <= 420.0; t += 20.0) {
        double b = eval_btbt(p, {0.0, 0.9, 0.0, 0.0}, Environment{t, 0.9}).drain;
        CHECK(b > prev);
        prev = b;
    }
}

TEST_CASE("invalid device inputs are rejected") {
    auto p = plain();
    Environment env;
    CHECK_THROWS_AS(eval_components(p, Polarity::NMOS, {NAN, 0, 0, 0}, env), InvalidInput);
    CHECK_THROWS_AS(eval_components(p, Polarity::NMOS, {0, 0, 0, 0}, Environment{500.0, 0.9}), InvalidInput);
    CHECK_THROWS_AS(eval_components(p, Polarity::NMOS, {0, 0, 0, 0}, Environment{300.0, 0.0}), InvalidInput);
    auto bad = p;
    bad.n = 0.9;
    CHECK_THROWS_AS(eval_components(bad, Polarity::NMOS, {0, 0, 0, 0}, env), InvalidInput);
    bad = p;
    bad.a_ov = -1;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad = p;
    bad.bb0 = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("parameter files round-trip and presets are named") {
    for (auto name : kPresetNames) {
        auto t = preset(name);
        CHECK(parse_params(format_params(t)) == t);
    }
    CHECK(preset("d25-g") == preset("D25-G"));
    CHECK(preset("DEFAULT") == preset("D25-S"));
    CHECK_THROWS_AS(preset("D25-X"), InvalidInput);
    CHECK_THROWS_AS(parse_params("[nmos]\nfoo = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_params("[core]\nn = 1.2\n"), ParseError);
    auto t = parse_params("base = D25-G\n[pmos]\nvth0 = 0.35\n");
    CHECK(t.nmos == preset("D25-G").nmos);
    CHECK(t.pmos.vth0 == 0.35);
}

TEST_CASE("preset files match the built-in presets") {
    for (auto name : {"D25-S", "D25-G", "D25-JN"}) {
        auto path = std::string(LEAKLOAD_SOURCE_DIR) + "/presets/" + name + ".params";
        CHECK(parse_params(text::read_file(path)) == preset(name));
    }
}
