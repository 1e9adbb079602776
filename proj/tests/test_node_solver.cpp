#include <cmath>

#include "catch_amalgamated.hpp"
#include "leakload/node_solver.hpp"

using namespace leakload;
using Catch::Matchers::WithinAbs;

namespace {

const SolverConfig kTight{1e-17, 1e-13, 200, 100};

// Sign change of the output-node residual on a uniform grid, other nodes fixed.
double scan_root(const GateTemplate& t, std::span<const DeviceParams> params, std::vector<double> v, int node,
                 double injected, double lo, double hi, int steps) {
    auto f = [&](double x) {
        v[static_cast<std::size_t>(node)] = x;
        double inj = node == t.output_node() ? injected : 0.0;
        return inj - node_current(t, params, v, node, 300.0);
    };
    double prev_x = lo, prev = f(lo);
    for (int i = 1; i <= steps; ++i) {
        double x = lo + (hi - lo) * i / steps;
        double fx = f(x);
        if ((prev > 0) != (fx > 0)) return 0.5 * (prev_x + x);
        prev_x = x;
        prev = fx;
    }
    return NAN;
}

}  // namespace

TEST_CASE("root finder on analytic functions") {
    SolverConfig cfg{1e-30, 1e-14, 200, 10};
    auto r = find_decreasing_root([](double x) { return 0.3 - x; }, 0.0, 1.0, 0.5, cfg);
    CHECK(r.converged);
    CHECK_THAT(r.x, WithinAbs(0.3, 1e-13));
    auto e = find_decreasing_root([](double x) { return 1e-9 * (std::exp(-20 * x) - std::exp(-4.0)); }, -0.05, 0.95, 0.9, cfg);
    CHECK(e.converged);
    CHECK_THAT(e.x, WithinAbs(0.2, 1e-10));
    CHECK_THROWS_AS(find_decreasing_root([](double) { return 1.0; }, 0.0, 1.0, 0.5, cfg), SolverError);
}

TEST_CASE("inverter output with injection matches a grid scan") {
    const auto& t = template_for(GateType::INV);
    auto tech = preset("D25-S");
    auto params = bind_devices(t, tech);
    Environment env;
    for (double inj : {0.0, 2e-8, -2e-8, 1e-7}) {
        for (double vin : {0.0, 0.9}) {
            std::vector<double> in{vin};
            auto pt = solve_gate(t, params, in, inj, env, kTight);
            REQUIRE(pt.converged);
            const int steps = 20000;
            double grid = scan_root(t, params, pt.voltages, t.output_node(), inj, -kClampMargin, 0.9 + kClampMargin, steps);
            INFO("vin " << vin << " injected " << inj);
            CHECK_THAT(pt.output_voltage(), WithinAbs(grid, 1.0 / steps));
        }
    }
}

TEST_CASE("NAND2 stack node matches a grid scan and sits above ground at input 00") {
    const auto& t = template_for(GateType::NAND2);
    auto params = bind_devices(t, preset("D25-S"));
    Environment env;
    std::vector<double> in{0.0, 0.0};
    auto pt = solve_gate(t, params, in, 0.0, env, kTight);
    REQUIRE(pt.converged);
    int s = t.internal_node(0);
    double vs = pt.voltages[static_cast<std::size_t>(s)];
    CHECK(vs > 0.0);
    CHECK(vs < 0.45);
    double grid = scan_root(t, params, pt.voltages, s, 0.0, -kClampMargin, 0.9 + kClampMargin, 40000);
    CHECK_THAT(vs, WithinAbs(grid, 1e-4));
}

TEST_CASE("solved gates satisfy KCL at every node and overall") {
    auto tech = preset("D25-G");
    Environment env{350.0, 0.9};
    for (auto type : kAllGateTypes) {
        const auto& t = template_for(type);
        auto params = bind_devices(t, tech);
        for (int m = 0; m < (1 << t.inputs); ++m) {
            std::vector<double> in;
            for (int i = 0; i < t.inputs; ++i) in.push_back((m >> i) & 1 ? 0.9 : 0.0);
            auto pt = solve_gate(t, params, in, 5e-9, env, kTight);
            INFO(to_string(type) << " input " << m);
            REQUIRE(pt.converged);
            CHECK(pt.max_residual() <= 1e-16);
            double total = 0.0;
            for (int node = 0; node < t.node_count(); ++node) total += node_current(t, params, pt.voltages, node, env.temperature);
            CHECK(std::fabs(total) <= 1e-18);
            auto lk = gate_leakage(pt, t, params, env);
            CHECK(lk.components.isub > 0);
            CHECK(lk.components.igate() > 0);
            CHECK(lk.input_draw.size() == static_cast<std::size_t>(t.inputs));
        }
    }
}

TEST_CASE("warm start reproduces the cold solution") {
    const auto& t = template_for(GateType::NOR3);
    auto params = bind_devices(t, preset("D25-S"));
    std::vector<double> in{0.0, 0.0, 0.02};
    auto cold = solve_gate(t, params, in, 0.0, Environment{}, kTight);
    auto warm = solve_gate(t, params, in, 0.0, Environment{}, kTight, &cold);
    for (std::size_t i = 0; i < cold.voltages.size(); ++i) CHECK_THAT(warm.voltages[i], WithinAbs(cold.voltages[i], 1e-11));
}

TEST_CASE("invalid solver inputs") {
    const auto& t = template_for(GateType::NAND2);
    auto params = bind_devices(t, preset("D25-S"));
    Environment env;
    std::vector<double> one{0.0};
    std::vector<double> bad{0.0, 2.0};
    std::vector<double> ok{0.0, 0.9};
    CHECK_THROWS_AS(solve_gate(t, params, one, 0.0, env, kTight), InvalidInput);
    CHECK_THROWS_AS(solve_gate(t, params, bad, 0.0, env, kTight), InvalidInput);
    CHECK_THROWS_AS(solve_gate(t, params, ok, NAN, env, kTight), InvalidInput);
    CHECK_THROWS_AS((SolverConfig{0.0, 1e-7, 10, 10}.validate()), InvalidInput);
}
