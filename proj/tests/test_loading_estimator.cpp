#include <cmath>
#include <filesystem>

#include "catch_amalgamated.hpp"
#include "leakload/fixtures.hpp"
#include "leakload/generator.hpp"
#include "leakload/loading_estimator.hpp"

using namespace leakload;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Circuit corpus(const char* name) {
    return parse_bench(text::read_file(std::filesystem::path(LEAKLOAD_SOURCE_DIR) / "corpus" / name));
}

Technology no_tunneling(Technology t) {
    for (auto* p : {&t.nmos, &t.pmos}) {
        p->a_ov = 0.0;
        p->a_ch = 0.0;
        p->a_gb = 0.0;
    }
    return t;
}

}  // namespace

TEST_CASE("circuit totals are the sums of gate values and LD follows from them") {
    auto c = corpus("c17.bench");
    auto rep = estimate(c, parse_vector("10101"), preset("D25-S"), Environment{});
    REQUIRE(rep.warnings == 0);
    LeakageComponents nom, load;
    for (const auto& g : rep.gates) {
        nom += g.nominal;
        load += g.loaded;
        REQUIRE(g.ld_all.itotal);
        CHECK(*g.ld_all.itotal == (g.loaded.itotal() - g.nominal.itotal()) / g.nominal.itotal());
        REQUIRE(g.loaded_input_only);
        REQUIRE(g.loaded_output_only);
        CHECK(g.ld_in_per_input.size() == g.input_bits.size());
    }
    CHECK_THAT(rep.total_nominal.itotal(), WithinRel(nom.itotal(), 1e-14));
    CHECK_THAT(rep.total_loaded.itotal(), WithinRel(load.itotal(), 1e-14));
    CHECK(*rep.ld_total.isub == (rep.total_loaded.isub - rep.total_nominal.isub) / rep.total_nominal.isub);
    CHECK(*rep.ld_total.isub > 0);
}

TEST_CASE("loading currents equal the gate current of each reader") {
    auto c = fixtures::inverter(6, 6);
    auto tech = preset("D25-S");
    Environment env;
    auto rep = estimate(c, fixtures::inverter_vector(false), tech, env);
    int g = c.net_index("g");
    // g is high, so each reader inverter has its input at Vdd.
    const auto& t = template_for(GateType::INV);
    auto params = bind_devices(t, tech);
    std::vector<double> in{env.vdd};
    auto pt = solve_gate(t, params, in, 0.0, env, SolverConfig{1e-17, 1e-12, 200, 100});
    double draw = 0.0;
    for (std::size_t i = 0; i < t.transistors.size(); ++i) {
        const auto& tr = t.transistors[i];
        draw += evaluate_device(params[i], tr.polarity, terminal_voltages(tr, pt.voltages), env.temperature).terminals.gate;
    }
    CHECK_THAT(rep.loading.total[static_cast<std::size_t>(g)], WithinRel(-6.0 * draw, 1e-9));
    CHECK(rep.loading.total[static_cast<std::size_t>(g)] < 0);
    for (std::size_t n = 0; n < c.net_count(); ++n) {
        double sum = 0.0;
        for (const auto& r : rep.loading.per_reader[n]) sum += r.current;
        CHECK(sum == rep.loading.total[n]);
        CHECK(rep.loading.per_reader[n].size() == c.fanout[n].size());
    }
}

TEST_CASE("loading disabled reproduces the nominal values") {
    auto c = corpus("mixed_logic.bench");
    auto rep = estimate(c, parse_vector("101100"), preset("D25-G"), Environment{}, {}, {false, true});
    CHECK_FALSE(rep.loading_enabled);
    for (const auto& g : rep.gates) {
        CHECK(g.loaded == g.nominal);
        CHECK(*g.ld_all.itotal == 0.0);
    }
    CHECK(rep.total_loaded == rep.total_nominal);
}

TEST_CASE("without tunneling there is no loading current") {
    auto c = corpus("c17.bench");
    auto tech = no_tunneling(preset("D25-S"));
    auto rep = estimate(c, parse_vector("10101"), tech, Environment{});
    REQUIRE(rep.warnings == 0);
    for (double i : rep.loading.total) CHECK(i == 0.0);
    for (const auto& g : rep.gates) {
        CHECK(*g.ld_out.itotal == 0.0);
        CHECK(g.nominal.igate() == 0.0);
        bool primary_only = true;
        for (int n : c.gates[static_cast<std::size_t>(g.gate)].inputs)
            primary_only = primary_only && c.driver[static_cast<std::size_t>(n)] < 0;
        // Gates reading driven nets still see their driver's own offset from the rail.
        if (primary_only) CHECK(g.loaded == g.nominal);
    }
}

TEST_CASE("estimates are deterministic and agree with single-vector sweeps") {
    auto c = random_circuit(RandomCircuitSpec{.seed = 9});
    auto tech = preset("D25-S");
    Environment env;
    auto vectors = random_vectors(c, 3, 4);
    auto a = estimate(c, vectors[0], tech, env);
    auto b = estimate(c, vectors[0], tech, env);
    CHECK(a.total_loaded == b.total_loaded);
    for (std::size_t i = 0; i < a.gates.size(); ++i) CHECK(a.gates[i].loaded == b.gates[i].loaded);
    auto sweep = vector_sweep(c, {vectors[0]}, tech, env);
    CHECK_THAT(sweep.loaded[0].itotal(), WithinRel(a.total_loaded.itotal(), 1e-9));
    CHECK(sweep.nominal[0] == a.total_nominal);
    auto flat = vector_sweep(c, vectors, tech, env, {}, false);
    for (std::size_t i = 0; i < vectors.size(); ++i) CHECK(flat.loaded[i] == flat.nominal[i]);
}

TEST_CASE("sweep reductions") {
    auto c = corpus("c17.bench");
    auto sweep = vector_sweep(c, exhaustive_vectors(c), preset("D25-S"), Environment{});
    REQUIRE(sweep.vectors.size() == 32);
    CHECK(format_vector(sweep.vectors[1]) == "00001");
    double sum = 0.0, extreme = 0.0;
    for (const auto& d : sweep.delta) {
        sum += *d.itotal;
        if (std::fabs(*d.itotal) > std::fabs(extreme)) extreme = *d.itotal;
    }
    CHECK_THAT(*sweep.average.itotal, WithinAbs(sum / 32.0, 1e-15));
    CHECK(*sweep.maximum.itotal == extreme);
    for (const auto& n : sweep.nominal) CHECK(n.itotal() >= sweep.nominal[sweep.min_nominal].itotal());
    for (const auto& l : sweep.loaded) CHECK(l.itotal() >= sweep.loaded[sweep.min_loaded].itotal());
}

TEST_CASE("vector generation limits") {
    auto wide = random_circuit(RandomCircuitSpec{.inputs = 21, .gates = 30, .seed = 2});
    CHECK_THROWS_AS(exhaustive_vectors(wide), InvalidInput);
    CHECK_THROWS_AS(random_vectors(wide, 0, 1), InvalidInput);
    CHECK(random_vectors(wide, 5, 3) == random_vectors(wide, 5, 3));
    CHECK(random_vectors(wide, 5, 3) != random_vectors(wide, 5, 4));
    auto c = corpus("c17.bench");
    CHECK_THROWS_AS(estimate(c, parse_vector("101"), preset("D25-S"), Environment{}), InvalidInput);
    CHECK_THROWS_AS(vector_sweep(c, {}, preset("D25-S"), Environment{}), InvalidInput);
}
