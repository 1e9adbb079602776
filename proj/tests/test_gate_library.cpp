#include <set>

#include "catch_amalgamated.hpp"
#include "leakload/gate_library.hpp"

using namespace leakload;

namespace {

constexpr int kFloating = -1;
constexpr int kShort = 2;

std::set<int> reached_from(const GateTemplate& t, const std::vector<int>& level, int rail) {
    std::set<int> seen{rail};
    std::vector<int> stack{rail};
    while (!stack.empty()) {
        int node = stack.back();
        stack.pop_back();
        if (node != rail && (node == t.vdd_node() || node == t.gnd_node())) continue;
        for (const auto& tr : t.transistors) {
            int g = level[static_cast<std::size_t>(tr.gate)];
            bool on = (tr.polarity == Polarity::NMOS && g == 1) || (tr.polarity == Polarity::PMOS && g == 0);
            if (!on) continue;
            for (auto [a, b] : {std::pair{tr.drain, tr.source}, std::pair{tr.source, tr.drain}})
                if (a == node && seen.insert(b).second) stack.push_back(b);
        }
    }
    return seen;
}

// Node levels from conduction paths to the rails, iterated so that stage
// outputs can drive later stages.
std::vector<int> conducting_levels(const GateTemplate& t, const std::vector<std::uint8_t>& in) {
    std::vector<int> level(static_cast<std::size_t>(t.node_count()), kFloating);
    for (int i = 0; i < t.inputs; ++i) level[static_cast<std::size_t>(i)] = in[static_cast<std::size_t>(i)];
    level[static_cast<std::size_t>(t.vdd_node())] = 1;
    level[static_cast<std::size_t>(t.gnd_node())] = 0;
    for (int pass = 0; pass < 8; ++pass) {
        auto up = reached_from(t, level, t.vdd_node());
        auto down = reached_from(t, level, t.gnd_node());
        auto next = level;
        for (int node = t.inputs; node < t.vdd_node(); ++node) {
            bool u = up.contains(node), d = down.contains(node);
            next[static_cast<std::size_t>(node)] = u && d ? kShort : u ? 1 : d ? 0 : kFloating;
        }
        if (next == level) break;
        level = next;
    }
    return level;
}

std::vector<std::vector<std::uint8_t>> all_vectors(int k) {
    std::vector<std::vector<std::uint8_t>> out;
    for (int m = 0; m < (1 << k); ++m) {
        std::vector<std::uint8_t> v(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] = (m >> i) & 1;
        out.push_back(v);
    }
    return out;
}

}  // namespace

TEST_CASE("template logic agrees with conduction-path analysis") {
    for (auto type : kAllGateTypes) {
        const auto& t = template_for(type);
        for (const auto& v : all_vectors(t.inputs)) {
            auto level = conducting_levels(t, v);
            INFO(to_string(type) << " inputs " << int(v[0]));
            int out = level[static_cast<std::size_t>(t.output_node())];
            REQUIRE(out != kFloating);
            REQUIRE(out != kShort);
            CHECK(out == (t.logic(v) ? 1 : 0));
            for (const auto& st : t.stages) {
                int s = level[static_cast<std::size_t>(st.output)];
                CHECK((s == 0 || s == 1));
                CHECK(s == t.node_logic(v)[static_cast<std::size_t>(st.output)]);
            }
        }
    }
}

TEST_CASE("templates have the expected transistor structure") {
    CHECK(template_for(GateType::INV).transistors.size() == 2);
    CHECK(template_for(GateType::BUF).transistors.size() == 4);
    CHECK(template_for(GateType::NAND2).transistors.size() == 4);
    CHECK(template_for(GateType::NAND4).transistors.size() == 8);
    CHECK(template_for(GateType::NOR3).transistors.size() == 6);
    CHECK(template_for(GateType::AND2).transistors.size() == 6);
    CHECK(template_for(GateType::OR4).transistors.size() == 10);
    CHECK(template_for(GateType::NAND3).internal_count() == 2);
    CHECK(template_for(GateType::AND3).internal_count() == 3);

    for (auto type : kAllGateTypes) {
        const auto& t = template_for(type);
        for (const auto& tr : t.transistors) {
            if (tr.polarity == Polarity::PMOS) CHECK(tr.body == t.vdd_node());
            else CHECK(tr.body == t.gnd_node());
        }
        for (int i = 0; i < t.internal_count(); ++i) {
            int terminals = 0;
            for (const auto& a : t.attachments[static_cast<std::size_t>(t.internal_node(i))])
                terminals += a.terminal != Terminal::Body ? 1 : 0;
            CHECK(terminals >= 2);
        }
        std::size_t attached = 0;
        for (const auto& list : t.attachments) attached += list.size();
        CHECK(attached == 4 * t.transistors.size());
    }
}

TEST_CASE("series stacks put input 0 nearest the stage output") {
    const auto& nand = template_for(GateType::NAND3);
    const auto& st = nand.stages.front();
    const auto& top = nand.transistors[static_cast<std::size_t>(st.pull_down.front())];
    CHECK(top.gate == 0);
    CHECK(top.drain == nand.output_node());
    const auto& bottom = nand.transistors[static_cast<std::size_t>(st.pull_down.back())];
    CHECK(bottom.gate == 2);
    CHECK(bottom.source == nand.gnd_node());

    const auto& nor = template_for(GateType::NOR2);
    const auto& pst = nor.stages.front();
    const auto& near = nor.transistors[static_cast<std::size_t>(pst.pull_up.front())];
    CHECK(near.gate == 0);
    CHECK(near.drain == nor.output_node());
}

TEST_CASE("width overrides") {
    auto lib = GateLibrary::from_override_text("pmos_w_ratio = 3\nNAND2.nmos_w_ratio = 1.5\n");
    const auto& nand = lib.template_for(GateType::NAND2);
    for (const auto& tr : nand.transistors) CHECK(tr.w_ratio == (tr.polarity == Polarity::PMOS ? 3.0 : 1.5));
    for (const auto& tr : lib.template_for(GateType::INV).transistors)
        CHECK(tr.w_ratio == (tr.polarity == Polarity::PMOS ? 3.0 : 1.0));
    CHECK_THROWS_AS(GateLibrary::from_override_text("NAND9.pmos_w_ratio = 2\n"), ParseError);
    CHECK_THROWS_AS(GateLibrary::from_override_text("pmos_w_ratio = -1\n"), ParseError);
    CHECK_THROWS_AS(GateLibrary::from_override_text("pmos_width = 2\n"), ParseError);
}

TEST_CASE("lookup by name") {
    CHECK(standard_library().template_for("nand2").type == GateType::NAND2);
    CHECK(standard_library().template_for("NOT").type == GateType::INV);
    CHECK_THROWS_AS(standard_library().template_for("XOR"), InvalidInput);
    CHECK_THROWS_AS(standard_library().template_for("MUX2"), InvalidInput);
}
