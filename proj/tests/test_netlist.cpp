#include <filesystem>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "leakload/netlist.hpp"

using namespace leakload;

namespace {

const std::filesystem::path kCorpus = std::filesystem::path(LEAKLOAD_SOURCE_DIR) / "corpus";

// Straightforward evaluator over the undecomposed statements.
class ReferenceEval {
public:
    explicit ReferenceEval(const std::string& text) {
        static const std::regex gate(R"(^\s*(\S+)\s*=\s*(\w+)\s*\((.*)\)\s*$)");
        std::istringstream ss(text);
        for (std::string line; std::getline(ss, line);) {
            line = line.substr(0, line.find('#'));
            std::smatch m;
            if (!std::regex_match(line, m, gate)) continue;
            std::vector<std::string> args;
            std::istringstream as(m[3].str());
            for (std::string a; std::getline(as, a, ',');) {
                a.erase(0, a.find_first_not_of(' '));
                a.erase(a.find_last_not_of(' ') + 1);
                args.push_back(a);
            }
            defs_[m[1].str()] = {text::upper(m[2].str()), args};
        }
    }

    void set(const std::string& net, bool v) { values_[net] = v; }
    void reset() {
        for (auto it = values_.begin(); it != values_.end();)
            it = defs_.contains(it->first) && defs_.at(it->first).first != "DFF" ? values_.erase(it) : std::next(it);
    }

    bool value(const std::string& net) {
        if (auto it = values_.find(net); it != values_.end()) return it->second;
        const auto& [op, args] = defs_.at(net);
        bool all = true, any = false, parity = false;
        for (const auto& a : args) {
            bool x = value(a);
            all = all && x;
            any = any || x;
            parity = parity != x;
        }
        bool r = op == "AND" ? all : op == "NAND" ? !all : op == "OR" ? any : op == "NOR" ? !any
               : op == "NOT" ? !all : op == "BUFF" ? all : op == "XOR" ? parity : !parity;
        values_[net] = r;
        return r;
    }

private:
    std::map<std::string, std::pair<std::string, std::vector<std::string>>> defs_;
    std::map<std::string, bool> values_;
};

void check_against_reference(const std::string& text, int vectors, std::uint64_t seed) {
    auto c = parse_bench(text);
    ReferenceEval ref(text);
    std::mt19937_64 rng(seed);
    const int k = static_cast<int>(c.input_count());
    bool exhaustive = k <= 10;
    int count = exhaustive ? (1 << k) : vectors;
    for (int m = 0; m < count; ++m) {
        InputVector v(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] = exhaustive ? (m >> i) & 1 : rng() & 1;
        ref.reset();
        for (int i = 0; i < k; ++i)
            ref.set(c.net_names[static_cast<std::size_t>(c.primary_inputs[static_cast<std::size_t>(i)])], v[static_cast<std::size_t>(i)]);
        auto state = simulate_logic(c, v);
        for (int out : c.primary_outputs) {
            const auto& name = c.net_names[static_cast<std::size_t>(out)];
            INFO(name << " vector " << format_vector(v));
            REQUIRE(state[static_cast<std::size_t>(out)] == (ref.value(name) ? 1 : 0));
        }
    }
}

int parse_error_line(const std::string& text) {
    try {
        parse_bench(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("c17 parses into six NAND2 gates in topological order") {
    auto c = parse_bench(text::read_file(kCorpus / "c17.bench"));
    CHECK(c.gates.size() == 6);
    CHECK(c.input_count() == 5);
    CHECK(c.primary_outputs.size() == 2);
    for (const auto& g : c.gates) CHECK(g.type == GateType::NAND2);
    std::vector<int> position(c.gates.size());
    for (std::size_t i = 0; i < c.topo_order.size(); ++i) position[static_cast<std::size_t>(c.topo_order[i])] = static_cast<int>(i);
    for (std::size_t gi = 0; gi < c.gates.size(); ++gi)
        for (int in : c.gates[gi].inputs) {
            int d = c.driver[static_cast<std::size_t>(in)];
            if (d >= 0) CHECK(position[static_cast<std::size_t>(d)] < position[gi]);
        }
}

TEST_CASE("malformed netlists report the offending line") {
    CHECK(parse_error_line("INPUT(a)\nOUTPUT(y)\ny = NAND(a, b)\n") == 3);
    CHECK(parse_error_line("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\ny = BUFF(a)\n") == 4);
    CHECK(parse_error_line("INPUT(a)\nOUTPUT(y)\ny = MUX(a, a)\n") == 3);
    CHECK(parse_error_line("INPUT(a)\nOUTPUT(y)\nx = NAND(a, y)\ny = NOT(x)\n") > 0);
    CHECK(parse_error_line("INPUT(a)\nOUTPUT(y)\ny = NOT(a, a)\n") == 3);
    CHECK(parse_error_line("INPUT(a)\nWIRE(y)\n") == 2);
    CHECK(parse_error_line("INPUT(a)\nOUTPUT(y)\ny = NAND(a,)\n") == 3);
    CHECK(parse_error_line("INPUT(a)\nINPUT(a)\n") == 2);
}

TEST_CASE("emitted netlists parse back to the same circuit") {
    for (const auto& entry : std::filesystem::directory_iterator(kCorpus)) {
        if (entry.path().extension() != ".bench") continue;
        INFO(entry.path().filename().string());
        auto c = parse_bench(text::read_file(entry.path()));
        auto text1 = emit_bench(c);
        auto d = parse_bench(text1);
        CHECK(emit_bench(d) == text1);
        CHECK(d.gates.size() == c.gates.size());
        CHECK(d.input_count() == c.input_count());
        for (std::size_t i = 0; i < c.gates.size(); ++i) CHECK(d.gates[i].type == c.gates[i].type);
    }
}

TEST_CASE("decomposition preserves logic on every corpus netlist") {
    std::uint64_t seed = 1;
    for (const auto& entry : std::filesystem::directory_iterator(kCorpus)) {
        if (entry.path().extension() != ".bench") continue;
        INFO(entry.path().filename().string());
        check_against_reference(text::read_file(entry.path()), 300, seed++);
    }
}

TEST_CASE("XOR, XNOR and wide gates decompose correctly") {
    for (int k = 1; k <= 4; ++k) {
        std::string in, args;
        for (int i = 0; i < k; ++i) {
            in += "INPUT(i" + std::to_string(i) + ")\n";
            args += (i ? ", i" : "i") + std::to_string(i);
        }
        check_against_reference(in + "OUTPUT(y)\nOUTPUT(z)\ny = XOR(" + args + ")\nz = XNOR(" + args + ")\n", 0, 1);
    }
    std::string in, args;
    for (int i = 0; i < 23; ++i) {
        in += "INPUT(i" + std::to_string(i) + ")\n";
        args += (i ? ", i" : "i") + std::to_string(i);
    }
    auto wide = in + "OUTPUT(a)\nOUTPUT(b)\nOUTPUT(c)\nOUTPUT(d)\nOUTPUT(x)\n" + "a = AND(" + args + ")\nb = NAND(" + args +
                ")\nc = OR(" + args + ")\nd = NOR(" + args + ")\nx = XOR(" + args + ")\n";
    check_against_reference(wide, 1000, 7);
    auto c = parse_bench(wide);
    for (const auto& g : c.gates) CHECK(g.inputs.size() <= 4);
}

TEST_CASE("synthetic nets avoid user names") {
    auto c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny__x0 = NOT(a)\ny = XOR(y__x0, b)\n");
    std::set<std::string> seen(c.net_names.begin(), c.net_names.end());
    CHECK(seen.size() == c.net_names.size());
    CHECK(c.gates.size() == 5);
}

TEST_CASE("flip-flops are cut into pseudo inputs and outputs") {
    auto c = parse_bench(text::read_file(kCorpus / "seq_sample.bench"));
    CHECK(c.flip_flops.size() == 3);
    CHECK(c.real_input_count == 3);
    CHECK(c.input_count() == 6);
    CHECK(c.real_output_count == 1);
    CHECK(c.primary_outputs.size() == 4);
    for (std::size_t i = 0; i < c.flip_flops.size(); ++i) {
        CHECK(c.primary_inputs[static_cast<std::size_t>(c.real_input_count) + i] == c.flip_flops[i].q);
        CHECK(c.driver[static_cast<std::size_t>(c.flip_flops[i].q)] == -1);
        CHECK(c.driver[static_cast<std::size_t>(c.flip_flops[i].d)] >= 0);
    }
}

TEST_CASE("input vectors") {
    CHECK(parse_vector("01_1 0") == InputVector{0, 1, 1, 0});
    CHECK(format_vector({1, 0, 1}) == "101");
    CHECK_THROWS_AS(parse_vector("012"), InvalidInput);
    auto c = parse_bench(text::read_file(kCorpus / "c17.bench"));
    CHECK_THROWS_AS(simulate_logic(c, {1, 0}), InvalidInput);
}
