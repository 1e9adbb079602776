#pragma once

// Seeded random combinational DAGs in `.bench` form.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "leakload/error.hpp"
#include "leakload/gate_library.hpp"
#include "leakload/netlist.hpp"

namespace leakload {

struct RandomCircuitSpec {
    int inputs = 8;
    int gates = 50;
    int max_fanout = 8;
    int window = 16;           // recent nets preferred as gate inputs
    double recent_bias = 0.7;  // probability of picking from the window
    std::uint64_t seed = 1;

    void validate() const {
        if (inputs < 4) throw InvalidInput("random circuit needs at least 4 inputs");
        if (gates < 1) throw InvalidInput("random circuit needs at least one gate");
        if (max_fanout < 1) throw InvalidInput("fanout cap must be at least 1");
        if (window < 1) throw InvalidInput("window must be at least 1");
        if (!(recent_bias >= 0.0 && recent_bias <= 1.0)) throw InvalidInput("recent_bias must lie in [0, 1]");
    }
};

// Gate mix: weights over the template set.
inline constexpr std::array<std::pair<GateType, int>, 12> kRandomGateMix = {{
    {GateType::INV, 4},
    {GateType::BUF, 1},
    {GateType::NAND2, 6},
    {GateType::NAND3, 3},
    {GateType::NAND4, 1},
    {GateType::NOR2, 4},
    {GateType::NOR3, 2},
    {GateType::NOR4, 1},
    {GateType::AND2, 2},
    {GateType::AND3, 1},
    {GateType::OR2, 2},
    {GateType::OR3, 1},
}};

inline std::string random_bench(const RandomCircuitSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    auto below = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    int total_weight = 0;
    for (const auto& [t, w] : kRandomGateMix) total_weight += w;

    std::vector<std::string> names;
    std::vector<int> fanout;
    std::string body;
    std::string header;
    for (int i = 0; i < spec.inputs; ++i) {
        names.push_back("i" + std::to_string(i));
        fanout.push_back(0);
        header += "INPUT(" + names.back() + ")\n";
    }
    std::vector<char> is_gate(names.size(), 0);
    for (int g = 0; g < spec.gates; ++g) {
        auto pick = static_cast<int>(below(static_cast<std::size_t>(total_weight)));
        GateType type = GateType::INV;
        for (const auto& [t, w] : kRandomGateMix) {
            if (pick < w) {
                type = t;
                break;
            }
            pick -= w;
        }
        const auto k = static_cast<std::size_t>(input_count(type));
        std::vector<std::size_t> chosen;
        for (int attempt = 0; attempt < 64 && chosen.size() < k; ++attempt) {
            std::size_t n = names.size();
            std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(spec.window));
            bool recent = static_cast<double>(rng() >> 11) * 0x1.0p-53 < spec.recent_bias;
            std::size_t cand = recent ? n - 1 - below(w) : below(n);
            if (fanout[cand] >= spec.max_fanout) continue;
            if (std::find(chosen.begin(), chosen.end(), cand) != chosen.end()) continue;
            chosen.push_back(cand);
        }
        if (chosen.size() < k) {
            // Fall back to the lowest-fanout nets.
            for (std::size_t cand = 0; cand < names.size() && chosen.size() < k; ++cand)
                if (fanout[cand] < spec.max_fanout && std::find(chosen.begin(), chosen.end(), cand) == chosen.end())
                    chosen.push_back(cand);
        }
        if (chosen.size() < k) throw InvalidInput("fanout cap leaves no free nets; raise max_fanout or inputs");
        std::string out = "n" + std::to_string(g);
        body += out + " = " + bench_keyword(type) + "(";
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            ++fanout[chosen[i]];
            body += (i ? ", " : "") + names[chosen[i]];
        }
        body += ")\n";
        names.push_back(out);
        fanout.push_back(0);
        is_gate.push_back(1);
    }
    for (std::size_t i = 0; i < names.size(); ++i)
        if (is_gate[i] && fanout[i] == 0) header += "OUTPUT(" + names[i] + ")\n";
    return "# random DAG seed=" + std::to_string(spec.seed) + " inputs=" + std::to_string(spec.inputs) +
           " gates=" + std::to_string(spec.gates) + " max_fanout=" + std::to_string(spec.max_fanout) + "\n" + header +
           body;
}

inline Circuit random_circuit(const RandomCircuitSpec& spec) { return parse_bench(random_bench(spec)); }

}  // namespace leakload
