#pragma once

// Small generated circuits used by the characterization commands and tests.

#include <string>

#include "leakload/netlist.hpp"

namespace leakload::fixtures {

/// Inverter `g` driven by inverter `drv` (itself driven by primary input
/// `a`). `drv` also feeds `input_loads` extra inverters, `g` feeds
/// `output_loads` inverters. Input '0' on `g` means a = 1.
inline std::string inverter_bench(int input_loads, int output_loads) {
    std::string s = "INPUT(a)\nOUTPUT(g)\ndrv = NOT(a)\ng = NOT(drv)\n";
    for (int i = 0; i < input_loads; ++i) s += "li" + std::to_string(i) + " = NOT(drv)\n";
    for (int i = 0; i < output_loads; ++i) s += "lo" + std::to_string(i) + " = NOT(g)\n";
    return s;
}

inline Circuit inverter(int input_loads, int output_loads) {
    return parse_bench(inverter_bench(input_loads, output_loads));
}

/// Vector that puts logic value `in` on the input of `g` in `inverter()`.
inline InputVector inverter_vector(bool in) { return {static_cast<std::uint8_t>(in ? 0 : 1)}; }

/// NAND2 `g` with inputs `da`, `db` driven by inverters from primary inputs
/// `a`, `b`. Each input net and the output carry `loads` extra inverters.
inline std::string nand2_bench(int loads) {
    std::string s = "INPUT(a)\nINPUT(b)\nOUTPUT(g)\nda = NOT(a)\ndb = NOT(b)\ng = NAND(da, db)\n";
    for (int i = 0; i < loads; ++i) {
        auto k = std::to_string(i);
        s += "la" + k + " = NOT(da)\nlb" + k + " = NOT(db)\nlo" + k + " = NOT(g)\n";
    }
    return s;
}

inline Circuit nand2(int loads) { return parse_bench(nand2_bench(loads)); }

/// Vector that puts (x, y) on the inputs of `g` in `nand2()`.
inline InputVector nand2_vector(bool x, bool y) {
    return {static_cast<std::uint8_t>(x ? 0 : 1), static_cast<std::uint8_t>(y ? 0 : 1)};
}

}  // namespace leakload::fixtures
