#pragma once

// Transistor-level templates for the supported static CMOS primitives.
//
// Local node numbering inside a template:
//   [0, k)            gate inputs
//   k                 gate output
//   [k+1, k+1+m)      internal nodes (stack nodes, inter-stage nets)
//   k+1+m             VDD rail
//   k+2+m             GND rail
//
// Series stacks are ordered so that input 0 drives the transistor nearest
// the stage output.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "leakload/device_model.hpp"
#include "leakload/error.hpp"
#include "leakload/text_util.hpp"

namespace leakload {

enum class GateType : std::uint8_t {
    INV, BUF,
    NAND2, NAND3, NAND4,
    NOR2, NOR3, NOR4,
    AND2, AND3, AND4,
    OR2, OR3, OR4,
};

inline constexpr std::array kAllGateTypes = {
    GateType::INV,  GateType::BUF,  GateType::NAND2, GateType::NAND3, GateType::NAND4,
    GateType::NOR2, GateType::NOR3, GateType::NOR4,  GateType::AND2,  GateType::AND3,
    GateType::AND4, GateType::OR2,  GateType::OR3,   GateType::OR4,
};

inline const char* to_string(GateType t) {
    switch (t) {
        case GateType::INV: return "INV";
        case GateType::BUF: return "BUF";
        case GateType::NAND2: return "NAND2";
        case GateType::NAND3: return "NAND3";
        case GateType::NAND4: return "NAND4";
        case GateType::NOR2: return "NOR2";
        case GateType::NOR3: return "NOR3";
        case GateType::NOR4: return "NOR4";
        case GateType::AND2: return "AND2";
        case GateType::AND3: return "AND3";
        case GateType::AND4: return "AND4";
        case GateType::OR2: return "OR2";
        case GateType::OR3: return "OR3";
        case GateType::OR4: return "OR4";
    }
    return "?";
}

inline int input_count(GateType t) {
    switch (t) {
        case GateType::INV:
        case GateType::BUF: return 1;
        case GateType::NAND2:
        case GateType::NOR2:
        case GateType::AND2:
        case GateType::OR2: return 2;
        case GateType::NAND3:
        case GateType::NOR3:
        case GateType::AND3:
        case GateType::OR3: return 3;
        default: return 4;
    }
}

inline std::optional<GateType> parse_gate_type(std::string_view name) {
    auto up = text::upper(name);
    for (auto t : kAllGateTypes)
        if (up == to_string(t)) return t;
    if (up == "NOT") return GateType::INV;
    if (up == "BUFF") return GateType::BUF;
    return std::nullopt;
}

inline bool evaluate_logic(GateType t, std::span<const std::uint8_t> in) {
    bool all = true;
    bool any = false;
    for (auto b : in) {
        all = all && b;
        any = any || b;
    }
    switch (t) {
        case GateType::INV: return !in[0];
        case GateType::BUF: return in[0];
        case GateType::NAND2:
        case GateType::NAND3:
        case GateType::NAND4: return !all;
        case GateType::NOR2:
        case GateType::NOR3:
        case GateType::NOR4: return !any;
        case GateType::AND2:
        case GateType::AND3:
        case GateType::AND4: return all;
        default: return any;
    }
}

struct TemplateTransistor {
    Polarity polarity = Polarity::NMOS;
    double w_ratio = 1.0;
    int gate = 0;
    int drain = 0;
    int source = 0;
    int body = 0;
};

enum class StageKind : std::uint8_t { Inverter, Nand, Nor };

/// One complementary CMOS stage: a pull-up and a pull-down network sharing
/// an output node.
struct Stage {
    StageKind kind = StageKind::Inverter;
    std::vector<int> inputs;
    int output = 0;
    std::vector<int> pull_up;    // transistor indices
    std::vector<int> pull_down;  // transistor indices
};

enum class Terminal : std::uint8_t { Drain, Gate, Source, Body };

struct NodeAttachment {
    int transistor = 0;
    Terminal terminal = Terminal::Drain;
};

struct GateTemplate {
    GateType type = GateType::INV;
    int inputs = 1;
    std::vector<std::string> internal_names;
    std::vector<TemplateTransistor> transistors;
    std::vector<Stage> stages;
    std::vector<std::vector<NodeAttachment>> attachments;  // per local node

    [[nodiscard]] int internal_count() const { return static_cast<int>(internal_names.size()); }
    [[nodiscard]] int output_node() const { return inputs; }
    [[nodiscard]] int internal_node(int i) const { return inputs + 1 + i; }
    [[nodiscard]] int vdd_node() const { return inputs + 1 + internal_count(); }
    [[nodiscard]] int gnd_node() const { return inputs + 2 + internal_count(); }
    [[nodiscard]] int node_count() const { return inputs + 3 + internal_count(); }

    [[nodiscard]] bool logic(std::span<const std::uint8_t> in) const { return evaluate_logic(type, in); }

    /// Logic value of the inputs, rails and stage outputs for an input vector.
    /// Series-stack nodes are left at 0.
    [[nodiscard]] std::vector<std::uint8_t> node_logic(std::span<const std::uint8_t> in) const {
        std::vector<std::uint8_t> v(static_cast<std::size_t>(node_count()), 0);
        for (int i = 0; i < inputs; ++i) v[static_cast<std::size_t>(i)] = in[static_cast<std::size_t>(i)] ? 1 : 0;
        v[static_cast<std::size_t>(vdd_node())] = 1;
        for (const auto& st : stages) {
            bool all = true;
            bool any = false;
            for (int n : st.inputs) {
                all = all && v[static_cast<std::size_t>(n)];
                any = any || v[static_cast<std::size_t>(n)];
            }
            bool out = st.kind == StageKind::Nand ? !all : st.kind == StageKind::Nor ? !any : !all;
            v[static_cast<std::size_t>(st.output)] = out ? 1 : 0;
        }
        return v;
    }
};

namespace detail {

class TemplateBuilder {
public:
    TemplateBuilder(GateType type, int inputs) {
        t_.type = type;
        t_.inputs = inputs;
    }

    int add_internal(std::string name) {
        t_.internal_names.push_back(std::move(name));
        return t_.inputs + static_cast<int>(t_.internal_names.size());
    }

    // Internal node ids shift once rails are placed; rails are resolved in finish().
    static constexpr int kVdd = -1;
    static constexpr int kGnd = -2;

    void add_stage(StageKind kind, std::vector<int> in, int out, double wn, double wp, const std::string& prefix) {
        Stage st;
        st.kind = kind;
        st.inputs = in;
        st.output = out;
        const int k = static_cast<int>(in.size());
        auto add = [&](Polarity pol, double w, int g, int d, int s) {
            t_.transistors.push_back({pol, w, g, d, s, pol == Polarity::PMOS ? kVdd : kGnd});
            return static_cast<int>(t_.transistors.size()) - 1;
        };
        if (kind == StageKind::Inverter || kind == StageKind::Nand) {
            for (int i = 0; i < k; ++i) st.pull_up.push_back(add(Polarity::PMOS, wp, in[static_cast<std::size_t>(i)], out, kVdd));
            int upper = out;
            for (int i = 0; i < k; ++i) {
                int lower = i + 1 < k ? add_internal(prefix + "s" + std::to_string(i + 1)) : kGnd;
                st.pull_down.push_back(add(Polarity::NMOS, wn, in[static_cast<std::size_t>(i)], upper, lower));
                upper = lower;
            }
        } else {
            for (int i = 0; i < k; ++i) st.pull_down.push_back(add(Polarity::NMOS, wn, in[static_cast<std::size_t>(i)], out, kGnd));
            int lower = out;
            for (int i = 0; i < k; ++i) {
                int upper = i + 1 < k ? add_internal(prefix + "s" + std::to_string(i + 1)) : kVdd;
                st.pull_up.push_back(add(Polarity::PMOS, wp, in[static_cast<std::size_t>(i)], lower, upper));
                lower = upper;
            }
        }
        t_.stages.push_back(std::move(st));
    }

    GateTemplate finish() {
        auto fix = [&](int& n) {
            if (n == kVdd) n = t_.vdd_node();
            else if (n == kGnd) n = t_.gnd_node();
        };
        for (auto& tr : t_.transistors) {
            fix(tr.gate);
            fix(tr.drain);
            fix(tr.source);
            fix(tr.body);
        }
        for (auto& st : t_.stages) {
            fix(st.output);
            for (auto& n : st.inputs) fix(n);
        }
        t_.attachments.assign(static_cast<std::size_t>(t_.node_count()), {});
        for (int i = 0; i < static_cast<int>(t_.transistors.size()); ++i) {
            const auto& tr = t_.transistors[static_cast<std::size_t>(i)];
            t_.attachments[static_cast<std::size_t>(tr.drain)].push_back({i, Terminal::Drain});
            t_.attachments[static_cast<std::size_t>(tr.gate)].push_back({i, Terminal::Gate});
            t_.attachments[static_cast<std::size_t>(tr.source)].push_back({i, Terminal::Source});
            t_.attachments[static_cast<std::size_t>(tr.body)].push_back({i, Terminal::Body});
        }
        return std::move(t_);
    }

private:
    GateTemplate t_;
};

inline GateTemplate build_template(GateType type, double wn, double wp) {
    const int k = input_count(type);
    TemplateBuilder b(type, k);
    std::vector<int> in(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) in[static_cast<std::size_t>(i)] = i;
    const int out = k;
    switch (type) {
        case GateType::INV: b.add_stage(StageKind::Inverter, in, out, wn, wp, ""); break;
        case GateType::BUF: {
            int mid = b.add_internal("y");
            b.add_stage(StageKind::Inverter, in, mid, wn, wp, "");
            b.add_stage(StageKind::Inverter, {mid}, out, wn, wp, "");
            break;
        }
        case GateType::NAND2:
        case GateType::NAND3:
        case GateType::NAND4: b.add_stage(StageKind::Nand, in, out, wn, wp, ""); break;
        case GateType::NOR2:
        case GateType::NOR3:
        case GateType::NOR4: b.add_stage(StageKind::Nor, in, out, wn, wp, ""); break;
        case GateType::AND2:
        case GateType::AND3:
        case GateType::AND4:
        case GateType::OR2:
        case GateType::OR3:
        case GateType::OR4: {
            bool is_and = type == GateType::AND2 || type == GateType::AND3 || type == GateType::AND4;
            int mid = b.add_internal("y");
            b.add_stage(is_and ? StageKind::Nand : StageKind::Nor, in, mid, wn, wp, "");
            b.add_stage(StageKind::Inverter, {mid}, out, wn, wp, "");
            break;
        }
    }
    return b.finish();
}

}  // namespace detail

/// Immutable set of templates for every supported primitive.
class GateLibrary {
public:
    static constexpr double kDefaultNmosWidth = 1.0;
    static constexpr double kDefaultPmosWidth = 2.0;

    GateLibrary() : GateLibrary(std::array<double, kAllGateTypes.size()>{}, std::array<double, kAllGateTypes.size()>{}) {}

    /// Library with the given width ratios for every gate type.
    static GateLibrary with_widths(double nmos_w, double pmos_w) {
        std::array<double, kAllGateTypes.size()> wn{};
        std::array<double, kAllGateTypes.size()> wp{};
        wn.fill(nmos_w);
        wp.fill(pmos_w);
        return GateLibrary(wn, wp);
    }

    /// Applies an override file: `nmos_w_ratio`, `pmos_w_ratio`, or per type
    /// `NAND2.pmos_w_ratio` etc.
    static GateLibrary from_override_text(std::string_view text) {
        std::array<double, kAllGateTypes.size()> wn{};
        std::array<double, kAllGateTypes.size()> wp{};
        wn.fill(kDefaultNmosWidth);
        wp.fill(kDefaultPmosWidth);
        std::vector<std::pair<std::size_t, text::KeyValue>> specific;
        for (const auto& kv : text::parse_key_values(text)) {
            double v = text::value_as_double(kv);
            if (!(v > 0)) throw ParseError(kv.line, "width ratio must be positive");
            auto dot = kv.key.find('.');
            std::string field = dot == std::string::npos ? kv.key : kv.key.substr(dot + 1);
            if (field != "nmos_w_ratio" && field != "pmos_w_ratio") throw ParseError(kv.line, "unknown key '" + kv.key + "'");
            bool pmos = field == "pmos_w_ratio";
            if (dot == std::string::npos) {
                (pmos ? wp : wn).fill(v);
                continue;
            }
            auto type = parse_gate_type(kv.key.substr(0, dot));
            if (!type) throw ParseError(kv.line, "unknown gate type in '" + kv.key + "'");
            specific.emplace_back(static_cast<std::size_t>(*type), kv);
        }
        for (const auto& [idx, kv] : specific) {
            bool pmos = kv.key.ends_with("pmos_w_ratio");
            (pmos ? wp : wn)[idx] = text::value_as_double(kv);
        }
        return GateLibrary(wn, wp);
    }

    [[nodiscard]] const GateTemplate& template_for(GateType t) const { return templates_[static_cast<std::size_t>(t)]; }

    /// Lookup by name; XOR/XNOR and other complex cells are not templates.
    [[nodiscard]] const GateTemplate& template_for(std::string_view name) const {
        auto t = parse_gate_type(name);
        if (!t) {
            auto up = text::upper(name);
            if (up == "XOR" || up == "XNOR")
                throw InvalidInput(up + " has no transistor template; the netlist parser decomposes it into NAND2 gates"
                                        " (plus an inverter for XNOR)");
            throw InvalidInput("unsupported gate type '" + std::string(name) + "'");
        }
        return template_for(*t);
    }

private:
    GateLibrary(std::array<double, kAllGateTypes.size()> wn, std::array<double, kAllGateTypes.size()> wp) {
        for (std::size_t i = 0; i < kAllGateTypes.size(); ++i) {
            double n = wn[i] > 0 ? wn[i] : kDefaultNmosWidth;
            double p = wp[i] > 0 ? wp[i] : kDefaultPmosWidth;
            templates_[i] = detail::build_template(kAllGateTypes[i], n, p);
        }
    }

    std::array<GateTemplate, kAllGateTypes.size()> templates_;
};

inline const GateLibrary& standard_library() {
    static const GateLibrary lib;
    return lib;
}

inline const GateTemplate& template_for(GateType t) { return standard_library().template_for(t); }

}  // namespace leakload
