#pragma once

// ISCAS `.bench` netlists: parsing, decomposition onto the template set,
// combinational cutting at flip-flops, topological ordering and static logic
// simulation.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "leakload/error.hpp"
#include "leakload/gate_library.hpp"
#include "leakload/text_util.hpp"

namespace leakload {

struct GateInstance {
    GateType type = GateType::INV;
    std::vector<int> inputs;  // net indices, template input order
    int output = -1;
    int line = 0;  // source line of the statement it came from
};

struct FlipFlop {
    int q = -1;  // pseudo primary input
    int d = -1;  // pseudo primary output
    int line = 0;
};

using InputVector = std::vector<std::uint8_t>;
using LogicState = std::vector<std::uint8_t>;

/// Combinational view of a netlist. Flip-flop outputs are appended to
/// `primary_inputs` after the real inputs, flip-flop data nets to
/// `primary_outputs` after the real outputs.
struct Circuit {
    std::vector<std::string> net_names;
    std::vector<GateInstance> gates;
    std::vector<int> primary_inputs;
    std::vector<int> primary_outputs;
    std::vector<FlipFlop> flip_flops;
    int real_input_count = 0;
    int real_output_count = 0;
    std::vector<int> driver;                // per net: gate index, or -1 for a (pseudo) primary input
    std::vector<std::vector<int>> fanout;   // per net: reader gate indices (a gate appears once per pin)
    std::vector<int> topo_order;

    [[nodiscard]] std::size_t net_count() const { return net_names.size(); }
    [[nodiscard]] std::size_t input_count() const { return primary_inputs.size(); }

    [[nodiscard]] int net_index(std::string_view name) const {
        for (std::size_t i = 0; i < net_names.size(); ++i)
            if (net_names[i] == name) return static_cast<int>(i);
        return -1;
    }
};

/// Deterministic topological order (Kahn's algorithm, lowest gate index
/// first among ready gates).
inline std::vector<int> topo_sort(const Circuit& c) {
    const auto g = c.gates.size();
    std::vector<int> pending(g, 0);
    for (std::size_t i = 0; i < g; ++i)
        for (int in : c.gates[i].inputs)
            if (c.driver[static_cast<std::size_t>(in)] >= 0) ++pending[i];
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (std::size_t i = 0; i < g; ++i)
        if (pending[i] == 0) ready.push(static_cast<int>(i));
    std::vector<int> order;
    order.reserve(g);
    while (!ready.empty()) {
        int gi = ready.top();
        ready.pop();
        order.push_back(gi);
        for (int r : c.fanout[static_cast<std::size_t>(c.gates[static_cast<std::size_t>(gi)].output)])
            if (--pending[static_cast<std::size_t>(r)] == 0) ready.push(r);
    }
    if (order.size() != g) {
        int line = 0;
        std::string name;
        for (std::size_t i = 0; i < g; ++i)
            if (pending[i] > 0) {
                line = c.gates[i].line;
                name = c.net_names[static_cast<std::size_t>(c.gates[i].output)];
                break;
            }
        throw ParseError(line, "combinational cycle through net '" + name + "'");
    }
    return order;
}

namespace detail {

enum class BenchOp { And, Nand, Or, Nor, Not, Buf, Xor, Xnor, Dff };

inline bool parse_bench_op(std::string_view kw, BenchOp& op) {
    auto up = text::upper(kw);
    static const std::pair<const char*, BenchOp> table[] = {
        {"AND", BenchOp::And}, {"NAND", BenchOp::Nand}, {"OR", BenchOp::Or},   {"NOR", BenchOp::Nor},
        {"NOT", BenchOp::Not}, {"BUFF", BenchOp::Buf},  {"XOR", BenchOp::Xor}, {"XNOR", BenchOp::Xnor},
        {"DFF", BenchOp::Dff},
    };
    for (const auto& [name, value] : table)
        if (up == name) {
            op = value;
            return true;
        }
    return false;
}

inline GateType sized(BenchOp op, std::size_t k) {
    auto pick = [&](GateType two, GateType three, GateType four) { return k == 2 ? two : k == 3 ? three : four; };
    switch (op) {
        case BenchOp::And: return pick(GateType::AND2, GateType::AND3, GateType::AND4);
        case BenchOp::Nand: return pick(GateType::NAND2, GateType::NAND3, GateType::NAND4);
        case BenchOp::Or: return pick(GateType::OR2, GateType::OR3, GateType::OR4);
        default: return pick(GateType::NOR2, GateType::NOR3, GateType::NOR4);
    }
}

struct RawStatement {
    BenchOp op;
    std::string output;
    std::vector<std::string> inputs;
    int line;
};

class CircuitBuilder {
public:
    explicit CircuitBuilder(std::unordered_set<std::string> reserved) : reserved_(std::move(reserved)) {}

    int net(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(c_.net_names.size());
        c_.net_names.push_back(name);
        index_.emplace(name, id);
        return id;
    }

    void add_gate(GateType type, std::vector<int> inputs, int output, int line) {
        c_.gates.push_back({type, std::move(inputs), output, line});
    }

    // Synthetic net names: <output>__x0, <output>__x1, ... skipping names in use.
    int synthetic(const std::string& base, int& counter) {
        for (;;) {
            std::string name = base + "__x" + std::to_string(counter++);
            if (!reserved_.contains(name) && !index_.contains(name)) return net(name);
        }
    }

    // Wide AND/NAND/OR/NOR as a balanced tree of gates with at most four inputs.
    void emit_tree(BenchOp op, std::vector<int> in, int out, const std::string& base, int& counter, int line) {
        const std::size_t k = in.size();
        if (k == 1) {
            bool invert = op == BenchOp::Nand || op == BenchOp::Nor;
            add_gate(invert ? GateType::INV : GateType::BUF, in, out, line);
            return;
        }
        if (k <= 4) {
            add_gate(sized(op, k), in, out, line);
            return;
        }
        const std::size_t groups = (k + 3) / 4;
        const BenchOp positive = (op == BenchOp::And || op == BenchOp::Nand) ? BenchOp::And : BenchOp::Or;
        std::vector<int> group_nets;
        std::size_t pos = 0;
        for (std::size_t g = 0; g < groups; ++g) {
            std::size_t size = k / groups + (g < k % groups ? 1 : 0);
            std::vector<int> part(in.begin() + static_cast<std::ptrdiff_t>(pos),
                                  in.begin() + static_cast<std::ptrdiff_t>(pos + size));
            pos += size;
            if (part.size() == 1) {
                group_nets.push_back(part[0]);
                continue;
            }
            int mid = synthetic(base, counter);
            emit_tree(positive, part, mid, base, counter, line);
            group_nets.push_back(mid);
        }
        emit_tree(op, group_nets, out, base, counter, line);
    }

    // XOR2 as four NAND2 gates.
    void emit_xor2(int a, int b, int out, const std::string& base, int& counter, int line) {
        int n1 = synthetic(base, counter);
        int n2 = synthetic(base, counter);
        int n3 = synthetic(base, counter);
        add_gate(GateType::NAND2, {a, b}, n1, line);
        add_gate(GateType::NAND2, {a, n1}, n2, line);
        add_gate(GateType::NAND2, {b, n1}, n3, line);
        add_gate(GateType::NAND2, {n2, n3}, out, line);
    }

    // k-input XOR as a balanced tree of XOR2.
    void emit_xor(std::vector<int> in, int out, const std::string& base, int& counter, int line) {
        if (in.size() == 1) {
            add_gate(GateType::BUF, in, out, line);
            return;
        }
        if (in.size() == 2) {
            emit_xor2(in[0], in[1], out, base, counter, line);
            return;
        }
        auto half = static_cast<std::ptrdiff_t>(in.size() / 2);
        std::vector<int> left(in.begin(), in.begin() + half);
        std::vector<int> right(in.begin() + half, in.end());
        int l = left.size() == 1 ? left[0] : synthetic(base, counter);
        if (left.size() > 1) emit_xor(left, l, base, counter, line);
        int r = right.size() == 1 ? right[0] : synthetic(base, counter);
        if (right.size() > 1) emit_xor(right, r, base, counter, line);
        emit_xor2(l, r, out, base, counter, line);
    }

    Circuit& circuit() { return c_; }

private:
    Circuit c_;
    std::unordered_map<std::string, int> index_;
    std::unordered_set<std::string> reserved_;
};

inline std::string_view parse_call(std::string_view expr, std::string_view& args, int line) {
    auto open = expr.find('(');
    auto close = expr.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw ParseError(line, "expected KEYWORD(args)");
    if (!text::trim(expr.substr(close + 1)).empty()) throw ParseError(line, "trailing characters after ')'");
    args = expr.substr(open + 1, close - open - 1);
    return text::trim(expr.substr(0, open));
}

inline std::vector<std::string> split_args(std::string_view args, int line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto comma = args.find(',', start);
        auto tok = text::trim(args.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (tok.empty()) throw ParseError(line, "empty net name in argument list");
        out.emplace_back(tok);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline void check_name(std::string_view name, int line) {
    if (name.empty()) throw ParseError(line, "empty net name");
    for (char ch : name)
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == '(' || ch == ')' || ch == ',' || ch == '=')
            throw ParseError(line, "invalid net name '" + std::string(name) + "'");
}

}  // namespace detail

/// Parses `.bench` text into a combinational circuit.
inline Circuit parse_bench(std::string_view text) {
    std::vector<std::pair<std::string, int>> inputs;
    std::vector<std::pair<std::string, int>> outputs;
    std::vector<detail::RawStatement> statements;
    std::unordered_set<std::string> names;

    int line_no = 0;
    for (auto raw : text::split_lines(text)) {
        ++line_no;
        auto hash = raw.find('#');
        auto line = text::trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto eq = line.find('=');
        std::string_view args;
        if (eq == std::string_view::npos) {
            auto kw = text::upper(detail::parse_call(line, args, line_no));
            auto name = std::string(text::trim(args));
            detail::check_name(name, line_no);
            if (kw == "INPUT") inputs.emplace_back(name, line_no);
            else if (kw == "OUTPUT") outputs.emplace_back(name, line_no);
            else throw ParseError(line_no, "unknown declaration '" + kw + "'");
            names.insert(name);
            continue;
        }
        auto lhs = std::string(text::trim(line.substr(0, eq)));
        detail::check_name(lhs, line_no);
        auto kw = detail::parse_call(line.substr(eq + 1), args, line_no);
        detail::BenchOp op{};
        if (!detail::parse_bench_op(kw, op)) throw ParseError(line_no, "unknown gate keyword '" + std::string(kw) + "'");
        auto ins = detail::split_args(args, line_no);
        for (const auto& n : ins) detail::check_name(n, line_no);
        bool unary = op == detail::BenchOp::Not || op == detail::BenchOp::Buf || op == detail::BenchOp::Dff;
        if (unary && ins.size() != 1) throw ParseError(line_no, "'" + std::string(kw) + "' takes exactly one input");
        names.insert(lhs);
        for (const auto& n : ins) names.insert(n);
        statements.push_back({op, lhs, std::move(ins), line_no});
    }

    detail::CircuitBuilder b(names);
    Circuit& c = b.circuit();

    // Drivers first so that every net index is known before wiring.
    std::unordered_map<std::string, int> driven_at;
    auto claim = [&](const std::string& name, int line) {
        auto [it, fresh] = driven_at.emplace(name, line);
        if (!fresh)
            throw ParseError(line, "net '" + name + "' is driven more than once (first driver on line " +
                                       std::to_string(it->second) + ")");
    };
    for (const auto& [name, line] : inputs) {
        claim(name, line);
        c.primary_inputs.push_back(b.net(name));
    }
    c.real_input_count = static_cast<int>(c.primary_inputs.size());
    for (const auto& st : statements) claim(st.output, st.line);

    auto use = [&](const std::string& name, int line) {
        if (!driven_at.contains(name)) throw ParseError(line, "net '" + name + "' is never driven");
        return b.net(name);
    };

    for (const auto& st : statements) {
        if (st.op != detail::BenchOp::Dff) continue;
        int q = b.net(st.output);
        int d = use(st.inputs[0], st.line);
        c.flip_flops.push_back({q, d, st.line});
        c.primary_inputs.push_back(q);
    }
    for (const auto& st : statements) {
        if (st.op == detail::BenchOp::Dff) continue;
        int out = b.net(st.output);
        std::vector<int> in;
        for (const auto& n : st.inputs) in.push_back(use(n, st.line));
        int counter = 0;
        switch (st.op) {
            case detail::BenchOp::Not: b.add_gate(GateType::INV, in, out, st.line); break;
            case detail::BenchOp::Buf: b.add_gate(GateType::BUF, in, out, st.line); break;
            case detail::BenchOp::Xor: b.emit_xor(in, out, st.output, counter, st.line); break;
            case detail::BenchOp::Xnor: {
                if (in.size() == 1) {
                    b.add_gate(GateType::INV, in, out, st.line);
                    break;
                }
                int x = b.synthetic(st.output, counter);
                b.emit_xor(in, x, st.output, counter, st.line);
                b.add_gate(GateType::INV, {x}, out, st.line);
                break;
            }
            default: b.emit_tree(st.op, in, out, st.output, counter, st.line); break;
        }
    }
    for (const auto& [name, line] : outputs) c.primary_outputs.push_back(use(name, line));
    c.real_output_count = static_cast<int>(c.primary_outputs.size());
    for (const auto& ff : c.flip_flops) c.primary_outputs.push_back(ff.d);

    c.driver.assign(c.net_names.size(), -1);
    c.fanout.assign(c.net_names.size(), {});
    for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
        c.driver[static_cast<std::size_t>(c.gates[gi].output)] = static_cast<int>(gi);
        for (int in : c.gates[gi].inputs) c.fanout[static_cast<std::size_t>(in)].push_back(static_cast<int>(gi));
    }
    c.topo_order = topo_sort(c);
    return c;
}

inline const char* bench_keyword(GateType t) {
    switch (t) {
        case GateType::INV: return "NOT";
        case GateType::BUF: return "BUFF";
        case GateType::NAND2:
        case GateType::NAND3:
        case GateType::NAND4: return "NAND";
        case GateType::NOR2:
        case GateType::NOR3:
        case GateType::NOR4: return "NOR";
        case GateType::AND2:
        case GateType::AND3:
        case GateType::AND4: return "AND";
        default: return "OR";
    }
}

/// Canonical `.bench` text of a (decomposed) circuit.
inline std::string emit_bench(const Circuit& c) {
    std::string out;
    auto name = [&](int n) -> const std::string& { return c.net_names[static_cast<std::size_t>(n)]; };
    for (int i = 0; i < c.real_input_count; ++i) out += "INPUT(" + name(c.primary_inputs[static_cast<std::size_t>(i)]) + ")\n";
    for (int i = 0; i < c.real_output_count; ++i) out += "OUTPUT(" + name(c.primary_outputs[static_cast<std::size_t>(i)]) + ")\n";
    for (const auto& ff : c.flip_flops) out += name(ff.q) + " = DFF(" + name(ff.d) + ")\n";
    for (const auto& g : c.gates) {
        out += name(g.output) + " = " + bench_keyword(g.type) + "(";
        for (std::size_t i = 0; i < g.inputs.size(); ++i) out += (i ? ", " : "") + name(g.inputs[i]);
        out += ")\n";
    }
    return out;
}

/// Zero-delay static logic evaluation in topological order.
inline LogicState simulate_logic(const Circuit& c, const InputVector& vector) {
    if (vector.size() != c.primary_inputs.size())
        throw InvalidInput("input vector has " + std::to_string(vector.size()) + " bits, circuit expects " +
                           std::to_string(c.primary_inputs.size()));
    LogicState state(c.net_names.size(), 0);
    for (std::size_t i = 0; i < vector.size(); ++i) state[static_cast<std::size_t>(c.primary_inputs[i])] = vector[i] ? 1 : 0;
    std::vector<std::uint8_t> in;
    for (int gi : c.topo_order) {
        const auto& g = c.gates[static_cast<std::size_t>(gi)];
        in.clear();
        for (int n : g.inputs) in.push_back(state[static_cast<std::size_t>(n)]);
        state[static_cast<std::size_t>(g.output)] = evaluate_logic(g.type, in) ? 1 : 0;
    }
    return state;
}

/// Parses a bit string such as "0110"; bit i applies to primary input i.
inline InputVector parse_vector(std::string_view bits) {
    InputVector v;
    for (char ch : bits) {
        if (ch == '0' || ch == '1') v.push_back(ch == '1');
        else if (ch != '_' && ch != ' ') throw InvalidInput(std::string("vector bits must be 0 or 1, got '") + ch + "'");
    }
    return v;
}

inline std::string format_vector(const InputVector& v) {
    std::string s;
    for (auto b : v) s.push_back(b ? '1' : '0');
    return s;
}

}  // namespace leakload
