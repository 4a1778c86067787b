#pragma once

// Expression DAGs over 64-bit floats: the polynomial-generated smooth maps.
// Node kinds are constant, variable, add, mul, neg, and pow (natural exponent
// >= 1). Nodes are immutable and hash-consed through a per-thread interning
// table, so shared subgraphs stay shared across the derivative
// transformations and DAG sizes stay linear. Reverse derivatives are source
// transformations producing new DAGs; equality of maps is extensional
// (evaluation at quasi-random points) rather than structural.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rdopt/errors.hpp"
#include "rdopt/multipoly.hpp"

namespace rdopt {

enum class ExprOp : std::uint8_t { Const, Var, Add, Mul, Neg, Pow };

class ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

class ExprNode {
public:
    ExprOp op;
    double value = 0;     // Const
    int var = -1;         // Var
    ExprPtr a, b;         // children (a for unary, a/b for binary)
    unsigned exp = 0;     // Pow
    std::uint64_t uid;    // creation-ordered; deterministic given a deterministic build

    ExprNode(ExprOp o, double v, int vr, ExprPtr x, ExprPtr y, unsigned e, std::uint64_t id)
        : op(o), value(v), var(vr), a(std::move(x)), b(std::move(y)), exp(e), uid(id) {}
};

namespace detail {

struct ExprKey {
    ExprOp op;
    std::uint64_t value_bits;
    int var;
    const ExprNode* a;
    const ExprNode* b;
    unsigned exp;

    bool operator==(const ExprKey&) const = default;
};

struct ExprKeyHash {
    std::size_t operator()(const ExprKey& k) const {
        std::size_t h = static_cast<std::size_t>(k.op);
        auto mix = [&h](std::size_t v) {
            h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        };
        mix(static_cast<std::size_t>(k.value_bits));
        mix(static_cast<std::size_t>(static_cast<unsigned>(k.var) + 1));
        mix(reinterpret_cast<std::size_t>(k.a));
        mix(reinterpret_cast<std::size_t>(k.b));
        mix(k.exp);
        return h;
    }
};

// Per-thread hash-consing table. Values are weak so dead subgraphs can be
// collected; expired entries are swept opportunistically.
class ExprInterner {
public:
    static ExprInterner& instance() {
        thread_local ExprInterner table;
        return table;
    }

    ExprPtr intern(ExprOp op, double value, int var, ExprPtr a, ExprPtr b, unsigned exp) {
        ExprKey key{op, bits(value), var, a.get(), b.get(), exp};
        auto it = map_.find(key);
        if (it != map_.end()) {
            if (ExprPtr live = it->second.lock()) return live;
            map_.erase(it);
        }
        auto node = std::make_shared<ExprNode>(op, value, var, std::move(a), std::move(b), exp, next_uid_++);
        map_.emplace(key, node);
        if (++inserts_ % 8192 == 0) sweep();
        return node;
    }

private:
    static std::uint64_t bits(double v) {
        std::uint64_t u;
        static_assert(sizeof u == sizeof v);
        std::memcpy(&u, &v, sizeof u);
        return u;
    }

    void sweep() {
        for (auto it = map_.begin(); it != map_.end();)
            it = it->second.expired() ? map_.erase(it) : std::next(it);
    }

    std::unordered_map<ExprKey, std::weak_ptr<const ExprNode>, ExprKeyHash> map_;
    std::uint64_t next_uid_ = 0;
    std::uint64_t inserts_ = 0;
};

} // namespace detail

// -------------------------------------------------------------------------
// node constructors (with light arithmetic-identity folding)

inline ExprPtr make_cst(double v) {
    if (!std::isfinite(v)) throw invalid_element("non-finite constant node");
    return detail::ExprInterner::instance().intern(ExprOp::Const, v, -1, nullptr, nullptr, 0);
}

inline ExprPtr make_var(int index) {
    if (index < 0) throw arity_error("negative variable index");
    return detail::ExprInterner::instance().intern(ExprOp::Var, 0, index, nullptr, nullptr, 0);
}

inline bool is_cst(const ExprPtr& e, double v) { return e->op == ExprOp::Const && e->value == v; }

inline ExprPtr make_add(ExprPtr x, ExprPtr y) {
    if (x->op == ExprOp::Const && y->op == ExprOp::Const) return make_cst(x->value + y->value);
    if (is_cst(x, 0)) return y;
    if (is_cst(y, 0)) return x;
    if (y->uid < x->uid) std::swap(x, y); // commutative: canonical operand order
    return detail::ExprInterner::instance().intern(ExprOp::Add, 0, -1, std::move(x), std::move(y), 0);
}

inline ExprPtr make_mul(ExprPtr x, ExprPtr y) {
    if (x->op == ExprOp::Const && y->op == ExprOp::Const) return make_cst(x->value * y->value);
    if (is_cst(x, 0) || is_cst(y, 0)) return make_cst(0);
    if (is_cst(x, 1)) return y;
    if (is_cst(y, 1)) return x;
    if (y->uid < x->uid) std::swap(x, y);
    return detail::ExprInterner::instance().intern(ExprOp::Mul, 0, -1, std::move(x), std::move(y), 0);
}

inline ExprPtr make_neg(ExprPtr x) {
    if (x->op == ExprOp::Const) return make_cst(-x->value);
    if (x->op == ExprOp::Neg) return x->a;
    return detail::ExprInterner::instance().intern(ExprOp::Neg, 0, -1, std::move(x), nullptr, 0);
}

inline ExprPtr make_pow(ExprPtr x, unsigned k) {
    if (k < 1) throw rdopt::domain_error("pow exponent must be >= 1");
    if (k == 1) return x;
    if (x->op == ExprOp::Const) return make_cst(std::pow(x->value, static_cast<double>(k)));
    return detail::ExprInterner::instance().intern(ExprOp::Pow, 0, -1, std::move(x), nullptr, k);
}

// -------------------------------------------------------------------------

// Topological order (children before parents), deterministic in the DAG shape.
inline std::vector<const ExprNode*> topo_order(std::span<const ExprPtr> roots) {
    std::vector<const ExprNode*> order;
    std::unordered_map<const ExprNode*, bool> state; // false = open, true = done
    std::vector<std::pair<const ExprNode*, bool>> stack;
    for (const auto& r : roots)
        if (r) stack.emplace_back(r.get(), false);
    while (!stack.empty()) {
        auto [node, expanded] = stack.back();
        stack.pop_back();
        if (expanded) {
            order.push_back(node);
            state[node] = true;
            continue;
        }
        auto it = state.find(node);
        if (it != state.end()) continue;
        state[node] = false;
        stack.emplace_back(node, true);
        if (node->b) stack.emplace_back(node->b.get(), false);
        if (node->a) stack.emplace_back(node->a.get(), false);
    }
    return order;
}

class ExprMap {
public:
    using Scalar = double;

    ExprMap() = default;
    ExprMap(int domain, std::vector<ExprPtr> outputs)
        : dom_(domain), outs_(std::move(outputs)) {
        if (domain < 0) throw arity_error("negative domain arity");
        for (const auto* n : topo_order(std::span<const ExprPtr>(outs_)))
            if (n->op == ExprOp::Var && n->var >= dom_)
                throw arity_error("output mentions variable outside the domain");
    }

    int domain() const { return dom_; }
    int codomain() const { return static_cast<int>(outs_.size()); }
    const std::vector<ExprPtr>& outputs() const { return outs_; }
    const ExprPtr& output(int i) const { return outs_.at(static_cast<std::size_t>(i)); }

    static ExprMap identity(int n) {
        std::vector<ExprPtr> outs;
        for (int i = 0; i < n; ++i) outs.push_back(make_var(i));
        return ExprMap(n, std::move(outs));
    }

    static ExprMap zero(int n, int m) {
        return ExprMap(n, std::vector<ExprPtr>(static_cast<std::size_t>(m), make_cst(0)));
    }

    static ExprMap ones(int n, int m) {
        return ExprMap(n, std::vector<ExprPtr>(static_cast<std::size_t>(m), make_cst(1)));
    }

    static ExprMap constants(int n, std::span<const double> values) {
        std::vector<ExprPtr> outs;
        for (double v : values) outs.push_back(make_cst(v));
        return ExprMap(n, std::move(outs));
    }

    static ExprMap proj0(int n, int m) {
        std::vector<ExprPtr> outs;
        for (int i = 0; i < n; ++i) outs.push_back(make_var(i));
        return ExprMap(n + m, std::move(outs));
    }

    static ExprMap proj1(int n, int m) {
        std::vector<ExprPtr> outs;
        for (int i = 0; i < m; ++i) outs.push_back(make_var(n + i));
        return ExprMap(n + m, std::move(outs));
    }

    std::vector<double> evaluate(std::span<const double> point) const {
        if (static_cast<int>(point.size()) != dom_) throw arity_error("evaluation point arity mismatch");
        std::unordered_map<const ExprNode*, double> val;
        for (const auto* n : topo_order(std::span<const ExprPtr>(outs_))) {
            double v = 0;
            switch (n->op) {
                case ExprOp::Const: v = n->value; break;
                case ExprOp::Var: v = point[static_cast<std::size_t>(n->var)]; break;
                case ExprOp::Add: v = val[n->a.get()] + val[n->b.get()]; break;
                case ExprOp::Mul: v = val[n->a.get()] * val[n->b.get()]; break;
                case ExprOp::Neg: v = -val[n->a.get()]; break;
                case ExprOp::Pow: v = std::pow(val[n->a.get()], static_cast<double>(n->exp)); break;
            }
            val[n] = v;
        }
        std::vector<double> out;
        out.reserve(outs_.size());
        for (const auto& o : outs_) out.push_back(val[o.get()]);
        return out;
    }

private:
    int dom_ = 0;
    std::vector<ExprPtr> outs_;
};

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Number of distinct reachable nodes.
inline std::size_t dag_size(const ExprMap& f) {
    return topo_order(std::span<const ExprPtr>(f.outputs())).size();
}

namespace detail {

// Rebuilds roots bottom-up, replacing Var nodes through `sub`; other nodes are
// reconstructed through the interner so folding and sharing apply.
inline std::vector<ExprPtr> substitute_vars(std::span<const ExprPtr> roots,
                                            const std::vector<ExprPtr>& sub) {
    std::unordered_map<const ExprNode*, ExprPtr> memo;
    for (const auto* n : topo_order(roots)) {
        ExprPtr r;
        switch (n->op) {
            case ExprOp::Const: r = make_cst(n->value); break;
            case ExprOp::Var: r = sub.at(static_cast<std::size_t>(n->var)); break;
            case ExprOp::Add: r = make_add(memo[n->a.get()], memo[n->b.get()]); break;
            case ExprOp::Mul: r = make_mul(memo[n->a.get()], memo[n->b.get()]); break;
            case ExprOp::Neg: r = make_neg(memo[n->a.get()]); break;
            case ExprOp::Pow: r = make_pow(memo[n->a.get()], n->exp); break;
        }
        memo[n] = std::move(r);
    }
    std::vector<ExprPtr> out;
    out.reserve(roots.size());
    for (const auto& root : roots) out.push_back(memo[root.get()]);
    return out;
}

} // namespace detail

inline ExprMap terminal_map_expr(int n) { return ExprMap(n, {}); }

inline ExprMap compose(const ExprMap& g, const ExprMap& f) {
    if (g.domain() != f.codomain()) throw arity_error("compose: inner codomain != outer domain");
    auto outs = detail::substitute_vars(std::span<const ExprPtr>(g.outputs()), f.outputs());
    return ExprMap(f.domain(), std::move(outs));
}

inline ExprMap pair_map(const ExprMap& f, const ExprMap& g) {
    if (f.domain() != g.domain()) throw arity_error("pair: domain mismatch");
    std::vector<ExprPtr> outs = f.outputs();
    outs.insert(outs.end(), g.outputs().begin(), g.outputs().end());
    return ExprMap(f.domain(), std::move(outs));
}

inline ExprMap product_map(const ExprMap& f, const ExprMap& g) {
    int n = f.domain() + g.domain();
    std::vector<ExprPtr> shift;
    shift.reserve(static_cast<std::size_t>(g.domain()));
    for (int i = 0; i < g.domain(); ++i) shift.push_back(make_var(f.domain() + i));
    auto gouts = detail::substitute_vars(std::span<const ExprPtr>(g.outputs()), shift);
    std::vector<ExprPtr> outs = f.outputs();
    outs.insert(outs.end(), gouts.begin(), gouts.end());
    return ExprMap(n, std::move(outs));
}

inline ExprMap add(const ExprMap& f, const ExprMap& g) {
    if (f.domain() != g.domain() || f.codomain() != g.codomain())
        throw arity_error("add: arity mismatch");
    std::vector<ExprPtr> outs;
    for (int i = 0; i < f.codomain(); ++i) outs.push_back(make_add(f.output(i), g.output(i)));
    return ExprMap(f.domain(), std::move(outs));
}

inline ExprMap neg(const ExprMap& f) {
    std::vector<ExprPtr> outs;
    for (const auto& o : f.outputs()) outs.push_back(make_neg(o));
    return ExprMap(f.domain(), std::move(outs));
}

inline ExprMap iota0_expr(int n, int m) { return pair_map(ExprMap::identity(n), ExprMap::zero(n, m)); }
inline ExprMap iota1_expr(int n, int m) { return pair_map(ExprMap::zero(m, n), ExprMap::identity(m)); }

// Reverse derivative as a source transformation: R[f] : (a+b) -> a, where the
// trailing b variables seed the output adjoints. One reverse sweep over the
// DAG; sharing is preserved, so the result size is linear in the input size.
inline ExprMap reverse_derivative(const ExprMap& f) {
    int a = f.domain();
    int b = f.codomain();
    auto order = topo_order(std::span<const ExprPtr>(f.outputs()));
    std::unordered_map<const ExprNode*, ExprPtr> adj;
    auto accumulate = [&adj](const ExprNode* node, ExprPtr delta) {
        auto it = adj.find(node);
        if (it == adj.end())
            adj.emplace(node, std::move(delta));
        else
            it->second = make_add(it->second, std::move(delta));
    };
    for (int i = 0; i < b; ++i) accumulate(f.output(i).get(), make_var(a + i));

    std::vector<ExprPtr> grad(static_cast<std::size_t>(a), make_cst(0));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const ExprNode* n = *it;
        auto found = adj.find(n);
        if (found == adj.end()) continue;
        ExprPtr A = found->second;
        switch (n->op) {
            case ExprOp::Const:
                break;
            case ExprOp::Var:
                grad[static_cast<std::size_t>(n->var)] =
                    make_add(grad[static_cast<std::size_t>(n->var)], A);
                break;
            case ExprOp::Add:
                accumulate(n->a.get(), A);
                accumulate(n->b.get(), A);
                break;
            case ExprOp::Mul:
                accumulate(n->a.get(), make_mul(A, n->b));
                accumulate(n->b.get(), make_mul(A, n->a));
                break;
            case ExprOp::Neg:
                accumulate(n->a.get(), make_neg(A));
                break;
            case ExprOp::Pow: {
                ExprPtr rule = make_mul(make_cst(static_cast<double>(n->exp)),
                                        n->exp == 1 ? make_cst(1) : make_pow(n->a, n->exp - 1));
                accumulate(n->a.get(), make_mul(A, rule));
                break;
            }
        }
    }
    return ExprMap(a + b, std::move(grad));
}

// -------------------------------------------------------------------------
// extensional equality at quasi-random points

namespace detail {

// Fractional parts of sqrt(prime): a Weyl-type low-discrepancy driver.
inline double weyl_alpha(int dim) {
    static const int primes[] = {2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,
                                 43,  47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101,
                                 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167,
                                 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
                                 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};
    double r = std::sqrt(static_cast<double>(primes[dim % 64]));
    return r - std::floor(r);
}

} // namespace detail

inline std::vector<double> quasi_random_point(int dim, int index, double lo = -2.0, double hi = 2.0) {
    std::vector<double> p(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        double t = (index + 1) * detail::weyl_alpha(j) + 0.5 * (j + 1);
        t -= std::floor(t);
        p[static_cast<std::size_t>(j)] = lo + (hi - lo) * t;
    }
    return p;
}

struct ApproxCompare {
    bool ok = true;
    double max_dev = 0;
    std::vector<double> worst_point;
};

// Relative deviation with an absolute guard: |x-y| <= tol * max(1, |x|, |y|).
inline ApproxCompare approx_equal(const ExprMap& f, const ExprMap& g, double tol = 1e-9,
                                  int points = 20) {
    if (f.domain() != g.domain() || f.codomain() != g.codomain())
        throw arity_error("approx_equal: arity mismatch");
    ApproxCompare r;
    for (int k = 0; k < points; ++k) {
        auto x = quasi_random_point(f.domain(), k);
        auto fv = f.evaluate(std::span<const double>(x));
        auto gv = g.evaluate(std::span<const double>(x));
        for (int i = 0; i < f.codomain(); ++i) {
            double scale = std::max({1.0, std::fabs(fv[static_cast<std::size_t>(i)]),
                                     std::fabs(gv[static_cast<std::size_t>(i)])});
            double dev = std::fabs(fv[static_cast<std::size_t>(i)] - gv[static_cast<std::size_t>(i)]) / scale;
            if (!(dev <= tol) || !std::isfinite(dev)) {
                if (!std::isfinite(dev) || dev > r.max_dev) {
                    r.max_dev = dev;
                    r.worst_point = x;
                }
                r.ok = false;
            } else if (r.ok && dev > r.max_dev) {
                r.max_dev = dev;
            }
        }
    }
    return r;
}

// -------------------------------------------------------------------------
// polynomial conversion and JSON serialization

template <Ring R>
ExprPtr expr_from_poly(const MultiPoly<R>& p) {
    ExprPtr acc = make_cst(0);
    for (const auto& [e, c] : p.terms()) {
        ExprPtr term = make_cst(ring_traits<R>::to_double(c));
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i]) term = make_mul(term, make_pow(make_var(static_cast<int>(i)), e[i]));
        acc = make_add(acc, term);
    }
    return acc;
}

template <Ring R>
ExprMap expr_from_polymap(const PolyMap<R>& f) {
    std::vector<ExprPtr> outs;
    for (const auto& c : f.components()) outs.push_back(expr_from_poly(c));
    return ExprMap(f.domain(), std::move(outs));
}

inline ExprMap linear_expr_map(const std::vector<std::vector<double>>& mat, int cols) {
    std::vector<ExprPtr> outs;
    for (const auto& row : mat) {
        if (static_cast<int>(row.size()) != cols) throw arity_error("matrix row width mismatch");
        ExprPtr acc = make_cst(0);
        for (int j = 0; j < cols; ++j)
            if (row[static_cast<std::size_t>(j)] != 0)
                acc = make_add(acc, make_mul(make_cst(row[static_cast<std::size_t>(j)]), make_var(j)));
        outs.push_back(acc);
    }
    return ExprMap(cols, std::move(outs));
}

inline nlohmann::ordered_json expr_map_to_json(const ExprMap& f) {
    auto order = topo_order(std::span<const ExprPtr>(f.outputs()));
    std::unordered_map<const ExprNode*, int> id;
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto* n : order) {
        int my = static_cast<int>(id.size());
        id[n] = my;
        nlohmann::ordered_json j;
        j["id"] = my;
        switch (n->op) {
            case ExprOp::Const:
                j["op"] = "const";
                j["value"] = n->value;
                break;
            case ExprOp::Var:
                j["op"] = "var";
                j["index"] = n->var;
                break;
            case ExprOp::Add:
                j["op"] = "add";
                j["args"] = {id[n->a.get()], id[n->b.get()]};
                break;
            case ExprOp::Mul:
                j["op"] = "mul";
                j["args"] = {id[n->a.get()], id[n->b.get()]};
                break;
            case ExprOp::Neg:
                j["op"] = "neg";
                j["args"] = {id[n->a.get()]};
                break;
            case ExprOp::Pow:
                j["op"] = "pow";
                j["args"] = {id[n->a.get()]};
                j["exp"] = n->exp;
                break;
        }
        nodes.push_back(std::move(j));
    }
    nlohmann::ordered_json out;
    out["domain_arity"] = f.domain();
    out["codomain_arity"] = f.codomain();
    out["nodes"] = std::move(nodes);
    nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
    for (const auto& o : f.outputs()) outputs.push_back(id[o.get()]);
    out["outputs"] = std::move(outputs);
    return out;
}

inline ExprMap expr_map_from_json(const nlohmann::json& j) {
    try {
        int dom = j.at("domain_arity").get<int>();
        std::vector<ExprPtr> built;
        for (const auto& nj : j.at("nodes")) {
            std::string op = nj.at("op").get<std::string>();
            auto child = [&](int slot) -> ExprPtr {
                int idx = nj.at("args").at(static_cast<std::size_t>(slot)).get<int>();
                if (idx < 0 || idx >= static_cast<int>(built.size()))
                    throw parse_error("node argument out of order");
                return built[static_cast<std::size_t>(idx)];
            };
            if (op == "const") {
                built.push_back(make_cst(nj.at("value").get<double>()));
            } else if (op == "var") {
                built.push_back(make_var(nj.at("index").get<int>()));
            } else if (op == "add") {
                built.push_back(make_add(child(0), child(1)));
            } else if (op == "mul") {
                built.push_back(make_mul(child(0), child(1)));
            } else if (op == "neg") {
                built.push_back(make_neg(child(0)));
            } else if (op == "pow") {
                built.push_back(make_pow(child(0), nj.at("exp").get<unsigned>()));
            } else {
                throw parse_error("unknown node op: " + op);
            }
        }
        std::vector<ExprPtr> outs;
        for (const auto& oj : j.at("outputs")) {
            int idx = oj.get<int>();
            if (idx < 0 || idx >= static_cast<int>(built.size()))
                throw parse_error("output id out of range");
            outs.push_back(built[static_cast<std::size_t>(idx)]);
        }
        int cod = j.at("codomain_arity").get<int>();
        if (cod != static_cast<int>(outs.size())) throw parse_error("codomain arity disagrees with outputs");
        return ExprMap(dom, std::move(outs));
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad expression JSON: ") + e.what());
    }
}

} // namespace rdopt
