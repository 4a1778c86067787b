#pragma once

// Executable checkers for the reverse-derivative combinator axioms (RD.1-7),
// the derived forward-derivative axioms (CDC.1-7, with D built as
// pi_1 . R[R[f]] . (<id,0> x id)), and the left-additive structure laws.
//
// Each law is stated as an equation between two composite morphisms; the
// checker constructs both sides literally from the combinators and compares
// them through the instance's equality (exact canonical forms for polynomial
// maps, multi-point evaluation for expression DAGs). RD.3 and CDC.3 quantify
// over projections only, so they sweep all arity combinations up to 4
// deterministically; the other laws draw random morphisms per case.
// Triple-reverse laws (RD.6, RD.7) cap at 50 cases and use smaller inputs:
// term growth is steep and each exact case is already strong evidence.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdopt/derived.hpp"
#include "rdopt/expr.hpp"
#include "rdopt/polymap.hpp"
#include "rdopt/rng.hpp"

namespace rdopt {

enum class Law {
    RD1, RD2, RD3, RD4, RD5, RD6, RD7,
    CDC1, CDC2, CDC3, CDC4, CDC5, CDC6, CDC7,
    LeftAdditive,
};

inline const char* law_id(Law law) {
    switch (law) {
        case Law::RD1: return "RD.1";
        case Law::RD2: return "RD.2";
        case Law::RD3: return "RD.3";
        case Law::RD4: return "RD.4";
        case Law::RD5: return "RD.5";
        case Law::RD6: return "RD.6";
        case Law::RD7: return "RD.7";
        case Law::CDC1: return "CDC.1";
        case Law::CDC2: return "CDC.2";
        case Law::CDC3: return "CDC.3";
        case Law::CDC4: return "CDC.4";
        case Law::CDC5: return "CDC.5";
        case Law::CDC6: return "CDC.6";
        case Law::CDC7: return "CDC.7";
        case Law::LeftAdditive: return "LA";
    }
    return "?";
}

inline std::vector<Law> all_laws() {
    return {Law::RD1,  Law::RD2,  Law::RD3,  Law::RD4,  Law::RD5,  Law::RD6,  Law::RD7,
            Law::CDC1, Law::CDC2, Law::CDC3, Law::CDC4, Law::CDC5, Law::CDC6, Law::CDC7,
            Law::LeftAdditive};
}

inline std::optional<Law> law_from_string(const std::string& s) {
    for (Law l : all_laws())
        if (s == law_id(l)) return l;
    return std::nullopt;
}

struct LawFailure {
    std::uint64_t case_index = 0;
    std::uint64_t case_seed = 0;
    std::string detail;
};

struct LawReport {
    std::string law;
    std::string instance;
    std::uint64_t cases = 0;
    std::vector<LawFailure> failures;

    bool pass() const { return failures.empty(); }
};

inline nlohmann::ordered_json law_report_to_json(const LawReport& r) {
    nlohmann::ordered_json j;
    j["law"] = r.law;
    j["instance"] = r.instance;
    j["cases"] = r.cases;
    j["pass"] = r.pass();
    nlohmann::ordered_json fails = nlohmann::ordered_json::array();
    for (const auto& f : r.failures) {
        nlohmann::ordered_json fj;
        fj["case"] = f.case_index;
        fj["seed"] = f.case_seed;
        fj["detail"] = f.detail;
        fails.push_back(std::move(fj));
    }
    j["failures"] = std::move(fails);
    return j;
}

// ---------------------------------------------------------------------------
// instances

namespace detail {

inline std::string clip(std::string s, std::size_t n = 300) {
    if (s.size() > n) {
        s.resize(n);
        s += "...";
    }
    return s;
}

} // namespace detail

// Random sparse polynomial maps with exact structural equality.
template <Ring R>
struct PolyInstance {
    using M = PolyMap<R>;
    std::string name = std::string("poly-") + ring_traits<R>::name;
    int max_arity = 3;
    int max_degree = 3;

    PolyInstance heavy() const {
        PolyInstance h = *this;
        h.max_arity = 2;
        return h;
    }

    R rand_coeff(Rng& rng) const {
        long p = rng.range(-5, 5);
        if constexpr (std::is_same_v<R, Rat>) {
            long q = rng.range(1, 3);
            Rat c(p, q);
            c.canonicalize();
            return c;
        } else {
            return R(p);
        }
    }

    M rand_map(Rng& rng, int dom, int cod) const {
        std::vector<MultiPoly<R>> comps;
        for (int i = 0; i < cod; ++i) {
            MultiPoly<R> p(dom);
            int terms = static_cast<int>(rng.range(1, 4));
            for (int t = 0; t < terms; ++t) {
                ExpVec e(static_cast<std::size_t>(dom), 0);
                int budget = static_cast<int>(rng.range(0, max_degree));
                for (int d = 0; d < budget; ++d)
                    e[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(dom)))] += 1;
                p.add_term(e, rand_coeff(rng));
            }
            comps.push_back(std::move(p));
        }
        return M(dom, std::move(comps));
    }

    bool equal(const M& x, const M& y, std::string& why) const {
        if (x == y) return true;
        why = "lhs = " + detail::clip(polymap_str(x)) + " ; rhs = " + detail::clip(polymap_str(y));
        return false;
    }
};

// Random expression DAGs compared by multi-point evaluation.
struct SmoothInstance {
    using M = ExprMap;
    std::string name = "smooth";
    int max_arity = 3;
    int depth = 4;
    double tol = 1e-9;
    int points = 20;

    SmoothInstance heavy() const {
        SmoothInstance h = *this;
        h.max_arity = 2;
        h.depth = 3;
        return h;
    }

    ExprPtr rand_node(Rng& rng, int dom, int d) const {
        if (d == 0 || rng.below(5) == 0) {
            if (rng.below(3) == 0) return make_cst(static_cast<double>(rng.range(-2, 2)));
            return make_var(static_cast<int>(rng.below(static_cast<std::uint64_t>(dom))));
        }
        switch (rng.below(4)) {
            case 0: return make_add(rand_node(rng, dom, d - 1), rand_node(rng, dom, d - 1));
            case 1: return make_mul(rand_node(rng, dom, d - 1), rand_node(rng, dom, d - 1));
            case 2: return make_neg(rand_node(rng, dom, d - 1));
            default: return make_pow(rand_node(rng, dom, d - 1), 2 + static_cast<unsigned>(rng.below(2)));
        }
    }

    M rand_map(Rng& rng, int dom, int cod) const {
        std::vector<ExprPtr> outs;
        for (int i = 0; i < cod; ++i) outs.push_back(rand_node(rng, dom, depth));
        return M(dom, std::move(outs));
    }

    bool equal(const M& x, const M& y, std::string& why) const {
        auto r = approx_equal(x, y, tol, points);
        if (r.ok) return true;
        why = "max deviation " + std::to_string(r.max_dev) + " at (";
        for (std::size_t i = 0; i < r.worst_point.size(); ++i) {
            if (i) why += ", ";
            why += std::to_string(r.worst_point[i]);
        }
        why += ")";
        return false;
    }
};

// ---------------------------------------------------------------------------
// the equations

namespace detail {

template <class M>
M iota0_m(int n, int m) {
    return pair_map(M::identity(n), M::zero(n, m));
}

template <class M>
M iota1_m(int n, int m) {
    return pair_map(M::zero(m, n), M::identity(m));
}

template <class M>
M terminal_m(int n) {
    return M(n, {});
}

template <class Inst>
struct CaseRunner {
    using M = typename Inst::M;
    const Inst& inst;
    Rng& rng;
    std::string why;

    int ar() { return static_cast<int>(rng.range(1, static_cast<long>(inst.max_arity))); }
    M rnd(int dom, int cod) { return inst.rand_map(rng, dom, cod); }

    bool eq(const char* part, const M& x, const M& y) {
        std::string w;
        if (inst.equal(x, y, w)) return true;
        why = std::string(part) + ": " + w;
        return false;
    }

    bool left_additive() {
        int a = ar(), b = ar(), c = ar();
        M f = rnd(a, b), g = rnd(a, b), h = rnd(c, a);
        if (!eq("(f+g).h = f.h + g.h", compose(add(f, g), h), add(compose(f, h), compose(g, h))))
            return false;
        if (!eq("0.h = 0", compose(M::zero(a, b), h), M::zero(c, b))) return false;
        M p = rnd(c, a + b), q = rnd(c, a + b);
        if (!eq("pi0.(p+q) = pi0.p + pi0.q", compose(M::proj0(a, b), add(p, q)),
                add(compose(M::proj0(a, b), p), compose(M::proj0(a, b), q))))
            return false;
        return eq("pi1.0 = 0", compose(M::proj1(a, b), M::zero(c, a + b)), M::zero(c, b));
    }

    bool rd1() {
        int a = ar(), b = ar();
        M f = rnd(a, b), g = rnd(a, b);
        if (!eq("R[f+g] = R[f]+R[g]", reverse_derivative(add(f, g)),
                add(reverse_derivative(f), reverse_derivative(g))))
            return false;
        return eq("R[0] = 0", reverse_derivative(M::zero(a, b)), M::zero(a + b, a));
    }

    bool rd2() {
        int a = ar(), b = ar(), c = ar();
        M f = rnd(a, b), s = rnd(c, a), t = rnd(c, b), u = rnd(c, b);
        M rf = reverse_derivative(f);
        if (!eq("R[f].<s,t+u> = R[f].<s,t> + R[f].<s,u>", compose(rf, pair_map(s, add(t, u))),
                add(compose(rf, pair_map(s, t)), compose(rf, pair_map(s, u)))))
            return false;
        return eq("R[f].<s,0> = 0", compose(rf, pair_map(s, M::zero(c, b))), M::zero(c, a));
    }

    bool rd4() {
        int a = ar(), b = ar(), c = ar();
        M f = rnd(a, b), g = rnd(a, c);
        M lhs = reverse_derivative(pair_map(f, g));
        M rhs = add(compose(reverse_derivative(f), product_map(M::identity(a), M::proj0(b, c))),
                    compose(reverse_derivative(g), product_map(M::identity(a), M::proj1(b, c))));
        if (!eq("R[<f,g>] = R[f].(1 x pi0) + R[g].(1 x pi1)", lhs, rhs)) return false;
        return eq("R[!] = 0", reverse_derivative(terminal_m<M>(a)), M::zero(a, a));
    }

    bool rd5() {
        int a = ar(), b = ar(), c = ar();
        M f = rnd(a, b), g = rnd(b, c);
        M lhs = reverse_derivative(compose(g, f));
        M wire = pair_map(M::proj0(a, c), pair_map(compose(f, M::proj0(a, c)), M::proj1(a, c)));
        M rhs = compose(reverse_derivative(f),
                        compose(product_map(M::identity(a), reverse_derivative(g)), wire));
        return eq("R[g.f] = R[f].(1 x R[g]).<pi0,<f.pi0,pi1>>", lhs, rhs);
    }

    bool rd6() {
        int n = ar(), m = ar();
        M f = rnd(n, m);
        M r3 = reverse_derivative(reverse_derivative(reverse_derivative(f)));
        M pre2 = product_map(iota0_m<M>(n + m, n), M::identity(n + m));
        M pre1 = pair_map(product_map(M::identity(n), M::proj0(m, m)),
                          product_map(M::zero(n, n), M::proj1(m, m)));
        M lhs = compose(M::proj1(n + m, n), compose(r3, compose(pre2, pre1)));
        M rhs = compose(reverse_derivative(f), product_map(M::identity(n), M::proj1(m, m)));
        return eq("pi1.R3[f].(i0 x 1).<1 x pi0, 0 x pi1> = R[f].(1 x pi1)", lhs, rhs);
    }

    bool rd7() {
        int n = ar(), m = ar();
        M f = rnd(n, m);
        M h = forward_derivative(forward_derivative(f));
        M ex = pair_map(product_map(M::proj0(n, n), M::proj0(n, n)),
                        product_map(M::proj1(n, n), M::proj1(n, n)));
        return eq("D[D[f]] = D[D[f]].<pi0 x pi0, pi1 x pi1>", h, compose(h, ex));
    }

    bool cdc1() {
        int a = ar(), b = ar();
        M f = rnd(a, b), g = rnd(a, b);
        if (!eq("D[f+g] = D[f]+D[g]", forward_derivative(add(f, g)),
                add(forward_derivative(f), forward_derivative(g))))
            return false;
        return eq("D[0] = 0", forward_derivative(M::zero(a, b)), M::zero(a + a, b));
    }

    bool cdc2() {
        int a = ar(), b = ar(), c = ar();
        M f = rnd(a, b), s = rnd(c, a), t = rnd(c, a), u = rnd(c, a);
        M df = forward_derivative(f);
        if (!eq("D[f].<s,t+u> = D[f].<s,t> + D[f].<s,u>", compose(df, pair_map(s, add(t, u))),
                add(compose(df, pair_map(s, t)), compose(df, pair_map(s, u)))))
            return false;
        return eq("D[f].<s,0> = 0", compose(df, pair_map(s, M::zero(c, a))), M::zero(c, b));
    }

    bool cdc4() {
        int a = ar(), b = ar(), c = ar();
        M f = rnd(a, b), g = rnd(a, c);
        return eq("D[<f,g>] = <D[f],D[g]>", forward_derivative(pair_map(f, g)),
                  pair_map(forward_derivative(f), forward_derivative(g)));
    }

    bool cdc5() {
        int a = ar(), b = ar(), c = ar();
        M f = rnd(a, b), g = rnd(b, c);
        M lhs = forward_derivative(compose(g, f));
        M rhs = compose(forward_derivative(g),
                        pair_map(compose(f, M::proj0(a, a)), forward_derivative(f)));
        return eq("D[g.f] = D[g].<f.pi0, D[f]>", lhs, rhs);
    }

    bool cdc6() {
        int a = ar(), b = ar(), c = ar();
        M f = rnd(a, b), s = rnd(c, a), t = rnd(c, a), u = rnd(c, a);
        M ddf = forward_derivative(forward_derivative(f));
        M lhs = compose(ddf, pair_map(pair_map(s, t), pair_map(M::zero(c, a), u)));
        M rhs = compose(forward_derivative(f), pair_map(s, u));
        return eq("D[D[f]].<<s,t>,<0,u>> = D[f].<s,u>", lhs, rhs);
    }

    bool cdc7() {
        int a = ar(), b = ar(), c = ar();
        M f = rnd(a, b), s = rnd(c, a), t = rnd(c, a), u = rnd(c, a), v = rnd(c, a);
        M ddf = forward_derivative(forward_derivative(f));
        M lhs = compose(ddf, pair_map(pair_map(s, t), pair_map(u, v)));
        M rhs = compose(ddf, pair_map(pair_map(s, u), pair_map(t, v)));
        return eq("D[D[f]].<<s,t>,<u,v>> = D[D[f]].<<s,u>,<t,v>>", lhs, rhs);
    }

    bool run(Law law) {
        switch (law) {
            case Law::RD1: return rd1();
            case Law::RD2: return rd2();
            case Law::RD4: return rd4();
            case Law::RD5: return rd5();
            case Law::RD6: return rd6();
            case Law::RD7: return rd7();
            case Law::CDC1: return cdc1();
            case Law::CDC2: return cdc2();
            case Law::CDC4: return cdc4();
            case Law::CDC5: return cdc5();
            case Law::CDC6: return cdc6();
            case Law::CDC7: return cdc7();
            case Law::LeftAdditive: return left_additive();
            default: why = "law has no randomized form"; return false;
        }
    }
};

// RD.3 / CDC.3 range over identities and projections; sweep arities 1..4.
template <class Inst>
void sweep_projection_law(Law law, const Inst& inst, LawReport& rep) {
    using M = typename Inst::M;
    auto record = [&rep, &inst](const M& lhs, const M& rhs, const std::string& label) {
        rep.cases += 1;
        std::string w;
        if (!inst.equal(lhs, rhs, w)) rep.failures.push_back({rep.cases - 1, 0, label + ": " + w});
    };
    for (int a = 1; a <= 4; ++a) {
        if (law == Law::RD3)
            record(reverse_derivative(M::identity(a)), M::proj1(a, a),
                   "R[1] = pi1 (a=" + std::to_string(a) + ")");
        else
            record(forward_derivative(M::identity(a)), M::proj1(a, a),
                   "D[1] = pi1 (a=" + std::to_string(a) + ")");
    }
    for (int a = 1; a <= 4; ++a) {
        for (int b = 1; b <= 4; ++b) {
            std::string at = " (a=" + std::to_string(a) + ", b=" + std::to_string(b) + ")";
            if (law == Law::RD3) {
                record(reverse_derivative(M::proj0(a, b)),
                       compose(iota0_m<M>(a, b), M::proj1(a + b, a)), "R[pi0] = i0.pi1" + at);
                record(reverse_derivative(M::proj1(a, b)),
                       compose(iota1_m<M>(a, b), M::proj1(a + b, b)), "R[pi1] = i1.pi1" + at);
            } else {
                record(forward_derivative(M::proj0(a, b)),
                       compose(M::proj0(a, b), M::proj1(a + b, a + b)), "D[pi0] = pi0.pi1" + at);
                record(forward_derivative(M::proj1(a, b)),
                       compose(M::proj1(a, b), M::proj1(a + b, a + b)), "D[pi1] = pi1.pi1" + at);
            }
        }
    }
}

} // namespace detail

inline bool is_triple_reverse_law(Law law) { return law == Law::RD6 || law == Law::RD7; }

template <class Inst>
LawReport check_law(Law law, const Inst& inst, std::uint64_t cases, std::uint64_t seed) {
    if (cases < 1) throw rdopt::domain_error("case count must be >= 1");
    LawReport rep;
    rep.law = law_id(law);
    rep.instance = inst.name;

    if (law == Law::RD3 || law == Law::CDC3) {
        detail::sweep_projection_law(law, inst, rep);
        return rep;
    }

    Inst use = inst;
    if (is_triple_reverse_law(law)) {
        cases = std::min<std::uint64_t>(cases, 50);
        use = inst.heavy();
    }
    rep.cases = cases;
    for (std::uint64_t i = 0; i < cases; ++i) {
        std::uint64_t cs = derive_seed(seed, static_cast<std::uint64_t>(law) + 1, i);
        Rng rng(cs);
        detail::CaseRunner<Inst> runner{use, rng, {}};
        if (!runner.run(law)) rep.failures.push_back({i, cs, runner.why});
    }
    return rep;
}

// The full suite over one instance.
template <class Inst>
std::vector<LawReport> check_all_laws(const Inst& inst, std::uint64_t cases, std::uint64_t seed) {
    std::vector<LawReport> out;
    for (Law law : all_laws()) out.push_back(check_law(law, inst, cases, seed));
    return out;
}

} // namespace rdopt
