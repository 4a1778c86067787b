#pragma once

// Optimization flows (l, d, s, tau): an objective, an optimizer, a state map
// s : X -> A^k from time into stacked optimizer state, and a finite list of
// sample times. The checks here are the executable content of the flow
// definitions:
//
//   flow condition        d . s . t  =  D_1[s] . t           at every t in tau
//   n-descending          D_k[l . pi_0 . s] . t  <=  0       for k <= n
//   inner-product         D_1[l . pi_0 . s] . t  =  -sum_i (dl/dx_i(s_t))^2
//                         (gradient flows, dimension 1)
//   convergence           earliest t with |loss(t') - loss(t)| <= delta
//                         for every later t' in tau
//
// Everything is evaluated exactly in ring domains; float domains compare
// within a relative tolerance.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdopt/derived.hpp"
#include "rdopt/expr.hpp"
#include "rdopt/optim.hpp"
#include "rdopt/polymap.hpp"

namespace rdopt {

template <class M>
struct Flow {
    Objective<M> objective;    // l : n -> 1
    GenOptimizer<M> optimizer; // d on A^k, state_arity n, dimension k
    M state_map;               // s : 1 -> k*n
    std::vector<typename M::Scalar> tau;
};

template <class M>
void validate_flow_arities(const Flow<M>& f) {
    int n = f.optimizer.state_arity;
    int k = f.optimizer.dimension;
    if (f.objective.map.domain() != n || f.objective.map.codomain() != 1)
        throw arity_error("flow objective must map the optimizer state space to arity 1");
    if (f.state_map.domain() != 1 || f.state_map.codomain() != k * n)
        throw arity_error("state map must be a morphism 1 -> k*n");
}

// D_1[s] = D[s] . <id, 1> for s : 1 -> m (any m >= 1).
template <class M>
M time_derivative(const M& s) {
    if (s.domain() != 1) throw arity_error("time derivative requires domain arity 1");
    return compose(forward_derivative(s), pair_map(M::identity(1), M::ones(1, 1)));
}

// ---------------------------------------------------------------------------
// reports

template <class S>
struct FlowPoint {
    int order = 1; // derivative order for the descending check, 1 otherwise
    S t{0};
    std::vector<S> lhs, rhs;
    bool pass = false;
};

template <class S>
struct CheckReport {
    std::string check;
    bool pass = true;
    std::vector<FlowPoint<S>> points;
    std::string note;
};

template <class S>
struct ConvergenceReport {
    bool converged = false;
    int index = -1; // earliest index into tau, -1 when none qualifies
    std::optional<S> t;
    std::vector<S> losses;
};

namespace detail {

template <Ring S>
bool scalar_nonpositive(const S& v, double tol) {
    if constexpr (std::is_same_v<S, double>) {
        return v <= tol * std::max(1.0, std::fabs(v));
    } else {
        (void)tol;
        return ring_cmp(v, S(0)) != std::strong_ordering::greater;
    }
}

template <Ring S>
bool vectors_close(const std::vector<S>& a, const std::vector<S>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!scalar_close(a[i], b[i], tol)) return false;
    return true;
}

} // namespace detail

template <class S>
nlohmann::ordered_json check_report_to_json(const CheckReport<S>& r) {
    nlohmann::ordered_json j;
    j["check"] = r.check;
    j["pass"] = r.pass;
    if (!r.note.empty()) j["note"] = r.note;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& p : r.points) {
        nlohmann::ordered_json pj;
        pj["order"] = p.order;
        pj["t"] = ring_str(p.t);
        nlohmann::ordered_json lhs = nlohmann::ordered_json::array();
        for (const auto& v : p.lhs) lhs.push_back(ring_str(v));
        nlohmann::ordered_json rhs = nlohmann::ordered_json::array();
        for (const auto& v : p.rhs) rhs.push_back(ring_str(v));
        pj["lhs"] = std::move(lhs);
        pj["rhs"] = std::move(rhs);
        pj["pass"] = p.pass;
        pts.push_back(std::move(pj));
    }
    j["points"] = std::move(pts);
    return j;
}

// ---------------------------------------------------------------------------
// checks

// d . s . t = D_1[s] . t at every t in tau.
template <class M>
CheckReport<typename M::Scalar> verify_flow(const Flow<M>& f, double tol = 1e-9) {
    using S = typename M::Scalar;
    validate_flow_arities(f);
    M ds = time_derivative(f.state_map);
    CheckReport<S> rep;
    rep.check = "flow";
    for (const S& t : f.tau) {
        std::vector<S> tv{t};
        std::vector<S> st = f.state_map.evaluate(std::span<const S>(tv));
        FlowPoint<S> pt;
        pt.t = t;
        pt.lhs = f.optimizer.apply(std::span<const S>(st));
        pt.rhs = ds.evaluate(std::span<const S>(tv));
        pt.pass = detail::vectors_close(pt.lhs, pt.rhs, tol);
        if (!pt.pass) rep.pass = false;
        rep.points.push_back(std::move(pt));
    }
    return rep;
}

// D_k[l . pi_0 . s] . t <= 0 for every t in tau and k = 1..n.
template <class M>
CheckReport<typename M::Scalar> check_descending(const Flow<M>& f, int n, double tol = 1e-9) {
    using S = typename M::Scalar;
    validate_flow_arities(f);
    if (n < 1) throw rdopt::domain_error("descent order must be >= 1");
    int sn = f.optimizer.state_arity;
    int k = f.optimizer.dimension;
    M g = compose(f.objective.map, compose(M::proj0(sn, (k - 1) * sn), f.state_map));
    CheckReport<S> rep;
    rep.check = "descending";
    M dk = g;
    for (int order = 1; order <= n; ++order) {
        dk = compose(forward_derivative(dk), pair_map(M::identity(1), M::ones(1, 1)));
        for (const S& t : f.tau) {
            std::vector<S> tv{t};
            FlowPoint<S> pt;
            pt.order = order;
            pt.t = t;
            pt.lhs = dk.evaluate(std::span<const S>(tv));
            pt.rhs = {S(0)};
            pt.pass = detail::scalar_nonpositive(pt.lhs[0], tol);
            if (!pt.pass) rep.pass = false;
            rep.points.push_back(std::move(pt));
        }
    }
    return rep;
}

// Gradient flows only: D_1[l . s] . t must equal -sum_i (dl/dx_i(s_t))^2,
// and that value is never positive (a negated sum of ring squares).
template <class M>
CheckReport<typename M::Scalar> inner_product_identity(const Flow<M>& f, double tol = 1e-9) {
    using S = typename M::Scalar;
    validate_flow_arities(f);
    int n = f.optimizer.state_arity;
    M grad = generalized_gradient(f.objective.map);
    if (f.optimizer.dimension != 1 || !f.optimizer.endo ||
        !detail::morphism_eq(*f.optimizer.endo, neg(grad)))
        throw rdopt::domain_error("inner-product identity requires a gradient flow (d = -R[l]_1)");

    M g = compose(f.objective.map, f.state_map);
    M dg = time_derivative(g);
    CheckReport<S> rep;
    rep.check = "inner-product";
    for (const S& t : f.tau) {
        std::vector<S> tv{t};
        std::vector<S> st = f.state_map.evaluate(std::span<const S>(tv));
        std::vector<S> gv = grad.evaluate(std::span<const S>(st));
        S rhs(0);
        for (int i = 0; i < n; ++i)
            rhs = S(rhs - gv[static_cast<std::size_t>(i)] * gv[static_cast<std::size_t>(i)]);
        FlowPoint<S> pt;
        pt.t = t;
        pt.lhs = dg.evaluate(std::span<const S>(tv));
        pt.rhs = {rhs};
        pt.pass = detail::scalar_close(pt.lhs[0], rhs, tol) && detail::scalar_nonpositive(rhs, tol);
        if (!pt.pass) rep.pass = false;
        rep.points.push_back(std::move(pt));
    }
    return rep;
}

// Earliest index i such that every later loss stays within delta of loss[i];
// -1 when no index qualifies. On multi-point lists the final sample alone is
// never accepted: it compares against nothing, and a sequence that only
// stabilizes vacuously at its last point has not settled.
template <Ring S>
int convergence_scan(std::span<const S> losses, const S& delta) {
    if (!(ring_cmp(delta, S(0)) == std::strong_ordering::greater))
        throw rdopt::domain_error("convergence threshold must be positive");
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (losses.size() > 1 && i + 1 == losses.size()) break;
        bool ok = true;
        for (std::size_t j = i + 1; j < losses.size() && ok; ++j) {
            S diff = S(losses[j] - losses[i]);
            if (ring_cmp(diff, delta) == std::strong_ordering::greater ||
                ring_cmp(S(-diff), delta) == std::strong_ordering::greater)
                ok = false;
        }
        if (ok) return static_cast<int>(i);
    }
    return -1;
}

template <class M>
ConvergenceReport<typename M::Scalar> check_convergence(const Flow<M>& f,
                                                        const typename M::Scalar& delta) {
    using S = typename M::Scalar;
    validate_flow_arities(f);
    int sn = f.optimizer.state_arity;
    int k = f.optimizer.dimension;
    M g = compose(f.objective.map, compose(M::proj0(sn, (k - 1) * sn), f.state_map));
    ConvergenceReport<S> rep;
    for (const S& t : f.tau) {
        std::vector<S> tv{t};
        rep.losses.push_back(g.evaluate(std::span<const S>(tv))[0]);
    }
    rep.index = convergence_scan(std::span<const S>(rep.losses), delta);
    rep.converged = rep.index >= 0;
    if (rep.converged) rep.t = f.tau[static_cast<std::size_t>(rep.index)];
    return rep;
}

// ---------------------------------------------------------------------------
// flow JSON (objective and state map in the domain's native serialization;
// optimizers are rebuilt from the method tag on load)

namespace detail {

template <class M>
std::string domain_name() {
    if constexpr (std::is_same_v<M, ExprMap>)
        return "smooth";
    else
        return std::string("poly-") + ring_traits<typename M::Scalar>::name;
}

} // namespace detail

template <class M>
nlohmann::ordered_json flow_to_json(const Flow<M>& f) {
    validate_flow_arities(f);
    nlohmann::ordered_json j;
    j["domain"] = detail::domain_name<M>();
    j["method"] = method_name(f.optimizer.method);
    j["arity"] = f.optimizer.state_arity;
    j["dimension"] = f.optimizer.dimension;
    if constexpr (std::is_same_v<M, ExprMap>) {
        j["objective"] = expr_map_to_json(f.objective.map);
        j["state_map"] = expr_map_to_json(f.state_map);
    } else {
        j["objective"] = poly_str(f.objective.map.component(0));
        nlohmann::ordered_json comps = nlohmann::ordered_json::array();
        for (const auto& c : f.state_map.components()) comps.push_back(poly_str(c));
        j["state_map"] = std::move(comps);
    }
    nlohmann::ordered_json tau = nlohmann::ordered_json::array();
    for (const auto& t : f.tau) tau.push_back(ring_str(t));
    j["tau"] = std::move(tau);
    return j;
}

template <class M>
Flow<M> flow_from_json(const nlohmann::json& j) {
    using S = typename M::Scalar;
    try {
        std::string domain = j.at("domain").get<std::string>();
        if (domain != detail::domain_name<M>())
            throw parse_error("flow domain is '" + domain + "', expected '" +
                              detail::domain_name<M>() + "'");
        auto method = method_from_string(j.at("method").get<std::string>());
        if (!method) throw parse_error("unknown optimizer method in flow");
        int n = j.at("arity").get<int>();
        int k = j.at("dimension").get<int>();
        if (n < 1 || k < 1) throw parse_error("flow arities must be positive");

        Flow<M> f;
        if constexpr (std::is_same_v<M, ExprMap>) {
            f.objective = Objective<M>{expr_map_from_json(j.at("objective")), std::nullopt};
            f.state_map = expr_map_from_json(j.at("state_map"));
        } else {
            f.objective = Objective<M>{
                M(n, {parse_poly<S>(j.at("objective").get<std::string>(), n)}), std::nullopt};
            std::vector<MultiPoly<S>> comps;
            for (const auto& cj : j.at("state_map"))
                comps.push_back(parse_poly<S>(cj.get<std::string>(), 1));
            f.state_map = M(1, std::move(comps));
        }
        f.optimizer = make_optimizer(*method, f.objective);
        if (f.optimizer.state_arity != n || f.optimizer.dimension != k)
            throw parse_error("flow arity fields disagree with the reconstructed optimizer");
        for (const auto& tj : j.at("tau")) f.tau.push_back(ring_traits<S>::parse(tj.get<std::string>()));
        validate_flow_arities(f);
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad flow JSON: ") + e.what());
    }
}

} // namespace rdopt
