#pragma once

// Generalized optimizers built from the reverse-derivative combinator:
//
//   gradient descent  -R[l]_1 : A -> A                        (dimension 1)
//   momentum          <pi_1, -pi_1 - (R[l]_1 . pi_0)>         (dimension 2)
//   Adagrad           d(x,y) = (-grad l(x)/sqrt(y), grad^2)   (dimension 2, float only)
//   Newton            -R[R[l]_1^{-1}] . <R[l]_1, R[l]_1>      (dimension 1)
//
// plus the Euler iteration engine s' = s + alpha * d(s), integer sign-step
// descent, and executable conjugacy checks: an optimizer family u is
// invariant to an invertible linear f precisely when the trajectory of
// u(l . f) started at f_k^{-1} x0 tracks f_k^{-1} of the trajectory of u(l).
//
// Adagrad divides by sqrt(y), which no ring morphism expresses, so its
// optimizer carries an evaluation closure instead of a symbolic endomorphism;
// ring-domain requests are rejected.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rdopt/derived.hpp"
#include "rdopt/errors.hpp"
#include "rdopt/expr.hpp"
#include "rdopt/polymap.hpp"
#include "rdopt/rng.hpp"

namespace rdopt {

enum class Method { Gd, Momentum, Adagrad, Newton };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::Gd: return "gd";
        case Method::Momentum: return "momentum";
        case Method::Adagrad: return "adagrad";
        case Method::Newton: return "newton";
    }
    return "?";
}

inline std::optional<Method> method_from_string(const std::string& s) {
    for (Method m : {Method::Gd, Method::Momentum, Method::Adagrad, Method::Newton})
        if (s == method_name(m)) return m;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// objectives

template <class M>
struct Objective {
    M map;                          // A -> X, codomain arity 1
    std::optional<M> grad_inverse;  // inverse of R[l]_1 : A -> A, when it exists
};

namespace detail {

template <Ring R>
bool morphism_eq(const PolyMap<R>& a, const PolyMap<R>& b) {
    return a == b;
}

inline bool morphism_eq(const ExprMap& a, const ExprMap& b) {
    return approx_equal(a, b, 1e-9, 20).ok;
}

template <class M, Ring R>
M linear_to_morphism(const LinearPolyMap<R>& f) {
    if constexpr (std::is_same_v<M, PolyMap<R>>) {
        return f.to_polymap();
    } else {
        static_assert(std::is_same_v<R, double>, "expression maps are float-valued");
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(f.rows()),
                                              std::vector<double>(static_cast<std::size_t>(f.cols())));
        for (int i = 0; i < f.rows(); ++i)
            for (int j = 0; j < f.cols(); ++j)
                rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = f.at(i, j);
        return linear_expr_map(rows, f.cols());
    }
}

} // namespace detail

// Checks the objective's arities and, when a gradient inverse is supplied,
// both inverse identities against R[l]_1.
template <class M>
void validate_objective(const Objective<M>& l) {
    if (l.map.codomain() != 1) throw objective_error("objective must have codomain arity 1");
    if (!l.grad_inverse) return;
    int n = l.map.domain();
    if (l.grad_inverse->domain() != n || l.grad_inverse->codomain() != n)
        throw objective_error("gradient inverse must be an endomorphism of the objective's domain");
    M grad = generalized_gradient(l.map);
    if (!detail::morphism_eq(compose(*l.grad_inverse, grad), M::identity(n)) ||
        !detail::morphism_eq(compose(grad, *l.grad_inverse), M::identity(n)))
        throw objective_error("supplied gradient inverse does not invert R[l]_1");
}

// ---------------------------------------------------------------------------
// gradient inversion for affine gradients (quadratic objectives)

// Exact path: read the coefficient matrix H and offset c off the affine
// gradient, invert H, and return z |-> H^{-1}(z - c).
template <Ring R>
    requires(!std::is_same_v<R, Int>)
PolyMap<R> invert_affine_map(const PolyMap<R>& grad) {
    int n = grad.domain();
    if (grad.codomain() != n) throw objective_error("gradient must be an endomorphism");
    LinearPolyMap<R> h(n, n);
    std::vector<R> c(static_cast<std::size_t>(n), R(0));
    for (int i = 0; i < n; ++i) {
        const auto& comp = grad.components()[static_cast<std::size_t>(i)];
        if (comp.total_degree() > 1)
            throw objective_error("gradient is not affine; supply grad_inverse explicitly");
        c[static_cast<std::size_t>(i)] = comp.coefficient(ExpVec(static_cast<std::size_t>(n), 0));
        for (int j = 0; j < n; ++j) {
            ExpVec e(static_cast<std::size_t>(n), 0);
            e[static_cast<std::size_t>(j)] = 1;
            h.at(i, j) = comp.coefficient(e);
        }
    }
    LinearPolyMap<R> hinv = inverse(h); // throws domain_error when singular
    std::vector<R> shift = hinv.apply(std::span<const R>(c));
    std::vector<MultiPoly<R>> comps;
    for (int i = 0; i < n; ++i) {
        MultiPoly<R> p(n);
        for (int j = 0; j < n; ++j) {
            ExpVec e(static_cast<std::size_t>(n), 0);
            e[static_cast<std::size_t>(j)] = 1;
            p.add_term(e, hinv.at(i, j));
        }
        p.add_term(ExpVec(static_cast<std::size_t>(n), 0), R(-shift[static_cast<std::size_t>(i)]));
        comps.push_back(std::move(p));
    }
    return PolyMap<R>(n, std::move(comps));
}

// Numeric path for expression maps: probe the gradient at 0 and at the basis
// points to recover H and c, validate affinity at further points, invert.
inline ExprMap invert_affine_map(const ExprMap& grad) {
    int n = grad.domain();
    if (grad.codomain() != n) throw objective_error("gradient must be an endomorphism");
    std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
    std::vector<double> c = grad.evaluate(origin);
    LinearPolyMap<double> h(n, n);
    for (int j = 0; j < n; ++j) {
        std::vector<double> e(static_cast<std::size_t>(n), 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        auto col = grad.evaluate(e);
        for (int i = 0; i < n; ++i)
            h.at(i, j) = col[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)];
    }
    // affinity check: grad(x) == Hx + c at quasi-random probe points
    for (int k = 0; k < 8; ++k) {
        auto x = quasi_random_point(n, k);
        auto gx = grad.evaluate(std::span<const double>(x));
        auto hx = h.apply(std::span<const double>(x));
        for (int i = 0; i < n; ++i) {
            double want = hx[static_cast<std::size_t>(i)] + c[static_cast<std::size_t>(i)];
            double got = gx[static_cast<std::size_t>(i)];
            if (std::fabs(want - got) > 1e-7 * std::max({1.0, std::fabs(want), std::fabs(got)}))
                throw objective_error("gradient is not affine; supply grad_inverse explicitly");
        }
    }
    LinearPolyMap<double> hinv = inverse(h);
    std::vector<double> shift = hinv.apply(std::span<const double>(c));
    ExprMap lin = detail::linear_to_morphism<ExprMap>(hinv);
    std::vector<ExprPtr> outs;
    for (int i = 0; i < n; ++i)
        outs.push_back(make_add(lin.output(i), make_cst(-shift[static_cast<std::size_t>(i)])));
    return ExprMap(n, std::move(outs));
}

// Fills in grad_inverse for a quadratic objective when absent.
template <class M>
Objective<M> auto_grad_inverse(Objective<M> l) {
    if (l.map.codomain() != 1) throw objective_error("objective must have codomain arity 1");
    if (!l.grad_inverse) {
        if constexpr (std::is_same_v<typename M::Scalar, Int>) {
            // Exact inversion needs division; integer objectives must supply
            // the inverse explicitly.
            throw objective_error("cannot invert an integer gradient; supply grad_inverse");
        } else {
            l.grad_inverse = invert_affine_map(generalized_gradient(l.map));
        }
    }
    validate_objective(l);
    return l;
}

// ---------------------------------------------------------------------------
// the optimizers

template <class M>
struct GenOptimizer {
    using Scalar = typename M::Scalar;
    int state_arity = 0; // arity of A
    int dimension = 1;   // k; the endomorphism acts on A^k
    Method method = Method::Gd;
    std::optional<M> endo; // symbolic form, absent for Adagrad
    std::function<std::vector<Scalar>(std::span<const Scalar>)> eval;

    std::vector<Scalar> apply(std::span<const Scalar> state) const {
        if (static_cast<int>(state.size()) != state_arity * dimension)
            throw arity_error("optimizer state has wrong arity");
        return eval(state);
    }
};

namespace detail {

template <class M>
void attach_endo_eval(GenOptimizer<M>& opt) {
    opt.eval = [e = *opt.endo](std::span<const typename M::Scalar> s) { return e.evaluate(s); };
}

} // namespace detail

template <class M>
GenOptimizer<M> gd_functor(const Objective<M>& l) {
    validate_objective(l);
    GenOptimizer<M> opt;
    opt.state_arity = l.map.domain();
    opt.dimension = 1;
    opt.method = Method::Gd;
    opt.endo = neg(generalized_gradient(l.map));
    detail::attach_endo_eval(opt);
    return opt;
}

template <class M>
GenOptimizer<M> momentum_functor(const Objective<M>& l) {
    validate_objective(l);
    int n = l.map.domain();
    M grad = generalized_gradient(l.map);
    GenOptimizer<M> opt;
    opt.state_arity = n;
    opt.dimension = 2;
    opt.method = Method::Momentum;
    opt.endo = pair_map(M::proj1(n, n),
                        neg(add(M::proj1(n, n), compose(grad, M::proj0(n, n)))));
    detail::attach_endo_eval(opt);
    return opt;
}

template <Ring R>
GenOptimizer<PolyMap<R>> adagrad_optimizer(const Objective<PolyMap<R>>&) {
    throw rdopt::domain_error(
        "adagrad requires the standard (float) domain: square root is not a ring operation");
}

inline GenOptimizer<ExprMap> adagrad_optimizer(const Objective<ExprMap>& l) {
    validate_objective(l);
    int n = l.map.domain();
    ExprMap grad = generalized_gradient(l.map);
    GenOptimizer<ExprMap> opt;
    opt.state_arity = n;
    opt.dimension = 2;
    opt.method = Method::Adagrad;
    opt.eval = [grad, n](std::span<const double> s) {
        auto g = grad.evaluate(s.first(static_cast<std::size_t>(n)));
        std::vector<double> out(static_cast<std::size_t>(2 * n));
        for (int i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] =
                -g[static_cast<std::size_t>(i)] / std::sqrt(s[static_cast<std::size_t>(n + i)]);
            out[static_cast<std::size_t>(n + i)] =
                g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
        }
        return out;
    };
    return opt;
}

template <class M>
GenOptimizer<M> newton_functor(const Objective<M>& l) {
    if (!l.grad_inverse)
        throw objective_error("newton requires an objective with an invertible gradient");
    validate_objective(l);
    int n = l.map.domain();
    M grad = generalized_gradient(l.map);
    GenOptimizer<M> opt;
    opt.state_arity = n;
    opt.dimension = 1;
    opt.method = Method::Newton;
    opt.endo = neg(compose(reverse_derivative(*l.grad_inverse), pair_map(grad, grad)));
    detail::attach_endo_eval(opt);
    return opt;
}

// Dispatch; Newton objectives without an explicit inverse get the affine
// auto-inversion (quadratic objectives).
template <class M>
GenOptimizer<M> make_optimizer(Method method, const Objective<M>& l) {
    switch (method) {
        case Method::Gd: return gd_functor(l);
        case Method::Momentum: return momentum_functor(l);
        case Method::Adagrad: return adagrad_optimizer(l);
        case Method::Newton:
            return newton_functor(l.grad_inverse ? l : auto_grad_inverse(l));
    }
    throw rdopt::domain_error("unknown method");
}

// ---------------------------------------------------------------------------
// iteration

enum class TrajStatus { Ok, Diverged };

template <class S>
struct Trajectory {
    std::vector<std::vector<S>> states; // states[t], length k*n
    std::vector<S> losses;              // l at the first n coordinates of states[t]
    S step_size{0};
    Method method = Method::Gd;
    TrajStatus status = TrajStatus::Ok;
};

namespace detail {

inline bool state_ok(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x) || std::fabs(x) > 1e12) return false;
    return true;
}

template <Ring S>
bool state_ok(std::span<const S>) {
    return true; // exact arithmetic cannot diverge numerically
}

} // namespace detail

// Euler steps s' = s + alpha * d(s). Float trajectories stop with Diverged
// status when a state leaves [-1e12, 1e12] or turns non-finite; the partial
// trajectory up to the last valid state is returned.
template <class M>
Trajectory<typename M::Scalar> iterate(const GenOptimizer<M>& opt, const Objective<M>& l,
                                       std::vector<typename M::Scalar> x0,
                                       const typename M::Scalar& alpha, int steps) {
    using S = typename M::Scalar;
    int width = opt.state_arity * opt.dimension;
    if (static_cast<int>(x0.size()) != width)
        throw arity_error("initial state length must be state_arity * dimension");
    if (l.map.domain() != opt.state_arity || l.map.codomain() != 1)
        throw arity_error("objective must map the optimizer's state space to arity 1");
    if (steps < 0) throw rdopt::domain_error("step count must be >= 0");

    Trajectory<S> tr;
    tr.step_size = alpha;
    tr.method = opt.method;
    std::vector<S> cur = std::move(x0);
    for (int t = 0; t <= steps; ++t) {
        if (!detail::state_ok(std::span<const S>(cur))) {
            tr.status = TrajStatus::Diverged;
            return tr;
        }
        S loss = l.map.evaluate(std::span<const S>(cur.data(), static_cast<std::size_t>(opt.state_arity)))[0];
        if constexpr (std::is_same_v<S, double>) {
            if (!std::isfinite(loss)) {
                tr.status = TrajStatus::Diverged;
                return tr;
            }
        }
        tr.states.push_back(cur);
        tr.losses.push_back(std::move(loss));
        if (t == steps) break;
        std::vector<S> d = opt.apply(std::span<const S>(cur));
        for (int i = 0; i < width; ++i)
            cur[static_cast<std::size_t>(i)] =
                S(cur[static_cast<std::size_t>(i)] + alpha * d[static_cast<std::size_t>(i)]);
    }
    return tr;
}

// One integer descent step: x - sign(grad l(x)) componentwise, sign(0) = 0.
inline std::vector<Int> integer_gd_step(const PolyMap<Int>& l, std::span<const Int> x) {
    if (l.codomain() != 1) throw objective_error("objective must have codomain arity 1");
    PolyMap<Int> grad = generalized_gradient(l);
    std::vector<Int> g = grad.evaluate(x);
    std::vector<Int> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= Int(sgn(g[i]));
    return out;
}

// ---------------------------------------------------------------------------
// trajectory CSV

template <class S>
std::string trajectory_csv(const Trajectory<S>& tr) {
    std::string out = "t";
    std::size_t width = tr.states.empty() ? 0 : tr.states.front().size();
    for (std::size_t i = 1; i <= width; ++i) out += ",x" + std::to_string(i);
    out += ",loss\n";
    for (std::size_t t = 0; t < tr.states.size(); ++t) {
        out += std::to_string(t);
        for (const auto& v : tr.states[t]) out += "," + ring_str(v);
        out += "," + ring_str(tr.losses[t]) + "\n";
    }
    return out;
}

// Re-parses the CSV written above (comment lines starting with '#' are
// skipped). Step size and method are not part of the file; states and losses
// round-trip exactly.
template <Ring S>
Trajectory<S> parse_trajectory_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        rows.push_back(line);
    }
    if (rows.empty()) throw parse_error("empty trajectory CSV");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (true) {
            std::size_t pos = s.find(',', start);
            if (pos == std::string::npos) {
                out.push_back(s.substr(start));
                break;
            }
            out.push_back(s.substr(start, pos - start));
            start = pos + 1;
        }
        return out;
    };
    auto header = split(rows.front());
    if (header.size() < 2 || header.front() != "t" || header.back() != "loss")
        throw parse_error("trajectory CSV header must be t,x1..xN,loss");
    std::size_t width = header.size() - 2;
    for (std::size_t i = 1; i <= width; ++i)
        if (header[i] != "x" + std::to_string(i))
            throw parse_error("trajectory CSV header must be t,x1..xN,loss");

    Trajectory<S> tr;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        auto cells = split(rows[r]);
        if (cells.size() != header.size()) throw parse_error("trajectory CSV row width mismatch");
        if (cells.front() != std::to_string(r - 1))
            throw parse_error("trajectory CSV time column must count 0,1,2,...");
        std::vector<S> state;
        for (std::size_t i = 1; i <= width; ++i) state.push_back(ring_traits<S>::parse(cells[i]));
        tr.states.push_back(std::move(state));
        tr.losses.push_back(ring_traits<S>::parse(cells.back()));
    }
    return tr;
}

// ---------------------------------------------------------------------------
// conjugacy: u(l . f) from f_k^{-1} x0 must track f_k^{-1} of u(l) from x0

template <class S>
struct ConjugacyReport {
    bool holds = false;
    int first_divergence_step = -1; // -1 when the trajectories agree
    Trajectory<S> x_traj;           // u(l) from x0
    Trajectory<S> y_traj;           // u(l . f) from f_k^{-1} x0
    std::string detail;
};

namespace detail {

template <Ring S>
bool scalar_close(const S& a, const S& b, double tol) {
    if constexpr (std::is_same_v<S, double>) {
        return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
    } else {
        (void)tol;
        return a == b;
    }
}

template <Ring S>
std::vector<S> blockwise_apply(const LinearPolyMap<S>& m, std::span<const S> state, int blocks) {
    std::vector<S> out;
    out.reserve(state.size());
    int n = m.cols();
    for (int b = 0; b < blocks; ++b) {
        auto part = m.apply(state.subspan(static_cast<std::size_t>(b * n), static_cast<std::size_t>(n)));
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

} // namespace detail

template <class M>
ConjugacyReport<typename M::Scalar> check_invariance(Method method, const Objective<M>& l,
                                                     const LinearPolyMap<typename M::Scalar>& f,
                                                     std::vector<typename M::Scalar> x0,
                                                     const typename M::Scalar& alpha, int steps,
                                                     double tol = 1e-9) {
    using S = typename M::Scalar;
    int n = l.map.domain();
    if (f.rows() != n || f.cols() != n)
        throw arity_error("transformation must be a square matrix on the objective's domain");
    LinearPolyMap<S> finv = inverse(f);

    GenOptimizer<M> ux = make_optimizer(method, l);
    Objective<M> lf{compose(l.map, detail::linear_to_morphism<M>(f)), std::nullopt};
    GenOptimizer<M> uy = make_optimizer(method, lf);

    int k = ux.dimension;
    ConjugacyReport<S> rep;
    std::vector<S> y0 = detail::blockwise_apply(finv, std::span<const S>(x0), k);
    rep.x_traj = iterate(ux, l, x0, alpha, steps);
    rep.y_traj = iterate(uy, lf, std::move(y0), alpha, steps);

    std::size_t compared = std::min(rep.x_traj.states.size(), rep.y_traj.states.size());
    rep.holds = rep.x_traj.status == TrajStatus::Ok && rep.y_traj.status == TrajStatus::Ok;
    if (!rep.holds) rep.detail = "a trajectory diverged before the comparison finished";
    for (std::size_t t = 0; t < compared; ++t) {
        std::vector<S> want =
            detail::blockwise_apply(finv, std::span<const S>(rep.x_traj.states[t]), k);
        bool match = true;
        for (std::size_t i = 0; i < want.size(); ++i)
            if (!detail::scalar_close(rep.y_traj.states[t][i], want[i], tol)) match = false;
        if (!match) {
            rep.holds = false;
            rep.first_divergence_step = static_cast<int>(t);
            rep.detail = "y_" + std::to_string(t) + " != f_k^{-1}(x_" + std::to_string(t) + ")";
            break;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// transformation generators for the invariance experiments

// Signed permutation: exactly orthogonal over any ring.
template <Ring R>
LinearPolyMap<R> random_signed_permutation(Rng& rng, int n) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
    LinearPolyMap<R> m(n, n);
    for (int i = 0; i < n; ++i)
        m.at(i, perm[static_cast<std::size_t>(i)]) = rng.coin() ? R(1) : R(-1);
    return m;
}

// Plane rotation with cosine/sine from a Pythagorean triple: exactly
// orthogonal in the rational domain.
template <Ring R>
    requires(!std::is_same_v<R, Int>)
LinearPolyMap<R> pythagorean_rotation(int n, int i, int j, int triple, bool flip) {
    static constexpr int triples[4][3] = {{3, 4, 5}, {5, 12, 13}, {8, 15, 17}, {20, 21, 29}};
    if (i == j || i < 0 || j < 0 || i >= n || j >= n)
        throw rdopt::domain_error("rotation plane indices out of range");
    const int* t = triples[((triple % 4) + 4) % 4];
    R c = R(R(t[0]) / R(t[2]));
    R s = R(R(t[1]) / R(t[2]));
    if (flip) s = R(-s);
    LinearPolyMap<R> m = LinearPolyMap<R>::identity(n);
    m.at(i, i) = c;
    m.at(j, j) = c;
    m.at(i, j) = R(-s);
    m.at(j, i) = s;
    return m;
}

// Random orthogonal map: a signed permutation composed with random plane
// rotations (exact in the rational domain).
template <Ring R>
    requires(!std::is_same_v<R, Int>)
LinearPolyMap<R> random_orthogonal(Rng& rng, int n) {
    LinearPolyMap<R> m = random_signed_permutation<R>(rng, n);
    if (n < 2) return m;
    int rots = static_cast<int>(rng.range(1, 3));
    for (int r = 0; r < rots; ++r) {
        int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
        if (j >= i) ++j;
        m = m * pythagorean_rotation<R>(n, i, j, static_cast<int>(rng.below(4)), rng.coin());
    }
    return m;
}

// Random invertible non-orthogonal map: a product of unit triangular matrices
// with small integer entries (determinant 1, exactly invertible); resamples
// until genuinely non-orthogonal.
template <Ring R>
LinearPolyMap<R> random_invertible_non_orthogonal(Rng& rng, int n) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        LinearPolyMap<R> lo = LinearPolyMap<R>::identity(n);
        LinearPolyMap<R> up = LinearPolyMap<R>::identity(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) {
                lo.at(i, j) = R(rng.range(-2, 2));
                up.at(j, i) = R(rng.range(-2, 2));
            }
        LinearPolyMap<R> m = lo * up;
        if (!m.is_orthogonal()) return m;
    }
    throw rdopt::domain_error("failed to sample a non-orthogonal invertible map");
}

} // namespace rdopt
