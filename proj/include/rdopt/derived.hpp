#pragma once

// Derived differential structure, generic over any morphism type M that
// provides the product-category combinators (identity/zero/ones/proj as
// statics, compose/pair_map/product_map/add/neg/reverse_derivative as free
// functions). The forward derivative is built from two applications of the
// reverse combinator:
//
//   D[f] = pi_1 . R[R[f]] . (<id, 0> x id) : (n+n) -> m
//
// and the generalized gradient and n-derivative are the corresponding
// composites with the constant-one map.

#include <string>
#include <vector>

#include "rdopt/errors.hpp"
#include "rdopt/polymap.hpp"

namespace rdopt {

template <class M>
M forward_derivative(const M& f) {
    int n = f.domain();
    int m = f.codomain();
    M rrf = reverse_derivative(reverse_derivative(f));
    M pre = product_map(pair_map(M::identity(n), M::zero(n, m)), M::identity(n));
    return compose(M::proj1(n, m), compose(rrf, pre));
}

// R[l]_1 = R[l] . <id, 1> : n -> n for a loss l : n -> 1; equals the tuple of
// formal partial derivatives.
template <class M>
M generalized_gradient(const M& l) {
    if (l.codomain() != 1) throw arity_error("gradient requires codomain arity 1");
    int n = l.domain();
    return compose(reverse_derivative(l), pair_map(M::identity(n), M::ones(n, 1)));
}

// D_1[f] = D[f] . <id, 1>; D_k[f] = D_1[D_{k-1}[f]]. Endomorphisms of the
// 1-dimensional object only.
template <class M>
M generalized_n_derivative(const M& f, int n) {
    if (f.domain() != 1 || f.codomain() != 1)
        throw arity_error("n-derivative requires a 1 -> 1 morphism");
    if (n < 1) throw domain_error("n-derivative order must be >= 1");
    M cur = f;
    M probe = pair_map(M::identity(1), M::ones(1, 1));
    for (int k = 0; k < n; ++k) cur = compose(forward_derivative(cur), probe);
    return cur;
}

// ---------------------------------------------------------------------------
// n-smoothness witness for univariate integer/rational polynomials.
//
// Checks D_k[f](t) >= 0 for k = 1..n at every sample point of [t1, t2]; when
// that holds, the conclusion f(t1) <= f(t2) is asserted. Independently reports
// the shifted (binomial) coefficients c'_k with f(t) = sum c'_k (t - t1)^k,
// which satisfy c'_k * k! = D_k[f](t1) and are non-negative whenever the
// corresponding D_k[f](t1) are.

template <Ring R>
struct SmoothWitnessReport {
    bool applicable = false;     // all sampled D_k values non-negative
    bool pass = false;           // applicable and f(t1) <= f(t2)
    bool certificate_ok = false; // c'_k * k! == D_k[f](t1) for k = 1..n
    std::vector<R> shift_coeffs; // c'_0 .. c'_deg
    std::vector<std::vector<R>> derivative_values; // [k-1][sample]
    R f_t1{0}, f_t2{0};
    std::string note;
};

template <Ring R>
SmoothWitnessReport<R> is_n_smooth_witness(const PolyMap<R>& f, int n, const R& t1, const R& t2,
                                           std::span<const R> samples) {
    if (f.domain() != 1 || f.codomain() != 1)
        throw arity_error("smoothness witness requires a 1 -> 1 morphism");
    if (ring_cmp(t1, t2) == std::strong_ordering::greater)
        throw domain_error("invalid interval: t1 > t2");
    for (const auto& s : samples)
        if (ring_cmp(s, t1) == std::strong_ordering::less ||
            ring_cmp(t2, s) == std::strong_ordering::less)
            throw domain_error("sample point outside [t1, t2]");

    SmoothWitnessReport<R> rep;
    const R zero(0);
    std::vector<R> t1v{t1}, t2v{t2};
    rep.f_t1 = f.component(0).evaluate(std::span<const R>(t1v));
    rep.f_t2 = f.component(0).evaluate(std::span<const R>(t2v));

    rep.applicable = true;
    std::vector<R> dk_at_t1;
    for (int k = 1; k <= n; ++k) {
        PolyMap<R> dk = generalized_n_derivative(f, k);
        std::vector<R> row;
        for (const auto& s : samples) {
            std::vector<R> pt{s};
            R v = dk.component(0).evaluate(std::span<const R>(pt));
            if (ring_cmp(v, zero) == std::strong_ordering::less) rep.applicable = false;
            row.push_back(std::move(v));
        }
        rep.derivative_values.push_back(std::move(row));
        dk_at_t1.push_back(dk.component(0).evaluate(std::span<const R>(t1v)));
    }

    // Shifted coefficients via exact Taylor shift: substitute t = t1 + u.
    MultiPoly<R> shift(1);
    shift.add_term(ExpVec{0}, t1);
    shift.add_term(ExpVec{1}, R(1));
    std::vector<MultiPoly<R>> arg{shift};
    MultiPoly<R> shifted = f.component(0).substitute(std::span<const MultiPoly<R>>(arg));
    int deg = shifted.total_degree();
    for (int k = 0; k <= std::max(deg, 0); ++k)
        rep.shift_coeffs.push_back(shifted.coefficient(ExpVec{static_cast<std::uint32_t>(k)}));

    rep.certificate_ok = true;
    for (int k = 1; k <= n; ++k) {
        R ck = k < static_cast<int>(rep.shift_coeffs.size()) ? rep.shift_coeffs[static_cast<std::size_t>(k)]
                                                             : R(0);
        R lhs = R(ck * ring_factorial<R>(static_cast<unsigned>(k)));
        if (!(lhs == dk_at_t1[static_cast<std::size_t>(k - 1)])) rep.certificate_ok = false;
    }

    if (!rep.applicable) {
        rep.pass = false;
        rep.note = "a sampled derivative value is negative; monotonicity not implied";
    } else {
        rep.pass = ring_cmp(rep.f_t1, rep.f_t2) != std::strong_ordering::greater;
        if (!rep.pass) rep.note = "sampled derivatives non-negative but f(t1) > f(t2)";
    }
    return rep;
}

} // namespace rdopt
