#pragma once

// Tuples of polynomials as morphisms n -> m, with the product-category
// combinators (identity, projections, pairing, product, zero, addition) and
// the reverse derivative combinator. Reverse of P : n -> m is the map
// (n+m) -> n whose j-th component is sum_i dP_i/dx_j(x) * x'_i, where
// x' names the trailing m cotangent inputs.

#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "rdopt/errors.hpp"
#include "rdopt/multipoly.hpp"

namespace rdopt {

template <Ring R>
class PolyMap {
public:
    using Scalar = R;
    using Poly = MultiPoly<R>;

    PolyMap() = default;
    PolyMap(int domain, std::vector<Poly> components)
        : dom_(domain), comps_(std::move(components)) {
        if (domain < 0) throw arity_error("negative domain arity");
        for (const auto& c : comps_)
            if (c.num_vars() != dom_) throw arity_error("component arity mismatch");
    }

    int domain() const { return dom_; }
    int codomain() const { return static_cast<int>(comps_.size()); }
    const std::vector<Poly>& components() const { return comps_; }
    const Poly& component(int i) const { return comps_.at(static_cast<std::size_t>(i)); }

    bool operator==(const PolyMap& o) const = default;

    std::vector<R> evaluate(std::span<const R> point) const {
        if (static_cast<int>(point.size()) != dom_) throw arity_error("evaluation point arity mismatch");
        std::vector<R> out;
        out.reserve(comps_.size());
        for (const auto& c : comps_) out.push_back(c.evaluate(point));
        return out;
    }

    static PolyMap identity(int n) {
        std::vector<Poly> comps;
        comps.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) comps.push_back(Poly::variable(n, i));
        return PolyMap(n, std::move(comps));
    }

    static PolyMap zero(int n, int m) {
        return PolyMap(n, std::vector<Poly>(static_cast<std::size_t>(m), Poly(n)));
    }

    // The constant-one map into every coordinate.
    static PolyMap ones(int n, int m) {
        std::vector<Poly> comps(static_cast<std::size_t>(m), Poly::constant(n, R(1)));
        return PolyMap(n, std::move(comps));
    }

    static PolyMap constants(int n, std::vector<R> values) {
        std::vector<Poly> comps;
        comps.reserve(values.size());
        for (const auto& v : values) comps.push_back(Poly::constant(n, v));
        return PolyMap(n, std::move(comps));
    }

    // First-block projection (n+m) -> n.
    static PolyMap proj0(int n, int m) {
        std::vector<Poly> comps;
        comps.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) comps.push_back(Poly::variable(n + m, i));
        return PolyMap(n + m, std::move(comps));
    }

    // Second-block projection (n+m) -> m.
    static PolyMap proj1(int n, int m) {
        std::vector<Poly> comps;
        comps.reserve(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) comps.push_back(Poly::variable(n + m, n + i));
        return PolyMap(n + m, std::move(comps));
    }

private:
    int dom_ = 0;
    std::vector<Poly> comps_;
};

template <Ring R>
PolyMap<R> terminal_map(int n) {
    return PolyMap<R>(n, {});
}

template <Ring R>
PolyMap<R> compose(const PolyMap<R>& g, const PolyMap<R>& f) {
    if (g.domain() != f.codomain()) throw arity_error("compose: inner codomain != outer domain");
    std::vector<MultiPoly<R>> comps;
    comps.reserve(static_cast<std::size_t>(g.codomain()));
    for (const auto& c : g.components()) {
        MultiPoly<R> s = c.substitute(std::span<const MultiPoly<R>>(f.components()));
        // Substituting through a 0-ary middle object loses the domain arity.
        if (s.num_vars() != f.domain()) s = s.pad(f.domain(), 0);
        comps.push_back(std::move(s));
    }
    return PolyMap<R>(f.domain(), std::move(comps));
}

template <Ring R>
PolyMap<R> pair_map(const PolyMap<R>& f, const PolyMap<R>& g) {
    if (f.domain() != g.domain()) throw arity_error("pair: domain mismatch");
    std::vector<MultiPoly<R>> comps = f.components();
    comps.insert(comps.end(), g.components().begin(), g.components().end());
    return PolyMap<R>(f.domain(), std::move(comps));
}

template <Ring R>
PolyMap<R> product_map(const PolyMap<R>& f, const PolyMap<R>& g) {
    int n = f.domain() + g.domain();
    std::vector<MultiPoly<R>> comps;
    comps.reserve(static_cast<std::size_t>(f.codomain() + g.codomain()));
    for (const auto& c : f.components()) comps.push_back(c.pad(n, 0));
    for (const auto& c : g.components()) comps.push_back(c.pad(n, f.domain()));
    return PolyMap<R>(n, std::move(comps));
}

template <Ring R>
PolyMap<R> add(const PolyMap<R>& f, const PolyMap<R>& g) {
    if (f.domain() != g.domain() || f.codomain() != g.codomain())
        throw arity_error("add: arity mismatch");
    std::vector<MultiPoly<R>> comps;
    comps.reserve(static_cast<std::size_t>(f.codomain()));
    for (int i = 0; i < f.codomain(); ++i) comps.push_back(f.component(i) + g.component(i));
    return PolyMap<R>(f.domain(), std::move(comps));
}

template <Ring R>
PolyMap<R> neg(const PolyMap<R>& f) {
    std::vector<MultiPoly<R>> comps;
    comps.reserve(static_cast<std::size_t>(f.codomain()));
    for (const auto& c : f.components()) comps.push_back(-c);
    return PolyMap<R>(f.domain(), std::move(comps));
}

// Injections as pairings: iota0 = <id, 0> : n -> n+m, iota1 = <0, id> : m -> n+m.
template <Ring R>
PolyMap<R> iota0(int n, int m) {
    return pair_map(PolyMap<R>::identity(n), PolyMap<R>::zero(n, m));
}

template <Ring R>
PolyMap<R> iota1(int n, int m) {
    return pair_map(PolyMap<R>::zero(m, n), PolyMap<R>::identity(m));
}

// Reverse derivative combinator: R[P] : (n+m) -> n.
template <Ring R>
PolyMap<R> reverse_derivative(const PolyMap<R>& f) {
    int n = f.domain();
    int m = f.codomain();
    std::vector<MultiPoly<R>> comps;
    comps.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        MultiPoly<R> acc(n + m);
        for (int i = 0; i < m; ++i) {
            MultiPoly<R> partial = f.component(i).formal_partial(j).pad(n + m, 0);
            acc = acc + partial * MultiPoly<R>::variable(n + m, n + i);
        }
        comps.push_back(std::move(acc));
    }
    return PolyMap<R>(n + m, std::move(comps));
}

// True when every component is a sum of degree-exactly-1 terms.
template <Ring R>
bool is_linear(const PolyMap<R>& f) {
    for (const auto& c : f.components())
        for (const auto& [e, coeff] : c.terms())
            if (detail::term_total_degree(e) != 1) return false;
    return true;
}

template <Ring R>
std::string polymap_str(const PolyMap<R>& f) {
    std::string out = "(";
    for (int i = 0; i < f.codomain(); ++i) {
        if (i) out += "; ";
        out += poly_str(f.component(i));
    }
    out += ")";
    return out;
}

// ---------------------------------------------------------------------------
// Linear maps as matrices (rows x cols acting on column points), the dagger
// (transpose), and exact inversion over a field scalar.

template <Ring R>
class LinearPolyMap {
public:
    LinearPolyMap() = default;
    LinearPolyMap(int rows, int cols, R fill = R(0))
        : rows_(rows), cols_(cols),
          m_(static_cast<std::size_t>(rows), std::vector<R>(static_cast<std::size_t>(cols), fill)) {}

    static LinearPolyMap identity(int n) {
        LinearPolyMap r(n, n);
        for (int i = 0; i < n; ++i) r.at(i, i) = R(1);
        return r;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    R& at(int i, int j) { return m_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    const R& at(int i, int j) const { return m_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

    bool operator==(const LinearPolyMap& o) const = default;

    LinearPolyMap dagger() const {
        LinearPolyMap r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
        return r;
    }

    friend LinearPolyMap operator*(const LinearPolyMap& a, const LinearPolyMap& b) {
        if (a.cols_ != b.rows_) throw arity_error("matrix product shape mismatch");
        LinearPolyMap r(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k)
                for (int j = 0; j < b.cols_; ++j)
                    r.at(i, j) = R(r.at(i, j) + a.at(i, k) * b.at(k, j));
        return r;
    }

    std::vector<R> apply(std::span<const R> x) const {
        if (static_cast<int>(x.size()) != cols_) throw arity_error("matrix apply arity mismatch");
        std::vector<R> out(static_cast<std::size_t>(rows_), R(0));
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                out[static_cast<std::size_t>(i)] =
                    R(out[static_cast<std::size_t>(i)] + at(i, j) * x[static_cast<std::size_t>(j)]);
        return out;
    }

    bool is_orthogonal() const {
        if (rows_ != cols_) return false;
        return dagger() * *this == identity(rows_);
    }

    // k-fold block-diagonal copy, acting on stacked optimizer state.
    LinearPolyMap block_diag(int k) const {
        LinearPolyMap r(rows_ * k, cols_ * k);
        for (int b = 0; b < k; ++b)
            for (int i = 0; i < rows_; ++i)
                for (int j = 0; j < cols_; ++j) r.at(b * rows_ + i, b * cols_ + j) = at(i, j);
        return r;
    }

    PolyMap<R> to_polymap() const {
        std::vector<MultiPoly<R>> comps;
        comps.reserve(static_cast<std::size_t>(rows_));
        for (int i = 0; i < rows_; ++i) {
            MultiPoly<R> p(cols_);
            for (int j = 0; j < cols_; ++j) {
                ExpVec e(static_cast<std::size_t>(cols_), 0);
                e[static_cast<std::size_t>(j)] = 1;
                p.add_term(e, at(i, j));
            }
            comps.push_back(std::move(p));
        }
        return PolyMap<R>(cols_, std::move(comps));
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<std::vector<R>> m_;
};

template <Ring R>
LinearPolyMap<R> linear_from_polymap(const PolyMap<R>& f) {
    if (!is_linear(f)) throw domain_error("map is not linear");
    LinearPolyMap<R> r(f.codomain(), f.domain());
    for (int i = 0; i < f.codomain(); ++i) {
        for (const auto& [e, c] : f.component(i).terms()) {
            for (std::size_t j = 0; j < e.size(); ++j)
                if (e[j] == 1) r.at(i, static_cast<int>(j)) = c;
        }
    }
    return r;
}

// Gauss-Jordan inverse; requires a field scalar (exact rationals or floats).
// Throws domain_error when the matrix is singular.
template <Ring R>
    requires(!std::is_same_v<R, Int>)
LinearPolyMap<R> inverse(const LinearPolyMap<R>& a) {
    if (a.rows() != a.cols()) throw domain_error("inverse of non-square matrix");
    int n = a.rows();
    LinearPolyMap<R> m = a;
    LinearPolyMap<R> inv = LinearPolyMap<R>::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        if constexpr (std::is_same_v<R, double>) {
            double best = 0;
            for (int r = col; r < n; ++r) {
                double v = std::abs(m.at(r, col));
                if (v > best) {
                    best = v;
                    piv = r;
                }
            }
            if (piv < 0 || best == 0) throw domain_error("singular matrix");
        } else {
            for (int r = col; r < n && piv < 0; ++r)
                if (!(m.at(r, col) == R(0))) piv = r;
            if (piv < 0) throw domain_error("singular matrix");
        }
        for (int j = 0; j < n; ++j) {
            std::swap(m.at(piv, j), m.at(col, j));
            std::swap(inv.at(piv, j), inv.at(col, j));
        }
        R d = m.at(col, col);
        for (int j = 0; j < n; ++j) {
            m.at(col, j) = R(m.at(col, j) / d);
            inv.at(col, j) = R(inv.at(col, j) / d);
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            R factor = m.at(r, col);
            if (factor == R(0)) continue;
            for (int j = 0; j < n; ++j) {
                m.at(r, j) = R(m.at(r, j) - factor * m.at(col, j));
                inv.at(r, j) = R(inv.at(r, j) - factor * inv.at(col, j));
            }
        }
    }
    return inv;
}

} // namespace rdopt
