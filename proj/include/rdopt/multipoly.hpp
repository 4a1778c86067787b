#pragma once

// Multivariate polynomials over a scalar ring. Terms live in a map from dense
// exponent vectors to nonzero coefficients, so equal polynomials are equal
// structures and equality is structural. The text grammar round-trips
// bit-exactly: `3*x1^2*x2 - 4*x3 + 7` (variables are x1..xn, 1-based).

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rdopt/errors.hpp"
#include "rdopt/rings.hpp"

namespace rdopt {

using ExpVec = std::vector<std::uint32_t>;

template <Ring R>
class MultiPoly {
public:
    using Terms = std::map<ExpVec, R>;

    MultiPoly() = default;
    explicit MultiPoly(int num_vars) : nvars_(num_vars) {
        if (num_vars < 0) throw arity_error("negative variable count");
    }

    static MultiPoly constant(int num_vars, const R& c) {
        MultiPoly p(num_vars);
        p.add_term(ExpVec(static_cast<std::size_t>(num_vars), 0), c);
        return p;
    }

    static MultiPoly variable(int num_vars, int index) {
        if (index < 0 || index >= num_vars) throw arity_error("variable index out of range");
        MultiPoly p(num_vars);
        ExpVec e(static_cast<std::size_t>(num_vars), 0);
        e[static_cast<std::size_t>(index)] = 1;
        p.add_term(e, R(1));
        return p;
    }

    int num_vars() const { return nvars_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    // Accumulates c into the monomial e, erasing the term if it cancels.
    void add_term(const ExpVec& e, const R& c) {
        if (static_cast<int>(e.size()) != nvars_) throw arity_error("exponent vector length mismatch");
        if (c == R(0)) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second = R(it->second + c);
            if (it->second == R(0)) terms_.erase(it);
        }
    }

    // Total degree; -1 for the zero polynomial.
    int total_degree() const {
        int d = -1;
        for (const auto& [e, c] : terms_) {
            int t = 0;
            for (auto x : e) t += static_cast<int>(x);
            d = std::max(d, t);
        }
        return d;
    }

    int degree_in(int var) const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, static_cast<int>(e[static_cast<std::size_t>(var)]));
        return d;
    }

    R coefficient(const ExpVec& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? R(0) : it->second;
    }

    MultiPoly operator-() const {
        MultiPoly r(nvars_);
        for (const auto& [e, c] : terms_) r.terms_.emplace(e, R(-c));
        return r;
    }

    friend MultiPoly operator+(const MultiPoly& a, const MultiPoly& b) {
        a.require_same_arity(b);
        MultiPoly r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }

    friend MultiPoly operator-(const MultiPoly& a, const MultiPoly& b) {
        a.require_same_arity(b);
        MultiPoly r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, R(-c));
        return r;
    }

    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        a.require_same_arity(b);
        MultiPoly r(a.nvars_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                ExpVec e(ea.size());
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, R(ca * cb));
            }
        }
        return r;
    }

    friend MultiPoly operator*(const R& s, const MultiPoly& p) {
        MultiPoly r(p.nvars_);
        for (const auto& [e, c] : p.terms_) r.add_term(e, R(s * c));
        return r;
    }

    MultiPoly pow(unsigned k) const {
        MultiPoly acc = constant(nvars_, R(1));
        MultiPoly b = *this;
        while (k) {
            if (k & 1u) acc = acc * b;
            if (k >>= 1u) b = b * b;
        }
        return acc;
    }

    bool operator==(const MultiPoly& o) const = default;

    R evaluate(std::span<const R> point) const {
        if (static_cast<int>(point.size()) != nvars_) throw arity_error("evaluation point arity mismatch");
        // powers[i][k] caches point[i]^k up to the max exponent seen.
        std::vector<std::vector<R>> powers(static_cast<std::size_t>(nvars_), std::vector<R>{R(1)});
        auto power = [&](std::size_t i, std::uint32_t k) -> const R& {
            auto& col = powers[i];
            while (col.size() <= k) col.push_back(R(col.back() * point[i]));
            return col[k];
        };
        R acc(0);
        for (const auto& [e, c] : terms_) {
            R t = c;
            for (std::size_t i = 0; i < e.size(); ++i)
                if (e[i]) t = R(t * power(i, e[i]));
            acc = R(acc + t);
        }
        return acc;
    }

    // d/dx_var, formally.
    MultiPoly formal_partial(int var) const {
        if (var < 0 || var >= nvars_) throw arity_error("partial index out of range");
        MultiPoly r(nvars_);
        for (const auto& [e, c] : terms_) {
            std::uint32_t k = e[static_cast<std::size_t>(var)];
            if (k == 0) continue;
            ExpVec e2 = e;
            e2[static_cast<std::size_t>(var)] = k - 1;
            r.add_term(e2, R(c * ring_traits<R>::from_long(static_cast<long>(k))));
        }
        return r;
    }

    // Substitutes args[i] for x_i; all args share one target arity.
    MultiPoly substitute(std::span<const MultiPoly> args) const {
        if (static_cast<int>(args.size()) != nvars_) throw arity_error("substitution arity mismatch");
        int target = args.empty() ? 0 : args[0].num_vars();
        for (const auto& a : args)
            if (a.num_vars() != target) throw arity_error("substitution targets disagree");
        std::vector<std::vector<MultiPoly>> powers(args.size());
        for (std::size_t i = 0; i < args.size(); ++i) powers[i].push_back(constant(target, R(1)));
        auto power = [&](std::size_t i, std::uint32_t k) -> const MultiPoly& {
            auto& col = powers[i];
            while (col.size() <= k) col.push_back(col.back() * args[i]);
            return col[k];
        };
        MultiPoly acc(target);
        for (const auto& [e, c] : terms_) {
            MultiPoly t = constant(target, c);
            for (std::size_t i = 0; i < e.size(); ++i)
                if (e[i]) t = t * power(i, e[i]);
            acc = acc + t;
        }
        return acc;
    }

    // Re-embeds into a wider variable space, mapping x_i to x_{i+offset}.
    MultiPoly pad(int new_nvars, int offset) const {
        if (offset < 0 || nvars_ + offset > new_nvars) throw arity_error("pad does not fit");
        MultiPoly r(new_nvars);
        for (const auto& [e, c] : terms_) {
            ExpVec e2(static_cast<std::size_t>(new_nvars), 0);
            for (std::size_t i = 0; i < e.size(); ++i) e2[i + static_cast<std::size_t>(offset)] = e[i];
            r.terms_.emplace(std::move(e2), c);
        }
        return r;
    }

private:
    void require_same_arity(const MultiPoly& o) const {
        if (nvars_ != o.nvars_) throw arity_error("polynomial arity mismatch");
    }

    int nvars_ = 0;
    Terms terms_;
};

// ---------------------------------------------------------------------------
// text grammar

namespace detail {

inline int term_total_degree(const ExpVec& e) {
    int t = 0;
    for (auto x : e) t += static_cast<int>(x);
    return t;
}

// Print order: total degree descending, then exponent vector lexicographically
// descending (x1-major). This makes printing canonical.
inline bool term_print_before(const ExpVec& a, const ExpVec& b) {
    int da = term_total_degree(a), db = term_total_degree(b);
    if (da != db) return da > db;
    return a > b;
}

} // namespace detail

template <Ring R>
std::string poly_str(const MultiPoly<R>& p) {
    if (p.is_zero()) return "0";
    std::vector<const typename MultiPoly<R>::Terms::value_type*> order;
    for (const auto& kv : p.terms()) order.push_back(&kv);
    std::sort(order.begin(), order.end(),
              [](auto* a, auto* b) { return detail::term_print_before(a->first, b->first); });
    std::string out;
    bool first = true;
    for (auto* kv : order) {
        const auto& [e, c] = *kv;
        bool negative = ring_cmp(c, R(0)) == std::strong_ordering::less;
        R mag = negative ? R(-c) : c;
        if (first) {
            if (negative) out += "-";
            first = false;
        } else {
            out += negative ? " - " : " + ";
        }
        std::string mono;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (!e[i]) continue;
            if (!mono.empty()) mono += "*";
            mono += "x" + std::to_string(i + 1);
            if (e[i] > 1) mono += "^" + std::to_string(e[i]);
        }
        if (mono.empty()) {
            out += ring_traits<R>::str(mag);
        } else if (mag == R(1)) {
            out += mono;
        } else {
            out += ring_traits<R>::str(mag) + "*" + mono;
        }
    }
    return out;
}

// Parses the term grammar. With num_vars < 0 the arity is inferred from the
// highest variable index mentioned (0 variables for pure constants).
template <Ring R>
MultiPoly<R> parse_poly(const std::string& text, int num_vars = -1) {
    struct RawTerm {
        R coeff;
        std::map<int, std::uint32_t> exps; // 0-based var -> exponent
    };
    std::vector<RawTerm> raw;
    int max_var = 0;

    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto read_uint = [&](const char* what) -> long {
        if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
            throw parse_error(std::string("expected ") + what + " in polynomial text");
        long v = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            v = v * 10 + (text[i++] - '0');
            if (v > 1000000) throw parse_error(std::string(what) + " out of range");
        }
        return v;
    };

    skip_ws();
    if (i == text.size()) throw parse_error("empty polynomial text");
    while (i < text.size()) {
        bool neg = false;
        if (text[i] == '+' || text[i] == '-') {
            neg = text[i] == '-';
            ++i;
            skip_ws();
        }
        RawTerm term{R(1), {}};
        bool any_factor = false;
        for (;;) {
            skip_ws();
            if (i < text.size() && text[i] == 'x') {
                ++i;
                int idx = static_cast<int>(read_uint("variable index"));
                if (idx < 1) throw parse_error("variable indices start at x1");
                std::uint32_t ex = 1;
                if (i < text.size() && text[i] == '^') {
                    ++i;
                    ex = static_cast<std::uint32_t>(read_uint("exponent"));
                }
                term.exps[idx - 1] += ex;
                max_var = std::max(max_var, idx);
            } else if (i < text.size() &&
                       (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) {
                // Scalar literal; +/- after e/E belongs to the token.
                std::size_t j = i;
                while (i < text.size()) {
                    char ch = text[i];
                    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == '/') {
                        ++i;
                    } else if (ch == 'e' || ch == 'E') {
                        ++i;
                        if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
                    } else {
                        break;
                    }
                }
                term.coeff = R(term.coeff * ring_traits<R>::parse(text.substr(j, i - j)));
            } else {
                throw parse_error("expected term factor at offset " + std::to_string(i));
            }
            any_factor = true;
            skip_ws();
            if (i < text.size() && text[i] == '*') {
                ++i;
                continue;
            }
            break;
        }
        if (!any_factor) throw parse_error("empty term");
        if (neg) term.coeff = R(-term.coeff);
        raw.push_back(std::move(term));
        skip_ws();
        if (i == text.size()) break;
        if (text[i] != '+' && text[i] != '-')
            throw parse_error("expected '+' or '-' at offset " + std::to_string(i));
    }

    int nv = num_vars < 0 ? max_var : num_vars;
    if (max_var > nv) throw arity_error("polynomial mentions x" + std::to_string(max_var) +
                                        " but arity is " + std::to_string(nv));
    MultiPoly<R> p(nv);
    for (const auto& t : raw) {
        ExpVec e(static_cast<std::size_t>(nv), 0);
        for (const auto& [var, ex] : t.exps) e[static_cast<std::size_t>(var)] = ex;
        p.add_term(e, t.coeff);
    }
    return p;
}

} // namespace rdopt
