#pragma once

// Integer polynomial state maps for quadratic objectives l = a*x^2 + b*x + c
// under gradient descent, u(x) = -(2a*x + b). A degree-(2m+2) candidate
// s(t) = p_0 + p_1 t + ... + p_D t^D must satisfy, at each t = 1..m,
//
//   derivative match   s'(t) = u(s(t))          (the continuous flow condition)
//   step match         s(t+1) = s(t) + u(s(t))  (the discrete update)
//
// plus the anchor s(1) = x0. Both sides are linear in the p_i, so the whole
// thing is a linear Diophantine system: 2m+1 rows over 2m+3 unknowns, solved
// exactly over the integers by unimodular column reduction.

#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rdopt/flow.hpp"
#include "rdopt/multipoly.hpp"
#include "rdopt/optim.hpp"
#include "rdopt/polymap.hpp"
#include "rdopt/rings.hpp"

namespace rdopt {

struct DioSystem {
    std::vector<std::vector<Int>> matrix; // rows x cols
    std::vector<Int> rhs;                 // one entry per row

    int rows() const { return static_cast<int>(matrix.size()); }
    int cols() const { return matrix.empty() ? 0 : static_cast<int>(matrix.front().size()); }
};

struct StateMapSolution {
    std::vector<Int> particular; // coefficients p_0..p_D of s(t)
    std::vector<std::vector<Int>> nullspace_basis;
};

// c only shifts the loss; no equation depends on it.
inline DioSystem build_system(const Int& a, const Int& b, const Int& c, int m, const Int& x0) {
    (void)c;
    if (m < 1) throw rdopt::domain_error("state-map horizon m must be >= 1");
    int cols = 2 * m + 3; // unknowns p_0 .. p_{2m+2}
    DioSystem sys;
    auto tpow = [](const Int& t, int k) { return ring_pow(t, static_cast<unsigned>(k)); };
    for (int t = 1; t <= m; ++t) {
        Int tv(t);
        std::vector<Int> deriv(static_cast<std::size_t>(cols));
        std::vector<Int> step(static_cast<std::size_t>(cols));
        for (int i = 0; i < cols; ++i) {
            Int ti = tpow(tv, i);
            Int dterm = i == 0 ? Int(0) : Int(Int(i) * tpow(tv, i - 1));
            deriv[static_cast<std::size_t>(i)] = Int(2 * a * ti + dterm);
            step[static_cast<std::size_t>(i)] = Int(tpow(Int(t + 1), i) + (2 * a - 1) * ti);
        }
        sys.matrix.push_back(std::move(deriv));
        sys.rhs.push_back(Int(-b));
        sys.matrix.push_back(std::move(step));
        sys.rhs.push_back(Int(-b));
    }
    sys.matrix.push_back(std::vector<Int>(static_cast<std::size_t>(cols), Int(1)));
    sys.rhs.push_back(x0);
    return sys;
}

inline std::vector<Int> system_residual(const DioSystem& sys, std::span<const Int> p) {
    if (static_cast<int>(p.size()) != sys.cols())
        throw arity_error("coefficient vector width does not match the system");
    std::vector<Int> out;
    for (int i = 0; i < sys.rows(); ++i) {
        Int acc(0);
        for (int j = 0; j < sys.cols(); ++j)
            acc += sys.matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                   p[static_cast<std::size_t>(j)];
        out.push_back(Int(acc - sys.rhs[static_cast<std::size_t>(i)]));
    }
    return out;
}

// Exact integer solve by column reduction: bring A*U into a column staircase
// with U unimodular, then solve forward. Every divisibility failure is a
// certificate that no integer solution exists.
inline std::optional<StateMapSolution> solve(const DioSystem& sys) {
    int r = sys.rows(), c = sys.cols();
    auto H = sys.matrix;
    std::vector<std::vector<Int>> U(static_cast<std::size_t>(c),
                                    std::vector<Int>(static_cast<std::size_t>(c), Int(0)));
    for (int i = 0; i < c; ++i) U[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;

    auto col_swap = [&](int j1, int j2) {
        if (j1 == j2) return;
        for (int i = 0; i < r; ++i)
            std::swap(H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j1)],
                      H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j2)]);
        for (int i = 0; i < c; ++i)
            std::swap(U[static_cast<std::size_t>(i)][static_cast<std::size_t>(j1)],
                      U[static_cast<std::size_t>(i)][static_cast<std::size_t>(j2)]);
    };
    auto col_submul = [&](int dst, int src, const Int& q) { // col_dst -= q * col_src
        for (int i = 0; i < r; ++i)
            H[static_cast<std::size_t>(i)][static_cast<std::size_t>(dst)] -=
                q * H[static_cast<std::size_t>(i)][static_cast<std::size_t>(src)];
        for (int i = 0; i < c; ++i)
            U[static_cast<std::size_t>(i)][static_cast<std::size_t>(dst)] -=
                q * U[static_cast<std::size_t>(i)][static_cast<std::size_t>(src)];
    };
    auto col_negate = [&](int j) {
        for (int i = 0; i < r; ++i)
            H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *= -1;
        for (int i = 0; i < c; ++i)
            U[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *= -1;
    };

    int lead = 0;
    std::vector<int> pivot_col(static_cast<std::size_t>(r), -1);
    for (int row = 0; row < r && lead < c; ++row) {
        auto& hrow = H[static_cast<std::size_t>(row)];
        bool has = false;
        while (true) {
            int best = -1;
            for (int j = lead; j < c; ++j) {
                if (hrow[static_cast<std::size_t>(j)] == 0) continue;
                if (best < 0 || mpz_cmpabs(hrow[static_cast<std::size_t>(j)].get_mpz_t(),
                                           hrow[static_cast<std::size_t>(best)].get_mpz_t()) < 0)
                    best = j;
            }
            if (best < 0) break;
            has = true;
            col_swap(lead, best);
            bool leftovers = false;
            for (int j = lead + 1; j < c; ++j) {
                if (hrow[static_cast<std::size_t>(j)] == 0) continue;
                Int q(hrow[static_cast<std::size_t>(j)] / hrow[static_cast<std::size_t>(lead)]);
                if (q != 0) col_submul(j, lead, q);
                if (hrow[static_cast<std::size_t>(j)] != 0) leftovers = true;
            }
            if (!leftovers) break;
        }
        if (has) {
            if (hrow[static_cast<std::size_t>(lead)] < 0) col_negate(lead);
            pivot_col[static_cast<std::size_t>(row)] = lead;
            ++lead;
        }
    }

    // Forward substitution over the staircase; y is nonzero on pivot columns only.
    std::vector<Int> y(static_cast<std::size_t>(c), Int(0));
    for (int row = 0; row < r; ++row) {
        Int resid = sys.rhs[static_cast<std::size_t>(row)];
        for (int j = 0; j < lead; ++j)
            resid -= H[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] *
                     y[static_cast<std::size_t>(j)];
        int pc = pivot_col[static_cast<std::size_t>(row)];
        if (pc >= 0) {
            const Int& piv = H[static_cast<std::size_t>(row)][static_cast<std::size_t>(pc)];
            if (resid % piv != 0) return std::nullopt;
            y[static_cast<std::size_t>(pc)] = Int(resid / piv);
        } else if (resid != 0) {
            return std::nullopt;
        }
    }

    StateMapSolution sol;
    sol.particular.assign(static_cast<std::size_t>(c), Int(0));
    for (int i = 0; i < c; ++i) {
        Int acc(0);
        for (int j = 0; j < lead; ++j)
            acc += U[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                   y[static_cast<std::size_t>(j)];
        sol.particular[static_cast<std::size_t>(i)] = std::move(acc);
    }
    for (int j = lead; j < c; ++j) {
        std::vector<Int> basis;
        for (int i = 0; i < c; ++i)
            basis.push_back(U[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        sol.nullspace_basis.push_back(std::move(basis));
    }
    return sol;
}

// s(t) = p_0 + p_1 t + ... as a univariate polynomial in x1.
inline MultiPoly<Int> solution_poly(std::span<const Int> coeffs) {
    MultiPoly<Int> s(1);
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        s.add_term({static_cast<std::uint32_t>(i)}, coeffs[i]);
    return s;
}

struct StateTrajectoryRow {
    Int t, s, loss;
    bool operator==(const StateTrajectoryRow&) const = default;
};

inline std::vector<StateTrajectoryRow> state_trajectory(const MultiPoly<Int>& s, const Int& a,
                                                        const Int& b, const Int& c, int t_from,
                                                        int t_to) {
    std::vector<StateTrajectoryRow> out;
    for (int t = t_from; t <= t_to; ++t) {
        std::vector<Int> tv{Int(t)};
        Int st = s.evaluate(std::span<const Int>(tv));
        out.push_back({Int(t), st, Int(a * st * st + b * st + c)});
    }
    return out;
}

inline std::string state_csv(const std::vector<StateTrajectoryRow>& rows) {
    std::string out = "t,s_t,loss\n";
    for (const auto& row : rows) {
        out += ring_str(row.t);
        out += ',';
        out += ring_str(row.s);
        out += ',';
        out += ring_str(row.loss);
        out += '\n';
    }
    return out;
}

inline std::vector<StateTrajectoryRow> parse_state_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<StateTrajectoryRow> rows;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != "t,s_t,loss") throw parse_error("expected state CSV header t,s_t,loss");
            saw_header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != 3) throw parse_error("state CSV rows must have 3 cells");
        rows.push_back({parse_int(cells[0]), parse_int(cells[1]), parse_int(cells[2])});
    }
    if (!saw_header) throw parse_error("state CSV is missing its header");
    return rows;
}

// The induced gradient flow (l, -R[l]_1, s, 1..m); its checks are the exact
// sense in which a solved state map "is" an optimization run.
inline Flow<PolyMap<Int>> statemap_flow(const Int& a, const Int& b, const Int& c,
                                        const MultiPoly<Int>& s, int m) {
    MultiPoly<Int> l(1);
    l.add_term({2}, a);
    l.add_term({1}, b);
    l.add_term({0}, c);
    Objective<PolyMap<Int>> obj{PolyMap<Int>(1, {l}), std::nullopt};
    Flow<PolyMap<Int>> f{obj, gd_functor(obj), PolyMap<Int>(1, {s}), {}};
    for (int t = 1; t <= m; ++t) f.tau.push_back(Int(t));
    return f;
}

} // namespace rdopt
