#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rdopt/derived.hpp"
#include "rdopt/expr.hpp"
#include "rdopt/rng.hpp"

using namespace rdopt;

namespace {

// Central finite differences, the independent oracle the symbolic reverse
// transformation is checked against.
std::vector<double> fd_gradient_dot(const ExprMap& f, std::span<const double> x,
                                    std::span<const double> v, double h = 1e-5) {
    // returns J(x)^T v by differencing each input coordinate
    std::vector<double> out(static_cast<std::size_t>(f.domain()), 0.0);
    for (int j = 0; j < f.domain(); ++j) {
        std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
        xp[static_cast<std::size_t>(j)] += h;
        xm[static_cast<std::size_t>(j)] -= h;
        auto fp = f.evaluate(xp);
        auto fm = f.evaluate(xm);
        double acc = 0;
        for (int i = 0; i < f.codomain(); ++i)
            acc += v[static_cast<std::size_t>(i)] *
                   (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2 * h);
        out[static_cast<std::size_t>(j)] = acc;
    }
    return out;
}

std::vector<double> fd_jvp(const ExprMap& f, std::span<const double> x, std::span<const double> v,
                           double h = 1e-5) {
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
    for (int j = 0; j < f.domain(); ++j) {
        xp[static_cast<std::size_t>(j)] += h * v[static_cast<std::size_t>(j)];
        xm[static_cast<std::size_t>(j)] -= h * v[static_cast<std::size_t>(j)];
    }
    auto fp = f.evaluate(xp);
    auto fm = f.evaluate(xm);
    std::vector<double> out(static_cast<std::size_t>(f.codomain()));
    for (int i = 0; i < f.codomain(); ++i)
        out[static_cast<std::size_t>(i)] =
            (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2 * h);
    return out;
}

// f(x) = (x^3 + x)^2 as a DAG with an explicitly shared subterm.
ExprMap cubic_square() {
    ExprPtr x = make_var(0);
    ExprPtr inner = make_add(make_pow(x, 3), x);
    return ExprMap(1, {make_pow(inner, 2)});
}

MultiPoly<double> random_poly_d(Rng& rng, int nvars, int max_deg) {
    MultiPoly<double> p(nvars);
    int terms = static_cast<int>(rng.range(1, 4));
    for (int t = 0; t < terms; ++t) {
        ExpVec e(static_cast<std::size_t>(nvars), 0);
        int budget = static_cast<int>(rng.range(0, max_deg));
        for (int d = 0; d < budget; ++d)
            e[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(nvars)))] += 1;
        p.add_term(e, static_cast<double>(rng.range(-5, 5)));
    }
    return p;
}

PolyMap<double> random_map_d(Rng& rng, int dom, int cod, int max_deg) {
    std::vector<MultiPoly<double>> comps;
    for (int i = 0; i < cod; ++i) comps.push_back(random_poly_d(rng, dom, max_deg));
    return PolyMap<double>(dom, std::move(comps));
}

} // namespace

TEST_CASE("expression evaluation matches hand computation") {
    ExprMap f = cubic_square();
    auto at = [&](double x) {
        std::vector<double> pt{x};
        return f.evaluate(pt)[0];
    };
    CHECK(at(0) == 0.0);
    CHECK(at(1) == 4.0);
    CHECK(at(2) == 100.0);
    CHECK(at(-1) == 4.0);

    // multi-output: g(x, y) = (x*y + y^2, x^2)
    ExprPtr x = make_var(0), y = make_var(1);
    ExprMap g(2, {make_add(make_mul(x, y), make_pow(y, 2)), make_pow(x, 2)});
    std::vector<double> pt{3, 2};
    auto v = g.evaluate(pt);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == 10.0);
    CHECK(v[1] == 9.0);
}

TEST_CASE("constructors fold arithmetic identities") {
    ExprPtr x = make_var(0);
    CHECK(make_add(x, make_cst(0)) == x);
    CHECK(make_add(make_cst(0), x) == x);
    CHECK(make_mul(x, make_cst(1)) == x);
    CHECK(make_mul(x, make_cst(0))->op == ExprOp::Const);
    CHECK(make_mul(x, make_cst(0))->value == 0.0);
    CHECK(make_neg(make_neg(x)) == x);
    CHECK(make_pow(x, 1) == x);
    CHECK(make_cst(2)->value == 2.0);
    CHECK(make_add(make_cst(2), make_cst(3))->value == 5.0);
    CHECK(make_mul(make_cst(2), make_cst(3))->value == 6.0);
    CHECK(make_pow(make_cst(2), 10)->value == 1024.0);
    CHECK_THROWS_AS(make_pow(x, 0), domain_error);
    CHECK_THROWS_AS(make_cst(std::numeric_limits<double>::infinity()), invalid_element);
    CHECK_THROWS_AS(make_var(-1), arity_error);
}

TEST_CASE("hash consing shares structurally equal subgraphs") {
    ExprPtr x = make_var(0);
    ExprPtr a = make_add(make_mul(x, x), make_cst(1));
    ExprPtr b = make_add(make_mul(x, x), make_cst(1));
    CHECK(a == b); // literally the same node

    // commutative operand order is canonical, so both spellings intern equal
    ExprPtr y = make_var(1);
    CHECK(make_add(x, y) == make_add(y, x));
    CHECK(make_mul(x, y) == make_mul(y, x));

    // repeated squaring: x^(2^20) by iterated mul stays a 21-node chain
    ExprPtr chain = x;
    for (int i = 0; i < 20; ++i) chain = make_mul(chain, chain);
    ExprMap f(1, {chain});
    CHECK(dag_size(f) == 21);
}

TEST_CASE("map combinators respect arities") {
    ExprMap id2 = ExprMap::identity(2);
    CHECK(id2.domain() == 2);
    CHECK(id2.codomain() == 2);
    ExprMap z = ExprMap::zero(2, 3);
    std::vector<double> pt{5, 7};
    CHECK(z.evaluate(pt) == std::vector<double>{0, 0, 0});
    CHECK(ExprMap::proj0(2, 1).evaluate(std::vector<double>{1, 2, 3}) ==
          std::vector<double>{1, 2});
    CHECK(ExprMap::proj1(2, 1).evaluate(std::vector<double>{1, 2, 3}) == std::vector<double>{3});

    ExprMap f = cubic_square();
    CHECK_THROWS_AS(compose(f, id2), arity_error);
    CHECK_THROWS_AS(pair_map(f, id2), arity_error);
    CHECK_THROWS_AS(add(f, id2), arity_error);
    CHECK_THROWS_AS(ExprMap(1, {make_var(1)}), arity_error);

    ExprMap prod = product_map(f, f);
    CHECK(prod.domain() == 2);
    CHECK(prod.codomain() == 2);
    std::vector<double> p2{1, 2};
    auto pv = prod.evaluate(p2);
    CHECK(pv[0] == 4.0);
    CHECK(pv[1] == 100.0);

    CHECK(terminal_map_expr(3).codomain() == 0);
    CHECK(compose(ExprMap::ones(0, 1), terminal_map_expr(3)).domain() == 3);
}

TEST_CASE("reverse transformation matches finite differences") {
    ExprMap f = cubic_square();
    ExprMap rf = reverse_derivative(f);
    REQUIRE(rf.domain() == 2);
    REQUIRE(rf.codomain() == 1);
    for (double x : {-1.0, 0.5, 2.0}) {
        for (double a : {1.0, -0.5, 2.0}) {
            std::vector<double> pt{x, a};
            double got = rf.evaluate(pt)[0];
            std::vector<double> xv{x}, av{a};
            double fd = fd_gradient_dot(f, xv, av)[0];
            CHECK_THAT(got, Catch::Matchers::WithinRel(fd, 1e-6) ||
                                Catch::Matchers::WithinAbs(fd, 1e-5));
        }
    }

    // multivariate: g(x, y) = (x*y + y^2, x^2); R[g] : 4 -> 2
    ExprPtr x = make_var(0), y = make_var(1);
    ExprMap g(2, {make_add(make_mul(x, y), make_pow(y, 2)), make_pow(x, 2)});
    ExprMap rg = reverse_derivative(g);
    REQUIRE(rg.domain() == 4);
    REQUIRE(rg.codomain() == 2);
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> pt, vec;
        for (int i = 0; i < 2; ++i) pt.push_back(rng.uniform01() * 4 - 2);
        for (int i = 0; i < 2; ++i) vec.push_back(rng.uniform01() * 4 - 2);
        std::vector<double> args = pt;
        args.insert(args.end(), vec.begin(), vec.end());
        auto got = rg.evaluate(args);
        auto fd = fd_gradient_dot(g, pt, vec);
        for (int j = 0; j < 2; ++j)
            CHECK_THAT(got[static_cast<std::size_t>(j)],
                       Catch::Matchers::WithinRel(fd[static_cast<std::size_t>(j)], 1e-5) ||
                           Catch::Matchers::WithinAbs(fd[static_cast<std::size_t>(j)], 1e-5));
    }
}

TEST_CASE("forward derivative matches directional finite differences") {
    ExprPtr x = make_var(0), y = make_var(1);
    ExprMap g(2, {make_add(make_mul(x, y), make_pow(y, 2)), make_pow(x, 2)});
    ExprMap dg = forward_derivative(g);
    REQUIRE(dg.domain() == 4);
    REQUIRE(dg.codomain() == 2);
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> pt, vec;
        for (int i = 0; i < 2; ++i) pt.push_back(rng.uniform01() * 4 - 2);
        for (int i = 0; i < 2; ++i) vec.push_back(rng.uniform01() * 4 - 2);
        std::vector<double> args = pt;
        args.insert(args.end(), vec.begin(), vec.end());
        auto got = dg.evaluate(args);
        auto fd = fd_jvp(g, pt, vec);
        for (int i = 0; i < 2; ++i)
            CHECK_THAT(got[static_cast<std::size_t>(i)],
                       Catch::Matchers::WithinRel(fd[static_cast<std::size_t>(i)], 1e-5) ||
                           Catch::Matchers::WithinAbs(fd[static_cast<std::size_t>(i)], 1e-5));
    }
}

TEST_CASE("expression reverse agrees with the polynomial instance") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        int dom = static_cast<int>(rng.range(1, 3));
        int cod = static_cast<int>(rng.range(1, 3));
        PolyMap<double> pm = random_map_d(rng, dom, cod, 3);
        ExprMap em = expr_from_polymap(pm);

        // values agree
        auto cmp = approx_equal(em, expr_from_polymap(pm), 0.0, 5);
        CHECK(cmp.ok);

        // reverse derivatives agree extensionally
        ExprMap r_expr = reverse_derivative(em);
        ExprMap r_poly = expr_from_polymap(reverse_derivative(pm));
        auto rc = approx_equal(r_expr, r_poly, 1e-9, 20);
        INFO("trial " << trial << " max dev " << rc.max_dev);
        CHECK(rc.ok);
    }
}

TEST_CASE("gradient of a composite matches the chain rule by hand") {
    // l(x1, x2) = (x1 + 2*x2)^2; grad = (2*x1 + 4*x2, 4*x1 + 8*x2)
    ExprPtr lin = make_add(make_var(0), make_mul(make_cst(2), make_var(1)));
    ExprMap l(2, {make_pow(lin, 2)});
    ExprMap g = generalized_gradient(l);
    REQUIRE(g.domain() == 2);
    REQUIRE(g.codomain() == 2);
    std::vector<double> pt{1, 1};
    auto gv = g.evaluate(pt);
    CHECK(gv[0] == 6.0);
    CHECK(gv[1] == 12.0);
    CHECK_THROWS_AS(generalized_gradient(ExprMap::identity(2)), arity_error);
}

TEST_CASE("approximate map equality flags genuine differences") {
    ExprPtr x = make_var(0);
    ExprMap f(1, {make_pow(x, 2)});
    ExprMap g(1, {make_mul(x, x)});
    CHECK(approx_equal(f, g).ok);

    ExprMap h(1, {make_add(make_pow(x, 2), make_cst(1e-6))});
    auto r = approx_equal(f, h);
    CHECK_FALSE(r.ok);
    CHECK(r.max_dev > 1e-7);
    REQUIRE(r.worst_point.size() == 1);

    CHECK_THROWS_AS(approx_equal(f, ExprMap::identity(2)), arity_error);
}

TEST_CASE("linear map construction evaluates as matrix application") {
    std::vector<std::vector<double>> m{{1, 2}, {0, -3}};
    ExprMap f = linear_expr_map(m, 2);
    std::vector<double> pt{5, 7};
    auto v = f.evaluate(pt);
    CHECK(v[0] == 19.0);
    CHECK(v[1] == -21.0);
    CHECK_THROWS_AS(linear_expr_map({{1, 2, 3}}, 2), arity_error);
}

TEST_CASE("JSON serialization re-parses to an equivalent map") {
    ExprMap f = cubic_square();
    ExprMap rf = reverse_derivative(f);
    for (const ExprMap* m : {&f, &rf}) {
        nlohmann::ordered_json j = expr_map_to_json(*m);
        ExprMap back = expr_map_from_json(j);
        CHECK(back.domain() == m->domain());
        CHECK(back.codomain() == m->codomain());
        CHECK(dag_size(back) == dag_size(*m));
        auto cmp = approx_equal(*m, back, 0.0, 20); // bit-exact
        CHECK(cmp.ok);
    }

    // serialization of the rebuilt map is stable under a second round trip
    nlohmann::ordered_json j1 = expr_map_to_json(expr_map_from_json(expr_map_to_json(rf)));
    ExprMap again = expr_map_from_json(j1);
    CHECK(approx_equal(rf, again, 0.0, 20).ok);

    // malformed inputs are rejected
    CHECK_THROWS_AS(expr_map_from_json(nlohmann::json::parse("{}")), parse_error);
    CHECK_THROWS_AS(expr_map_from_json(nlohmann::json::parse(
                        R"({"domain_arity":1,"codomain_arity":1,"nodes":[{"id":0,"op":"frob"}],"outputs":[0]})")),
                    parse_error);
    CHECK_THROWS_AS(expr_map_from_json(nlohmann::json::parse(
                        R"({"domain_arity":1,"codomain_arity":1,"nodes":[],"outputs":[3]})")),
                    parse_error);
    // forward references between nodes are invalid
    CHECK_THROWS_AS(
        expr_map_from_json(nlohmann::json::parse(
            R"({"domain_arity":1,"codomain_arity":1,"nodes":[{"id":0,"op":"neg","args":[1]},{"id":1,"op":"var","index":0}],"outputs":[0]})")),
        parse_error);
}

TEST_CASE("polynomial conversion preserves values") {
    MultiPoly<Rat> p(2);
    p.add_term(ExpVec{2, 0}, Rat(3));
    p.add_term(ExpVec{0, 1}, Rat(-1, 2));
    p.add_term(ExpVec{0, 0}, Rat(7));
    ExprPtr e = expr_from_poly(p);
    ExprMap f(2, {e});
    std::vector<double> pt{2, 4};
    CHECK(f.evaluate(pt)[0] == 17.0); // 3*4 - 2 + 7

    PolyMap<Int> zero_map = PolyMap<Int>::zero(2, 1);
    ExprMap zf = expr_from_polymap(zero_map);
    std::vector<double> pt2{1, 1};
    CHECK(zf.evaluate(pt2)[0] == 0.0);
}

TEST_CASE("non-finite evaluation is detectable") {
    ExprPtr x = make_var(0);
    ExprPtr big = make_pow(x, 64);
    ExprMap f(1, {make_pow(big, 64)}); // x^4096 overflows for |x| > ~1.2
    std::vector<double> pt{10.0};
    auto v = f.evaluate(pt);
    CHECK_FALSE(all_finite(v));
    std::vector<double> small{1.0};
    CHECK(all_finite(f.evaluate(small)));
}
