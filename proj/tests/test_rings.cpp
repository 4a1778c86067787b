#include <catch2/catch_amalgamated.hpp>

#include "rdopt/rings.hpp"
#include "rdopt/rng.hpp"

using namespace rdopt;

TEST_CASE("integer arithmetic basics") {
    CHECK(Int(3) + Int(5) == Int(8));
    CHECK(Int(-5) * Int(-5) == Int(25));
    CHECK(Int(7) - Int(9) == Int(-2));
    CHECK(ring_cmp(Int(2), Int(3)) == std::strong_ordering::less);
    CHECK(ring_cmp(Int(3), Int(3)) == std::strong_ordering::equal);
}

TEST_CASE("rational arithmetic and canonical form") {
    Rat h = parse_rat("7/2");
    CHECK(ring_str(Rat(h + h)) == "7");
    CHECK(parse_rat("6/8") == parse_rat("3/4"));
    CHECK(ring_str(parse_rat("6/8")) == "3/4");
    CHECK(ring_str(parse_rat("-4/-6")) == "2/3");
    CHECK(parse_rat("0/5") == Rat(0));
    // Decimal and scientific text convert exactly.
    CHECK(parse_rat("0.6") == Rat(3, 5));
    CHECK(parse_rat("1.5e-3") == Rat(3, 2000));
    CHECK(parse_rat("2e2") == Rat(200));
    CHECK(ring_cmp(parse_rat("2/3"), parse_rat("0.6")) == std::strong_ordering::greater);
}

TEST_CASE("float parsing and printing") {
    CHECK(parse_f64("1.5e-3") == 0.0015);
    CHECK(parse_f64("-2") == -2.0);
    std::string s = ring_str(0.1);
    CHECK(parse_f64(s) == 0.1);
    CHECK(ring_str(parse_f64(ring_str(1.0 / 3.0))) == ring_str(1.0 / 3.0));
    CHECK(ring_cmp(0.5, 0.25) == std::strong_ordering::greater);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_int(""), parse_error);
    CHECK_THROWS_AS(parse_int("7/2"), parse_error);
    CHECK_THROWS_AS(parse_int("abc"), parse_error);
    CHECK_THROWS_AS(parse_rat("1/0"), parse_error);
    CHECK_THROWS_AS(parse_rat("1.2.3"), parse_error);
    CHECK_THROWS_AS(parse_rat(""), parse_error);
    CHECK_THROWS_AS(parse_f64("12x"), parse_error);
    CHECK_THROWS_AS(parse_f64("1e999"), invalid_element);
    CHECK_THROWS_AS(parse_f64("nan"), invalid_element);
    CHECK_THROWS_AS(ring_cmp(std::nan(""), 1.0), invalid_element);
}

TEST_CASE("integer text round-trip") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        Int v = Int(rng.range(-1000000, 1000000)) * Int(rng.range(1, 1000000));
        CHECK(parse_int(ring_str(v)) == v);
    }
    CHECK(ring_str(Int(-3)) == "-3");
    CHECK(parse_int("-3") == Int(-3));
}

TEST_CASE("rational text round-trip") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        Rat v(Int(rng.range(-5000, 5000)), Int(rng.range(1, 5000)));
        v.canonicalize();
        CHECK(parse_rat(ring_str(v)) == v);
    }
}

TEST_CASE("ring laws on random triples") {
    Rng rng(13);
    for (int i = 0; i < 300; ++i) {
        Int a(rng.range(-500, 500)), b(rng.range(-500, 500)), c(rng.range(-500, 500));
        CHECK(Int((a + b) + c) == Int(a + (b + c)));
        CHECK(Int(a + b) == Int(b + a));
        CHECK(Int((a * b) * c) == Int(a * (b * c)));
        CHECK(Int(a * b) == Int(b * a));
        CHECK(Int(a * (b + c)) == Int(a * b + a * c));
        CHECK(ring_cmp(Int(a * a), Int(0)) != std::strong_ordering::less);
    }
    for (int i = 0; i < 300; ++i) {
        Rat a(Int(rng.range(-99, 99)), Int(rng.range(1, 40)));
        Rat b(Int(rng.range(-99, 99)), Int(rng.range(1, 40)));
        Rat c(Int(rng.range(-99, 99)), Int(rng.range(1, 40)));
        a.canonicalize();
        b.canonicalize();
        c.canonicalize();
        CHECK(Rat((a + b) + c) == Rat(a + (b + c)));
        CHECK(Rat(a * (b + c)) == Rat(a * b + a * c));
        CHECK(ring_cmp(Rat(a * a), Rat(0)) != std::strong_ordering::less);
        if (!(b == Rat(0))) {
            Rat q = Rat(a / b);
            CHECK(Rat(q * b) == a);
        }
    }
}

TEST_CASE("ordering is a total order consistent with subtraction") {
    Rng rng(14);
    for (int i = 0; i < 200; ++i) {
        Int a(rng.range(-100, 100)), b(rng.range(-100, 100));
        auto c = ring_cmp(a, b);
        if (c == std::strong_ordering::less) {
            CHECK(ring_cmp(b, a) == std::strong_ordering::greater);
            CHECK(ring_cmp(Int(a - b), Int(0)) == std::strong_ordering::less);
        } else if (c == std::strong_ordering::equal) {
            CHECK(a == b);
        }
    }
}

TEST_CASE("ring_pow and factorial helpers") {
    CHECK(ring_pow(Int(3), 0) == Int(1));
    CHECK(ring_pow(Int(3), 4) == Int(81));
    CHECK(ring_pow(Rat(1, 2), 3) == Rat(1, 8));
    CHECK(ring_factorial<Int>(0) == Int(1));
    CHECK(ring_factorial<Int>(5) == Int(120));
}
