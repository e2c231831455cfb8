#include "ciflow/stamps.hpp"

#include <random>

#include "ciflow/errors.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ciflow;

TEST_CASE("line stamp: pure reactance") {
    const TerminalStamp s = line_stamp(0.0, 0.1, 0.0);
    CHECK(s.y11 == Complex(0.0, -10.0));
    CHECK(s.y22 == Complex(0.0, -10.0));
    CHECK(s.y12 == Complex(0.0, 10.0));
    CHECK(s.y21 == Complex(0.0, 10.0));
}

TEST_CASE("line stamp: ieee14 branch 1-2 against complex-reciprocal oracle") {
    // conj-reciprocal oracle: y = 1/(r+jx), diag = y + j b/2
    const TerminalStamp s = line_stamp(0.01938, 0.05917, 0.0528);
    CHECK(s.y11.real() == doctest::Approx(4.999131600798).epsilon(1e-12));
    CHECK(s.y11.imag() == doctest::Approx(-15.236686523180).epsilon(1e-12));
    CHECK(s.y12.real() == doctest::Approx(-4.999131600798).epsilon(1e-12));
    CHECK(s.y12.imag() == doctest::Approx(15.263086523180).epsilon(1e-12));
    CHECK(s.y12 == s.y21);
    CHECK(s.y11 == s.y22);
}

TEST_CASE("line stamp: row sums vanish without charging") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const double r = testutil::uniform(rng, 0.0, 0.2);
        const double x = testutil::uniform(rng, 0.01, 0.5);
        const TerminalStamp s = line_stamp(r, x, 0.0);
        CHECK(std::abs(s.y11 + s.y12) < 1e-12);
        CHECK(std::abs(s.y21 + s.y22) < 1e-12);
    }
}

TEST_CASE("line stamp: zero series impedance rejected") {
    CHECK_THROWS_AS(line_stamp(0.0, 0.0, 0.1), StructuralError);
}

TEST_CASE("transformer stamp: unit tap equals line without charging") {
    const TerminalStamp t = transformer_stamp(0.0, 0.2, 1.0);
    const TerminalStamp l = line_stamp(0.0, 0.2, 0.0);
    CHECK(t.y11 == l.y11);
    CHECK(t.y12 == l.y12);
    CHECK(t.y21 == l.y21);
    CHECK(t.y22 == l.y22);
}

TEST_CASE("transformer stamp: tap 2 arithmetic") {
    const TerminalStamp t = transformer_stamp(0.0, 0.2, 2.0);
    CHECK(t.y11 == Complex(0.0, -1.25));
    CHECK(t.y12 == Complex(0.0, 2.5));
    CHECK(t.y21 == Complex(0.0, 2.5));
    CHECK(t.y22 == Complex(0.0, -5.0));
}

TEST_CASE("transformer stamp: rank-1 two-port, determinant zero") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const double r = testutil::uniform(rng, 0.0, 0.05);
        const double x = testutil::uniform(rng, 0.01, 0.4);
        const double n = testutil::uniform(rng, 0.8, 1.2);
        const TerminalStamp t = transformer_stamp(r, x, n);
        CHECK(std::abs(t.y11 * t.y22 - t.y12 * t.y21) < 1e-9);
        CHECK(t.y12 == t.y21);
    }
}

TEST_CASE("transformer stamp: non-positive tap rejected") {
    CHECK_THROWS_AS(transformer_stamp(0.0, 0.2, 0.0), StructuralError);
    CHECK_THROWS_AS(transformer_stamp(0.0, 0.2, -1.0), StructuralError);
}
