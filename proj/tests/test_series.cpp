#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <germflow/series.hpp>

#include "oracles.hpp"

using namespace germflow;

namespace {

Coeff q(long num, long den = 1) { return Coeff(make_rational(num, den)); }

MultiIndex mi(std::vector<unsigned> e) { return MultiIndex(std::move(e)); }

// 1-variable series from ascending coefficients c1*z + c2*z^2 + ...
FormalSeries zseries(unsigned order, const std::vector<Coeff>& c) {
    FormalSeries s(1, order);
    for (std::size_t i = 0; i < c.size(); ++i)
        s.set_coeff(mi({static_cast<unsigned>(i + 1)}), c[i]);
    return s;
}

GermMap zgerm(unsigned order, const std::vector<Coeff>& c) {
    return GermMap({zseries(order, c)});
}

}  // namespace

TEST_CASE("term order: degree first, leading variable first within a degree") {
    FormalSeries s(2, 4);
    s.set_coeff(mi({0, 2}), q(1));
    s.set_coeff(mi({2, 0}), q(2));
    s.set_coeff(mi({1, 1}), q(3));
    s.set_coeff(mi({1, 0}), q(4));
    std::vector<MultiIndex> seen;
    for (const auto& [m, c] : s.terms()) seen.push_back(m);
    REQUIRE(seen.size() == 4);
    CHECK(seen[0] == mi({1, 0}));
    CHECK(seen[1] == mi({2, 0}));
    CHECK(seen[2] == mi({1, 1}));
    CHECK(seen[3] == mi({0, 2}));
}

TEST_CASE("series storage invariants") {
    FormalSeries s(1, 3);
    s.set_coeff(mi({1}), q(1));
    s.set_coeff(mi({1}), q(0));  // setting zero removes the term
    CHECK(s.empty());
    s.set_coeff(mi({7}), q(5));  // beyond order: identically discarded
    CHECK(s.empty());
    CHECK(s.coeff(mi({2})).is_zero());
    s.add_to_coeff(mi({2}), q(1, 2));
    s.add_to_coeff(mi({2}), q(-1, 2));  // cancellation removes the term
    CHECK(s.empty());
}

TEST_CASE("product and truncation examples") {
    FormalSeries a = zseries(4, {q(1), q(1)});   // z + z^2
    FormalSeries b = zseries(4, {q(1), q(-1)});  // z - z^2
    FormalSeries p = series_mul(a, b);
    FormalSeries expect(1, 4);
    expect.set_coeff(mi({2}), q(1));
    expect.set_coeff(mi({4}), q(-1));
    CHECK(p == expect);  // z^2 - z^4

    FormalSeries geom(1, 10);
    for (unsigned i = 1; i <= 10; ++i) geom.set_coeff(mi({i}), q(1));
    FormalSeries t = truncate(geom, 3);
    CHECK(t.order() == 3);
    CHECK(t == zseries(3, {q(1), q(1), q(1)}));

    // (z + zbar)^2 at order 2
    FormalSeries zz(2, 2);
    zz.set_coeff(mi({1, 0}), q(1));
    zz.set_coeff(mi({0, 1}), q(1));
    FormalSeries sq = series_mul(zz, zz);
    CHECK(sq.coeff(mi({2, 0})) == q(1));
    CHECK(sq.coeff(mi({1, 1})) == q(2));
    CHECK(sq.coeff(mi({0, 2})) == q(1));
    CHECK(sq.terms().size() == 3);
}

TEST_CASE("ring axioms on random 2-variable series") {
    oracle::CoeffGen gen(0x5E41E5);
    auto rand_series = [&](unsigned order) {
        FormalSeries s(2, order);
        std::uniform_int_distribution<unsigned> d(0, order);
        for (int t = 0; t < 6; ++t) {
            unsigned i = d(gen.rng), j = d(gen.rng);
            if (i + j > order) continue;
            s.set_coeff(mi({i, j}), gen.rational_coeff());
        }
        return s;
    };
    for (int it = 0; it < 40; ++it) {
        FormalSeries a = rand_series(6), b = rand_series(6), c = rand_series(6);
        CHECK(series_add(a, b) == series_add(b, a));
        CHECK(series_mul(a, b) == series_mul(b, a));
        CHECK(series_add(series_add(a, b), c) == series_add(a, series_add(b, c)));
        CHECK(series_mul(series_mul(a, b), c) == series_mul(a, series_mul(b, c)));
        CHECK(series_mul(a, series_add(b, c)) ==
              series_add(series_mul(a, b), series_mul(a, c)));
        CHECK(series_sub(a, a).empty());
        CHECK(scalar_mul(q(3), a) == series_add(series_add(a, a), a));
    }
}

TEST_CASE("derivatives") {
    FormalSeries z3 = zseries(5, {q(0), q(0), q(1)});  // z^3
    FormalSeries d = derive(z3, 0);
    CHECK(d.order() == 4);
    CHECK(d.coeff(mi({2})) == q(3));
    CHECK(d.terms().size() == 1);

    FormalSeries s(2, 4);
    s.set_coeff(mi({2, 1}), q(1));  // z^2 zbar
    FormalSeries dz = derive(s, 1);
    CHECK(dz.coeff(mi({2, 0})) == q(1));
    CHECK(dz.terms().size() == 1);

    // terms with exponent zero in the derivation variable contribute nothing
    FormalSeries only_y(2, 4);
    only_y.set_coeff(mi({0, 2}), q(7));
    only_y.set_coeff(mi({0, 3}), q(-2));
    CHECK(derive(only_y, 0).empty());
}

TEST_CASE("composition against the direct-expansion oracle") {
    // lambda z + z^2 composed with itself
    Coeff lam = q(2, 3);
    GermMap g = zgerm(2, {lam, q(1)});
    GermMap gg = compose(g, g);
    CHECK(gg.component(0).coeff(mi({1})) == lam * lam);
    CHECK(gg.component(0).coeff(mi({2})) == lam + lam * lam);

    // linear coefficient of the self-composition is always c1^2
    for (long m = 1; m <= 4; ++m) {
        Coeff c1 = root_of_unity(2 * m, 1);
        GermMap h = zgerm(8, {c1, q(0), q(1, 7)});
        CHECK(compose(h, h).component(0).coeff(mi({1})) == c1 * c1);
    }

    oracle::CoeffGen gen(0xD15EA5E);
    for (int it = 0; it < 15; ++it) {
        for (unsigned n : {1u, 2u}) {
            GermMap a = gen.germ(n, 10);
            GermMap b = gen.germ(n, 10);
            CHECK(compose(a, b) == oracle::compose_brute(a, b));
        }
    }
}

TEST_CASE("composition with identity and associativity") {
    oracle::CoeffGen gen(0xA550C);
    for (unsigned n : {1u, 2u}) {
        GermMap id = GermMap::identity(n, 10);
        GermMap u = gen.germ(n, 10);
        CHECK(compose(u, id) == u);
        CHECK(compose(id, u) == u);
        for (int it = 0; it < 8; ++it) {
            GermMap a = gen.germ(n, 10);
            GermMap b = gen.germ(n, 10);
            GermMap c = gen.germ(n, 10);
            CHECK(compose(a, compose(b, c)) == compose(compose(a, b), c));
        }
    }
}

TEST_CASE("linear part of a composition is the product of linear parts") {
    oracle::CoeffGen gen(0x11EA12);
    for (int it = 0; it < 20; ++it) {
        GermMap a = gen.germ(2, 6);
        GermMap b = gen.germ(2, 6);
        GermMap ab = compose(a, b);
        for (unsigned s = 0; s < 2; ++s)
            for (unsigned j = 0; j < 2; ++j) {
                Coeff expect = a.linear_coeff(s, 0) * b.linear_coeff(0, j) +
                               a.linear_coeff(s, 1) * b.linear_coeff(1, j);
                CHECK(ab.linear_coeff(s, j) == expect);
            }
    }
}

TEST_CASE("compositional inverse") {
    CHECK(compositional_inverse(GermMap::identity(2, 8)) == GermMap::identity(2, 8));

    GermMap scale = zgerm(6, {q(3, 5)});
    CHECK(compositional_inverse(scale) == zgerm(6, {q(5, 3)}));

    // z + z^2 inverts to z - z^2 + 2 z^3 - 5 z^4 (checked by round trip too)
    GermMap u = zgerm(4, {q(1), q(1)});
    GermMap v = compositional_inverse(u);
    CHECK(v == zgerm(4, {q(1), q(-1), q(2), q(-5)}));
    CHECK(oracle::compose_brute(u, v) == GermMap::identity(1, 4));

    oracle::CoeffGen gen(0x1AC0B1);
    for (int it = 0; it < 10; ++it) {
        for (unsigned n : {1u, 2u}) {
            GermMap a = gen.germ(n, 12);
            GermMap ainv = compositional_inverse(a);
            GermMap id = GermMap::identity(n, 12);
            CHECK(compose(a, ainv) == id);
            CHECK(compose(ainv, a) == id);
        }
    }
}

TEST_CASE("truncation consistency: compute high then cut equals compute low") {
    oracle::CoeffGen gen(0x7A11);
    for (int it = 0; it < 12; ++it) {
        GermMap a = gen.germ(2, 10);
        GermMap b = gen.germ(2, 10);
        GermMap low = compose(truncate(a, 6), truncate(b, 6));
        CHECK(truncate(compose(a, b), 6) == low);
        FormalSeries p = series_mul(a.component(0), b.component(1));
        CHECK(truncate(p, 5) ==
              series_mul(truncate(a.component(0), 5), truncate(b.component(1), 5)));
    }
}

TEST_CASE("germ constructor invariants") {
    FormalSeries bad(1, 4);
    bad.set_coeff(mi({0}), q(1));  // constant term
    bad.set_coeff(mi({1}), q(1));
    CHECK_THROWS_AS(GermMap({bad}), DomainError);

    FormalSeries a(2, 4), b(2, 5);  // mismatched orders
    a.set_coeff(mi({1, 0}), q(1));
    b.set_coeff(mi({0, 1}), q(1));
    CHECK_THROWS_AS(GermMap({a, b}), DomainError);

    FormalSeries wrong_arity(1, 4);
    wrong_arity.set_coeff(mi({1}), q(1));
    CHECK_THROWS_AS(GermMap({wrong_arity, wrong_arity}), DomainError);

    // the zero germ is legal, but it has no inverse
    GermMap zero({FormalSeries::zero(1, 4)});
    CHECK(germ_is_zero(zero));
    CHECK_THROWS_AS(compositional_inverse(zero), DomainError);
}

TEST_CASE("mode mismatch between series is rejected") {
    FormalSeries exact = zseries(4, {q(1)});
    FormalSeries approx(1, 4);
    approx.set_coeff(mi({1}), Coeff(embed_complex(q(1), 128)));
    CHECK(exact.mode() == Mode::exact);
    CHECK(approx.mode() == Mode::approx);
    CHECK_THROWS_AS(series_add(exact, approx), ModeError);
    CHECK_THROWS_AS(series_mul(exact, approx), ModeError);
}

TEST_CASE("conjugation involution of the (z, zbar) chart") {
    Coeff i4 = root_of_unity(4, 1);
    FormalSeries s(2, 5);
    s.set_coeff(mi({2, 0}), i4);         // i z^2
    s.set_coeff(mi({1, 1}), q(3));       // 3 z zbar
    s.set_coeff(mi({0, 3}), q(1) + i4);  // (1+i) zbar^3
    FormalSeries c = conjugate_involution(s);
    CHECK(c.coeff(mi({0, 2})) == -i4);
    CHECK(c.coeff(mi({1, 1})) == q(3));
    CHECK(c.coeff(mi({3, 0})) == q(1) - i4);
    CHECK(conjugate_involution(c) == s);  // involution

    oracle::CoeffGen gen(0xFACADE);
    for (int it = 0; it < 10; ++it) {
        FormalSeries r(2, 6);
        std::uniform_int_distribution<unsigned> d(0, 3);
        for (int t = 0; t < 5; ++t)
            r.set_coeff(mi({d(gen.rng), d(gen.rng)}), gen.cyclotomic_coeff(8));
        CHECK(conjugate_involution(conjugate_involution(r)) == r);
    }

    FormalSeries first(2, 4);
    first.set_coeff(mi({1, 0}), i4);
    first.set_coeff(mi({3, 0}), q(1, 2));
    GermMap pair = make_conjugate_pair(first);
    CHECK(pair.component(1) == conjugate_involution(pair.component(0)));
    CHECK(pair.component(1).coeff(mi({0, 1})) == -i4);
}
