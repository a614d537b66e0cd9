#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <germflow/linearize.hpp>

#include <algorithm>

#include "oracles.hpp"

using namespace germflow;

namespace {

Coeff q(long num, long den = 1) { return Coeff(make_rational(num, den)); }

MultiIndex mi(std::vector<unsigned> e) { return MultiIndex(std::move(e)); }

FormalSeries zseries(unsigned order, const std::vector<Coeff>& c) {
    FormalSeries s(1, order);
    for (std::size_t i = 0; i < c.size(); ++i)
        s.set_coeff(mi({static_cast<unsigned>(i + 1)}), c[i]);
    return s;
}

GermMap zgerm(unsigned order, const std::vector<Coeff>& c) {
    return GermMap({zseries(order, c)});
}

BigFloat decimal_tol(unsigned digits, unsigned prec = 256) {
    Rational r(1);
    for (unsigned i = 0; i < digits; ++i) r /= 10;
    return bf_from_rational(r, prec);
}

BigFloat mat_dist(const SquareMatrix& a, const SquareMatrix& b, unsigned prec = 256) {
    return frobenius_norm(mat_sub(a, b), prec);
}

GermMap scaled(const Coeff& lam, const GermMap& f) {
    return GermMap({scalar_mul(lam, f.component(0))});
}

// apply the diagonal multiplier matrix to a germ's target: diag(lam) . f
GermMap diag_apply(const std::vector<Coeff>& lam, const GermMap& f) {
    std::vector<FormalSeries> comps;
    for (unsigned s = 0; s < f.nvars(); ++s)
        comps.push_back(scalar_mul(lam[s], f.component(s)));
    return GermMap(std::move(comps));
}

}  // namespace

TEST_CASE("multiplier extracts the degree-1 matrix") {
    CHECK(mat_equal_exact(multiplier(GermMap::identity(2, 4)),
                          SquareMatrix::identity(2)));

    for (long m = 1; m <= 4; ++m) {
        FormalSeries s(1, 2 * static_cast<unsigned>(m) + 1);
        s.set_coeff(mi({1}), root_of_unity(2 * m, 1));
        s.set_coeff(mi({2 * static_cast<unsigned>(m) + 1}), q(1));
        SquareMatrix J = multiplier(GermMap({s}));
        CHECK(J.dim() == 1);
        CHECK(J.at(0, 0) == root_of_unity(2 * m, 1));
    }

    // conjugate-pair chart: linear part is diag(zeta, zeta^-1)
    FormalSeries first(2, 3);
    first.set_coeff(mi({1, 0}), root_of_unity(6, 1));
    SquareMatrix J = multiplier(make_conjugate_pair(first));
    CHECK(J.at(0, 0) == root_of_unity(6, 1));
    CHECK(J.at(1, 1) == root_of_unity(6, 5));
    CHECK(J.at(0, 1).is_zero());
    CHECK(J.at(1, 0).is_zero());
}

TEST_CASE("closeness check: exact boundary decisions and the zeta(12) norm") {
    auto [n0, ok0] = closeness_check(SquareMatrix::identity(3));
    CHECK(n0 == 0);
    CHECK(ok0);

    SquareMatrix twoE(1);
    twoE.at(0, 0) = q(2);
    auto [n1, ok1] = closeness_check(twoE);
    CHECK(n1 == 1);
    CHECK_FALSE(ok1);  // exact boundary: norm = 1 is not < 1

    // |zeta(6) - 1| = 1 exactly: another boundary, decided algebraically
    SquareMatrix z6(1);
    z6.at(0, 0) = root_of_unity(6, 1);
    CHECK_FALSE(closeness_check(z6).second);

    // |zeta(12) - 1| = sqrt(2 - sqrt(3)) < 1, an independent mpfr route
    SquareMatrix z12(1);
    z12.at(0, 0) = root_of_unity(12, 1);
    auto [n2, ok2] = closeness_check(z12);
    CHECK(ok2);
    BigFloat expect = bf_make(320);
    expect = 3;
    expect = sqrt(expect);
    expect = 2 - expect;
    expect = sqrt(expect);
    CHECK(abs(BigFloat(n2 - expect)) < decimal_tol(60));
    CHECK(static_cast<double>(n2) == doctest::Approx(0.5176380902050415).epsilon(1e-12));

    // the norm stays < 1 for every m >= 4 (|e^{i pi/m} - 1| = 2 sin(pi/2m))
    for (long m = 4; m <= 12; ++m) {
        SquareMatrix zm(1);
        zm.at(0, 0) = root_of_unity(2 * m, 1);
        CHECK(closeness_check(zm).second);
    }
}

TEST_CASE("koenigs: frozen coefficient and the conjugacy identity") {
    LinearizationResult lin = koenigs(zgerm(6, {q(1, 2)}), 6);
    CHECK(lin.f == GermMap::identity(1, 6));
    CHECK(lin.multipliers[0] == q(1, 2));

    // u = z/2 + z^2: c_2 = 1 / (lambda - lambda^2) = 4
    LinearizationResult r = koenigs(zgerm(8, {q(1, 2), q(1)}), 8);
    CHECK(r.f.component(0).coeff(mi({2})) == q(4));
    GermMap u8 = with_order(zgerm(8, {q(1, 2), q(1)}), 8);
    CHECK(compose(r.f, u8) == scaled(q(1, 2), r.f));
    // reconstruction u = f^{-1}(lambda f)
    CHECK(compose(compositional_inverse(r.f), scaled(q(1, 2), r.f)) == u8);
}

TEST_CASE("koenigs on random contracting and expanding germs") {
    oracle::CoeffGen gen(0x60E216);
    std::uniform_int_distribution<long> den(2, 9);
    for (int it = 0; it < 20; ++it) {
        long d = den(gen.rng);
        Coeff lam = q(1, d);
        GermMap u = gen.germ(1, 12);
        FormalSeries c = u.component(0);
        c.set_coeff(mi({1}), lam);
        u = GermMap({c});
        LinearizationResult r = koenigs(u, 12);
        CHECK(compose(r.f, with_order(u, 12)) == scaled(lam, r.f));
        CHECK(r.f.component(0).coeff(mi({1})) == q(1));
    }
    // |lambda| > 1 works through the same recursion
    GermMap u = zgerm(10, {q(2), q(1), q(0), q(1, 3)});
    LinearizationResult r = koenigs(u, 10);
    CHECK(compose(r.f, with_order(u, 10)) == scaled(q(2), r.f));
}

TEST_CASE("koenigs in approximate mode") {
    const unsigned prec = 256;
    FormalSeries s(1, 10);
    s.set_coeff(mi({1}), Coeff(embed_complex(q(1, 2), prec)));
    s.set_coeff(mi({2}), Coeff(embed_complex(q(1), prec)));
    GermMap u({s});
    LinearizationResult r = koenigs(u, 10);
    GermMap lhs = compose(r.f, with_order(u, 10));
    GermMap rhs = scaled(r.multipliers[0], r.f);
    BigFloat worst = bf_make(prec);
    GermMap diff = germ_sub(lhs, rhs);
    for (const auto& [m, c] : diff.component(0).terms()) {
        BigFloat mag = bc_abs(c.complex());
        if (mag > worst) worst = mag;
    }
    CHECK(worst < decimal_tol(40, prec));
    CHECK(static_cast<double>(bc_abs(
              bc_sub(r.f.component(0).coeff(mi({2})).complex(),
                     embed_complex(q(4), prec)))) == doctest::Approx(0).epsilon(1e-30));
}

TEST_CASE("koenigs rejections") {
    CHECK_THROWS_AS(koenigs(zgerm(4, {q(0), q(1)}), 4), DomainError);
    CHECK_THROWS_AS(koenigs(zgerm(4, {q(1), q(1)}), 4), DomainError);
    CHECK_THROWS_AS(koenigs(zgerm(4, {root_of_unity(5, 1), q(1)}), 4), DomainError);
    // (3+4i)/5 sits on the unit circle without being a root of unity
    Coeff lam = q(3, 5) + q(4, 5) * root_of_unity(4, 1);
    CHECK((lam * conj(lam)).is_one());
    CHECK(root_of_unity_order(lam) == 0);
    CHECK_THROWS_AS(koenigs(zgerm(4, {lam, q(1)}), 4), DomainError);
    CHECK_THROWS_AS(koenigs(GermMap::identity(2, 4), 4), DomainError);
}

TEST_CASE("resonance check: knowns, brute-force agreement, tolerance mode") {
    CHECK(resonance_check({q(1, 2)}, 10).empty());

    for (long m = 1; m <= 8; ++m) {
        auto w = resonance_check({root_of_unity(2 * m, 1)},
                                 static_cast<unsigned>(2 * m + 1));
        bool found = false;
        for (const auto& x : w)
            if (x.s == 0 && x.m == mi({static_cast<unsigned>(2 * m + 1)})) found = true;
        CHECK(found);  // lambda = lambda^{2m+1} for lambda = zeta_{2m}
    }

    auto w24 = resonance_check({q(2), q(4)}, 3);
    REQUIRE(w24.size() == 1);
    CHECK(w24[0].s == 1);
    CHECK(w24[0].m == mi({2, 0}));  // lambda_2 = lambda_1^2

    oracle::CoeffGen gen(0x2E50);
    std::uniform_int_distribution<int> pick(0, 5);
    std::uniform_int_distribution<unsigned> nn(1, 3);
    const Coeff pool[6] = {q(1, 2), q(1, 4), q(2), q(4), q(-1, 2), q(1, 8)};
    for (int it = 0; it < 100; ++it) {
        unsigned n = nn(gen.rng);
        std::vector<Coeff> lam;
        for (unsigned i = 0; i < n; ++i) lam.push_back(pool[pick(gen.rng)]);
        auto got = resonance_check(lam, 6);
        auto expect = oracle::resonance_brute(lam, 6);
        REQUIRE(got.size() == expect.size());
        for (const auto& [s, m] : expect) {
            bool found = false;
            for (const auto& x : got)
                if (x.s == s && x.m.e == m) found = true;
            CHECK(found);
        }
    }

    // approximate multipliers need a tolerance, then find the same witness
    std::vector<Coeff> approx_lam = {Coeff(embed_complex(q(1, 2), 128)),
                                     Coeff(embed_complex(q(1, 4), 128))};
    CHECK_THROWS_AS(resonance_check(approx_lam, 3), DomainError);
    BigFloat tol = decimal_tol(20, 128);
    auto wa = resonance_check(approx_lam, 3, &tol);
    REQUIRE(wa.size() == 1);
    CHECK(wa[0].s == 1);
    CHECK(wa[0].m == mi({2, 0}));
}

TEST_CASE("poincare linearization of a diagonal contracting germ") {
    // u = (x/2 + y^2, y/3)
    FormalSeries f1(2, 4), f2(2, 4);
    f1.set_coeff(mi({1, 0}), q(1, 2));
    f1.set_coeff(mi({0, 2}), q(1));
    f2.set_coeff(mi({0, 1}), q(1, 3));
    GermMap u({f1, f2});
    LinearizationResult r = poincare_linearize(u, 4);
    GermMap u4 = with_order(u, 4);
    CHECK(compose(r.f, u4) == diag_apply(r.multipliers, r.f));
    // f o u o f^{-1} = diag(1/2, 1/3) x
    GermMap conj_u = compose(compose(r.f, u4), compositional_inverse(r.f));
    CHECK(conj_u == diag_apply(r.multipliers, GermMap::identity(2, 4)));

    // already linear: f = identity
    FormalSeries l1(2, 4), l2(2, 4);
    l1.set_coeff(mi({1, 0}), q(1, 2));
    l2.set_coeff(mi({0, 1}), q(1, 3));
    LinearizationResult rl = poincare_linearize(GermMap({l1, l2}), 4);
    CHECK(rl.f == GermMap::identity(2, 4));
}

TEST_CASE("poincare on random non-resonant contracting germs") {
    oracle::CoeffGen gen(0x90CA2E);
    std::uniform_int_distribution<long> den(2, 11);
    int done = 0;
    while (done < 10) {
        std::vector<Coeff> lam = {q(1, den(gen.rng)), q(1, den(gen.rng))};
        if (!resonance_check(lam, 5).empty()) continue;
        GermMap base = gen.germ(2, 5);
        std::vector<FormalSeries> comps;
        for (unsigned s = 0; s < 2; ++s) {
            FormalSeries c = base.component(s);
            c.set_coeff(mi({s == 0 ? 1u : 0u, s == 0 ? 0u : 1u}), lam[s]);
            c.set_coeff(mi({s == 0 ? 0u : 1u, s == 0 ? 1u : 0u}), q(0));
            comps.push_back(std::move(c));
        }
        GermMap u(comps);
        LinearizationResult r = poincare_linearize(u, 5);
        CHECK(compose(r.f, with_order(u, 5)) == diag_apply(r.multipliers, r.f));
        ++done;
    }
}

TEST_CASE("poincare rejections carry reasons") {
    // resonant pair (1/2, 1/4) with a y^2 term
    FormalSeries f1(2, 4), f2(2, 4);
    f1.set_coeff(mi({1, 0}), q(1, 2));
    f1.set_coeff(mi({0, 2}), q(1));
    f2.set_coeff(mi({0, 1}), q(1, 4));
    try {
        poincare_linearize(GermMap({f1, f2}), 4);
        FAIL("expected ResonanceError");
    } catch (const ResonanceError& e) {
        REQUIRE(e.witnesses.size() >= 1);
        CHECK(e.witnesses[0].s == 1);
        CHECK(e.witnesses[0].m == mi({2, 0}));
    }

    // non-diagonal linear part
    FormalSeries g1(2, 3), g2(2, 3);
    g1.set_coeff(mi({1, 0}), q(1, 2));
    g1.set_coeff(mi({0, 1}), q(1, 5));
    g2.set_coeff(mi({0, 1}), q(1, 3));
    CHECK_THROWS_AS(poincare_linearize(GermMap({g1, g2}), 3), DomainError);

    // expanding eigenvalue
    FormalSeries h1(2, 3), h2(2, 3);
    h1.set_coeff(mi({1, 0}), q(2));
    h2.set_coeff(mi({0, 1}), q(1, 3));
    CHECK_THROWS_AS(poincare_linearize(GermMap({h1, h2}), 3), DomainError);
}

TEST_CASE("matrix log: exact nilpotent and approximate diagonal") {
    CHECK(matrix_log(SquareMatrix::identity(3)).is_zero());

    SquareMatrix J = SquareMatrix::identity(2);
    J.at(0, 1) = q(5, 7);
    SquareMatrix L = matrix_log(J);
    CHECK(L.at(0, 1) == q(5, 7));  // X^2 = 0: log(E+X) = X
    CHECK(L.at(0, 0).is_zero());
    CHECK(mat_equal_exact(matrix_exp(L), J));

    // diag(1/2, 3/4) at 256 bits against mpfr's own scalar log
    const unsigned prec = 256;
    SquareMatrix D = mat_to_mode(
        [&] {
            SquareMatrix d(2);
            d.at(0, 0) = q(1, 2);
            d.at(1, 1) = q(3, 4);
            return d;
        }(),
        Mode::approx, prec);
    SquareMatrix LD = matrix_log(D);
    BigFloat lg12 = log(bf_from_rational(make_rational(1, 2), prec));
    BigFloat lg34 = log(bf_from_rational(make_rational(3, 4), prec));
    CHECK(abs(BigFloat(LD.at(0, 0).complex().re - lg12)) < decimal_tol(20, prec));
    CHECK(abs(BigFloat(LD.at(1, 1).complex().re - lg34)) < decimal_tol(20, prec));
    CHECK(abs(LD.at(0, 0).complex().im) < decimal_tol(20, prec));
    CHECK(mat_dist(matrix_exp(LD), D, prec) < decimal_tol(30, prec));

    // rejections
    SquareMatrix far(1);
    far.at(0, 0) = Coeff(embed_complex(q(3), 128));
    CHECK_THROWS_AS(matrix_log(far), DomainError);
    SquareMatrix exact_diag(1);
    exact_diag.at(0, 0) = q(1, 2);
    CHECK_THROWS_AS(matrix_log(exact_diag), ModeError);
}

TEST_CASE("matrix powers: exact fractional, round trips, group law") {
    // exact diagonal: diag(1/4)^{1/2} = diag(1/2), exactly
    SquareMatrix D(1);
    D.at(0, 0) = q(1, 4);
    SquareMatrix H = matrix_power_t(D, q(1, 2));
    CHECK(H.at(0, 0) == q(1, 2));
    CHECK(mat_equal_exact(matrix_power_t(D, q(0)), SquareMatrix::identity(1)));
    CHECK(mat_equal_exact(matrix_power_t(D, q(1)), D));
    // adjoined radical roots square back exactly
    SquareMatrix D2(2);
    D2.at(0, 0) = q(1, 2);
    D2.at(1, 1) = q(1, 3);
    SquareMatrix R = matrix_power_t(D2, q(1, 2));
    CHECK(mat_equal_exact(mat_mul(R, R), D2));

    // exact unipotent: [1 1; 0 1]^{1/2} = [1 1/2; 0 1]
    SquareMatrix U = SquareMatrix::identity(2);
    U.at(0, 1) = q(1);
    SquareMatrix Uh = matrix_power_t(U, q(1, 2));
    CHECK(Uh.at(0, 1) == q(1, 2));
    CHECK(mat_equal_exact(mat_mul(Uh, Uh), U));

    // approximate random family at 256 bits
    const unsigned prec = 256;
    oracle::CoeffGen gen(0x3A7B1);
    for (int it = 0; it < 6; ++it) {
        SquareMatrix X(3);
        for (unsigned i = 0; i < 3; ++i)
            for (unsigned j = 0; j < 3; ++j) {
                Rational r = gen.rational();  // in [-20, 20]
                X.at(i, j) = Coeff(Rational(r / 100));  // |entry| <= 0.2
            }
        SquareMatrix J = mat_to_mode(mat_add(SquareMatrix::identity(3), X),
                                     Mode::approx, prec);
        REQUIRE(closeness_check(J).second);
        CHECK(mat_dist(matrix_exp(matrix_log(J)), J, prec) < decimal_tol(30, prec));
        SquareMatrix half = matrix_power_t(J, q(1, 2));
        CHECK(mat_dist(mat_mul(half, half), J, prec) < decimal_tol(30, prec));
        SquareMatrix a = matrix_power_t(J, q(1, 3));
        SquareMatrix b = matrix_power_t(J, q(1, 6));
        SquareMatrix cmb = matrix_power_t(J, q(1, 2));
        CHECK(mat_dist(mat_mul(a, b), cmb, prec) < decimal_tol(28, prec));
        CHECK(mat_dist(matrix_power_t(J, q(1)), J, prec) < decimal_tol(20, prec));
    }
}
