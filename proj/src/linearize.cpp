#include "germflow/linearize.hpp"

#include <algorithm>

namespace germflow {

// ---------------------------------------------------------------------------
// Matrix plumbing

namespace {

// One approximate entry makes the whole matrix approximate; sparse exact
// zeros are promoted so entrywise arithmetic never mixes modes.
SquareMatrix normalize(const SquareMatrix& m) {
    if (m.mode() == Mode::exact) return m;
    return mat_to_mode(m, Mode::approx, m.prec_bits());
}

std::pair<SquareMatrix, SquareMatrix> harmonize(const SquareMatrix& a,
                                                const SquareMatrix& b) {
    if (a.dim() != b.dim()) throw DomainError("matrix dimension mismatch");
    if (a.mode() == b.mode()) return {normalize(a), normalize(b)};
    unsigned prec = std::max(a.prec_bits(), b.prec_bits());
    return {mat_to_mode(a, Mode::approx, prec), mat_to_mode(b, Mode::approx, prec)};
}

}  // namespace

SquareMatrix mat_add(const SquareMatrix& a0, const SquareMatrix& b0) {
    auto [a, b] = harmonize(a0, b0);
    SquareMatrix r(a.dim());
    for (unsigned i = 0; i < a.dim(); ++i)
        for (unsigned j = 0; j < a.dim(); ++j) r.at(i, j) = a.at(i, j) + b.at(i, j);
    return r;
}

SquareMatrix mat_sub(const SquareMatrix& a0, const SquareMatrix& b0) {
    auto [a, b] = harmonize(a0, b0);
    SquareMatrix r(a.dim());
    for (unsigned i = 0; i < a.dim(); ++i)
        for (unsigned j = 0; j < a.dim(); ++j) r.at(i, j) = a.at(i, j) - b.at(i, j);
    return r;
}

SquareMatrix mat_mul(const SquareMatrix& a0, const SquareMatrix& b0) {
    auto [a, b] = harmonize(a0, b0);
    SquareMatrix r(a.dim());
    Coeff zero = a.mode() == Mode::approx
                     ? to_mode(Coeff(0), Mode::approx, a.prec_bits())
                     : Coeff(0);
    for (unsigned i = 0; i < a.dim(); ++i)
        for (unsigned j = 0; j < a.dim(); ++j) {
            Coeff acc = zero;
            for (unsigned k = 0; k < a.dim(); ++k)
                acc = acc + a.at(i, k) * b.at(k, j);
            r.at(i, j) = acc;
        }
    return r;
}

SquareMatrix mat_scale(const Coeff& c, const SquareMatrix& m0) {
    SquareMatrix m = normalize(m0);
    Coeff f = c;
    if (f.is_exact() != (m.mode() == Mode::exact)) {
        if (f.is_exact())
            f = to_mode(f, Mode::approx, m.prec_bits());
        else
            m = mat_to_mode(m, Mode::approx, f.complex().prec_bits());
    }
    SquareMatrix r(m.dim());
    for (unsigned i = 0; i < m.dim(); ++i)
        for (unsigned j = 0; j < m.dim(); ++j) r.at(i, j) = f * m.at(i, j);
    return r;
}

SquareMatrix mat_to_mode(const SquareMatrix& m, Mode mode, unsigned prec_bits) {
    SquareMatrix r(m.dim());
    for (unsigned i = 0; i < m.dim(); ++i)
        for (unsigned j = 0; j < m.dim(); ++j)
            r.at(i, j) = to_mode(m.at(i, j), mode, prec_bits);
    return r;
}

bool mat_equal_exact(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.dim() != b.dim()) return false;
    for (unsigned i = 0; i < a.dim(); ++i)
        for (unsigned j = 0; j < a.dim(); ++j)
            if (a.at(i, j) != b.at(i, j)) return false;
    return true;
}

BigFloat frobenius_norm(const SquareMatrix& m, unsigned prec_bits) {
    BigFloat acc = bf_make(prec_bits + 32);
    for (unsigned i = 0; i < m.dim(); ++i)
        for (unsigned j = 0; j < m.dim(); ++j) {
            BigComplex z = embed_complex(m.at(i, j), prec_bits + 32);
            acc += z.re * z.re + z.im * z.im;
        }
    return bf_round_to(sqrt(acc), prec_bits);
}

// ---------------------------------------------------------------------------
// Multiplier and closeness

SquareMatrix multiplier(const GermMap& u) {
    SquareMatrix j(u.nvars());
    for (unsigned s = 0; s < u.nvars(); ++s)
        for (unsigned k = 0; k < u.nvars(); ++k) j.at(s, k) = u.linear_coeff(s, k);
    return j;
}

std::pair<BigFloat, bool> closeness_check(const SquareMatrix& J, unsigned prec_bits) {
    SquareMatrix X = mat_sub(J, SquareMatrix::identity(J.dim()));
    BigFloat norm = frobenius_norm(X, prec_bits);
    if (X.mode() == Mode::exact) {
        // norm^2 = sum x*conj(x), an exact real scalar
        Coeff n2(0);
        for (unsigned i = 0; i < X.dim(); ++i)
            for (unsigned j = 0; j < X.dim(); ++j)
                n2 = n2 + X.at(i, j) * conj(X.at(i, j));
        if (n2.is_rational()) return {norm, n2.rational() < 1};
        // non-rational exact norm^2 cannot tie with 1; 512 bits settles it
        BigComplex e = embed_complex(n2, 512);
        return {norm, e.re < 1};
    }
    return {norm, norm < 1};
}

// ---------------------------------------------------------------------------
// Resonance

namespace {

// all exponent vectors of length n and total degree d, in term order
void indices_of_degree(unsigned n, unsigned d, MultiIndex& cur, unsigned pos,
                       std::vector<MultiIndex>& out) {
    if (pos + 1 == n) {
        cur.e[pos] = d;
        out.push_back(cur);
        return;
    }
    for (unsigned k = d + 1; k-- > 0;) {
        cur.e[pos] = k;
        indices_of_degree(n, d - k, cur, pos + 1, out);
    }
}

std::vector<MultiIndex> degree_slice(unsigned n, unsigned d) {
    std::vector<MultiIndex> out;
    MultiIndex cur = MultiIndex::zero(n);
    indices_of_degree(n, d, cur, 0, out);
    return out;
}

// Equality that tolerates incompatible exact representations (cyclotomic vs
// radical) by falling back to a 512-bit numeric comparison.
bool scalar_equal(const Coeff& a, const Coeff& b, const BigFloat* tol) {
    if (a.is_exact() && b.is_exact()) {
        try {
            return a == b;
        } catch (const ModeError&) {
            BigFloat eps = bf_make(512);
            eps = 1;
            for (int i = 0; i < 400; ++i) eps /= 2;
            return abs_diff(a, b, 512) < eps;
        }
    }
    if (tol == nullptr)
        throw DomainError("approximate multipliers need a positive tolerance");
    unsigned prec = 64;
    if (!a.is_exact()) prec = std::max(prec, a.complex().prec_bits());
    if (!b.is_exact()) prec = std::max(prec, b.complex().prec_bits());
    return abs_diff(a, b, prec) < *tol;
}

}  // namespace

std::vector<ResonanceWitness> resonance_check(const std::vector<Coeff>& multipliers,
                                              unsigned max_degree,
                                              const BigFloat* tolerance) {
    if (max_degree < 2) throw DomainError("resonance degree bound must be >= 2");
    if (multipliers.empty()) throw DomainError("no multipliers given");
    if (tolerance != nullptr && !(*tolerance > 0))
        throw DomainError("tolerance must be positive");
    const unsigned n = static_cast<unsigned>(multipliers.size());
    // a single approximate multiplier makes the whole comparison approximate
    std::vector<Coeff> mults = multipliers;
    bool approx = false;
    unsigned prec = 64;
    for (const Coeff& l : mults)
        if (!l.is_exact()) {
            approx = true;
            prec = std::max(prec, l.complex().prec_bits());
        }
    if (approx)
        for (Coeff& l : mults) l = to_mode(l, Mode::approx, prec);
    std::vector<ResonanceWitness> out;
    for (unsigned d = 2; d <= max_degree; ++d) {
        for (const MultiIndex& m : degree_slice(n, d)) {
            Coeff lm = Coeff(1);
            bool first = true;
            for (unsigned i = 0; i < n; ++i) {
                if (m.e[i] == 0) continue;
                Coeff p = pow(mults[i], static_cast<long>(m.e[i]));
                lm = first ? p : lm * p;
                first = false;
            }
            for (unsigned s = 0; s < n; ++s)
                if (scalar_equal(mults[s], lm, tolerance))
                    out.push_back(ResonanceWitness{s, m});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Koenigs (one variable)

namespace {

bool exact_on_unit_circle(const Coeff& lam) {
    if (lam.is_rational()) {
        Rational a = lam.rational();
        return a == 1 || a == -1;
    }
    if (lam.is_radical()) return false;  // nontrivial radicals are never +-1
    return (lam * conj(lam)).is_one();
}

// |a| < 1 for an exact scalar. Rational modulus decides exactly; otherwise
// |a|^2 - 1 is a nonzero algebraic number and 512 bits settle its sign.
bool exact_abs_less_one(const Coeff& a) {
    Coeff n2 = a * conj(a);
    if (n2.is_rational()) return n2.rational() < 1;
    return embed_complex(n2, 512).re < 1;
}

}  // namespace

LinearizationResult koenigs(const GermMap& u, unsigned N) {
    if (u.nvars() != 1)
        throw DomainError("koenigs linearization is one-variable (see poincare)");
    if (N < 1) throw DomainError("order must be >= 1");
    Coeff lam = u.linear_coeff(0, 0);
    const Mode mode = u.mode();
    const unsigned prec = mode == Mode::approx ? multiplier(u).prec_bits() : 64;

    if (mode == Mode::exact) {
        if (lam.is_zero()) throw DomainError("zero multiplier has no linearization");
        if (lam.is_one())
            throw DomainError(
                "multiplier 1 is parabolic: no Koenigs map, use the flow generator");
        if (root_of_unity_order(lam) != 0)
            throw DomainError("root-of-unity multiplier: small divisors vanish");
        if (exact_on_unit_circle(lam))
            throw DomainError("unit-circle multiplier: Koenigs recursion diverges");
    } else {
        BigFloat a = bc_abs(embed_complex(lam, prec));
        if (a == 0) throw DomainError("zero multiplier has no linearization");
        if (a == 1) throw DomainError("unit-circle multiplier: Koenigs recursion diverges");
    }

    auto in_mode = [&](const Coeff& c) { return to_mode(c, mode, prec); };
    const FormalSeries w = with_order(u.component(0), N);

    // powers of u and the Koenigs coefficients c_1 = 1, c_k from the recursion
    std::vector<FormalSeries> upow;
    upow.push_back(w);
    for (unsigned j = 2; j < std::max(N, 2u); ++j)
        upow.push_back(series_mul(upow.back(), w));

    std::vector<Coeff> c(N + 1, Coeff(0));
    c[1] = in_mode(Coeff(1));
    for (unsigned k = 2; k <= N; ++k) {
        Coeff rhs = in_mode(Coeff(0));
        MultiIndex zk(std::vector<unsigned>{k});
        for (unsigned j = 1; j < k; ++j)
            rhs = rhs + c[j] * in_mode(upow[j - 1].coeff(zk));
        c[k] = rhs / (lam - pow(lam, static_cast<long>(k)));
    }

    FormalSeries f(1, N);
    for (unsigned k = 1; k <= N; ++k)
        f.set_coeff(MultiIndex(std::vector<unsigned>{k}), c[k]);
    return LinearizationResult{GermMap({f}), {lam}};
}

// ---------------------------------------------------------------------------
// Poincare linearization (diagonal contracting non-resonant)

LinearizationResult poincare_linearize(const GermMap& u, unsigned N) {
    const unsigned n = u.nvars();
    if (N < 1) throw DomainError("order must be >= 1");
    SquareMatrix J = multiplier(u);
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j)
            if (i != j && !J.at(i, j).is_zero())
                throw DomainError("linearization requires a diagonal linear part");

    const Mode mode = u.mode();
    const unsigned prec = mode == Mode::approx ? J.prec_bits() : 64;
    auto in_mode = [&](const Coeff& c) { return to_mode(c, mode, prec); };

    std::vector<Coeff> lam;
    for (unsigned i = 0; i < n; ++i) lam.push_back(in_mode(J.at(i, i)));
    for (const Coeff& l : lam) {
        bool contracting =
            l.is_exact() ? (!l.is_zero() && exact_abs_less_one(l))
                         : [&] {
                               BigFloat a = bc_abs(l.complex());
                               return a > 0 && a < 1;
                           }();
        if (!contracting)
            throw DomainError("linearization requires 0 < |lambda_i| < 1");
    }

    // no-resonance precondition, witnesses reported on failure
    BigFloat tol = bf_make(prec);
    if (mode == Mode::approx) {
        tol = 1;
        for (unsigned i = 0; i < prec / 2; ++i) tol /= 2;  // 2^-(prec/2)
    }
    auto witnesses = resonance_check(lam, N, mode == Mode::approx ? &tol : nullptr);
    if (!witnesses.empty())
        throw ResonanceError("resonant multipliers obstruct linearization", witnesses);

    std::vector<FormalSeries> w;
    for (unsigned s = 0; s < n; ++s) w.push_back(with_order(u.component(s), N));

    // f_s = x_s + g_s solved degree by degree from
    //   delta_{s,m} (lambda_s - lambda^m) = [u_s]_m + [g_s(u)]_m  (|m'| < |m|)
    std::vector<FormalSeries> g(n, FormalSeries(n, N));
    for (unsigned d = 2; d <= N; ++d) {
        for (unsigned s = 0; s < n; ++s) {
            FormalSeries comp = g[s].empty() ? FormalSeries(n, N)
                                             : compose_series(g[s], w);
            for (const MultiIndex& m : degree_slice(n, d)) {
                Coeff known = in_mode(w[s].coeff(m)) + in_mode(comp.coeff(m));
                if (known.is_zero()) continue;
                Coeff lm = in_mode(Coeff(1));
                for (unsigned i = 0; i < n; ++i)
                    if (m.e[i] > 0) lm = lm * pow(lam[i], static_cast<long>(m.e[i]));
                g[s].set_coeff(m, known / (lam[s] - lm));
            }
        }
    }

    std::vector<FormalSeries> comps;
    for (unsigned s = 0; s < n; ++s)
        comps.push_back(series_add(FormalSeries::variable(n, N, s), g[s]));
    return LinearizationResult{GermMap(std::move(comps)), lam};
}

// ---------------------------------------------------------------------------
// Matrix logarithm / exponential / fractional power

namespace {

BigFloat series_tolerance(unsigned prec) {
    BigFloat t = bf_make(prec);
    t = 1;
    for (unsigned i = 0; i + 8 < prec; ++i) t /= 2;  // 2^-(prec-8)
    return t;
}

bool is_nilpotent(const SquareMatrix& X) {
    SquareMatrix p = X;
    for (unsigned k = 1; k < X.dim(); ++k) p = mat_mul(p, X);
    return p.is_zero();
}

}  // namespace

SquareMatrix matrix_log(const SquareMatrix& J0) {
    SquareMatrix J = normalize(J0);
    const unsigned n = J.dim();
    SquareMatrix X = mat_sub(J, SquareMatrix::identity(n));
    if (X.is_zero()) return X;

    if (J.mode() == Mode::exact) {
        if (!is_nilpotent(X))
            throw ModeError(
                "exact matrix logarithm needs J - E nilpotent; use approximate mode");
        SquareMatrix L(n);
        SquareMatrix term = X;
        for (unsigned k = 1; k <= n; ++k) {
            SquareMatrix contrib = mat_scale(
                Coeff(make_rational(BigInt(k % 2 == 1 ? 1 : -1), BigInt(k))), term);
            L = mat_add(L, contrib);
            if (k < n) term = mat_mul(term, X);
        }
        return L;
    }

    auto [norm, ok] = closeness_check(J, J.prec_bits());
    if (!ok)
        throw DomainError("matrix logarithm requires ||J - E|| < 1");
    const unsigned prec = J.prec_bits();
    const BigFloat tol = series_tolerance(prec);
    SquareMatrix L = mat_to_mode(SquareMatrix(n), Mode::approx, prec);
    SquareMatrix term = X;
    for (unsigned k = 1; k <= 10000; ++k) {
        Coeff f = to_mode(Coeff(make_rational(BigInt(k % 2 == 1 ? 1 : -1), BigInt(k))),
                          Mode::approx, prec);
        SquareMatrix contrib = mat_scale(f, term);
        L = mat_add(L, contrib);
        if (frobenius_norm(contrib, prec) < tol) return L;
        term = mat_mul(term, X);
    }
    throw ConvergenceError("matrix logarithm did not converge within 10000 terms");
}

SquareMatrix matrix_exp(const SquareMatrix& L0) {
    SquareMatrix L = normalize(L0);
    const unsigned n = L.dim();
    if (L.mode() == Mode::exact) {
        if (!L.is_zero() && !is_nilpotent(L))
            throw ModeError(
                "exact matrix exponential needs a nilpotent argument; use "
                "approximate mode");
        SquareMatrix R = SquareMatrix::identity(n);
        SquareMatrix term = SquareMatrix::identity(n);
        for (unsigned k = 1; k <= n; ++k) {
            term = mat_scale(Coeff(make_rational(BigInt(1), BigInt(k))),
                             mat_mul(term, L));
            R = mat_add(R, term);
        }
        return R;
    }

    const unsigned prec = L.prec_bits();
    const BigFloat tol = series_tolerance(prec);
    SquareMatrix R = mat_to_mode(SquareMatrix::identity(n), Mode::approx, prec);
    SquareMatrix term = R;
    for (unsigned k = 1; k <= 10000; ++k) {
        term = mat_scale(to_mode(Coeff(make_rational(BigInt(1), BigInt(k))),
                                 Mode::approx, prec),
                         mat_mul(term, L));
        R = mat_add(R, term);
        if (frobenius_norm(term, prec) < tol) return R;
    }
    throw ConvergenceError("matrix exponential did not converge within 10000 terms");
}

SquareMatrix matrix_power_t(const SquareMatrix& J0, const Coeff& t) {
    SquareMatrix J = normalize(J0);
    if (J.mode() == Mode::exact && t.is_exact()) {
        // Exact path 1: diagonal J with rational t = a/b, entrywise real
        // b-th roots adjoined as radicals when needed.
        bool diagonal = true;
        for (unsigned i = 0; i < J.dim() && diagonal; ++i)
            for (unsigned j = 0; j < J.dim(); ++j)
                if (i != j && !J.at(i, j).is_zero()) {
                    diagonal = false;
                    break;
                }
        if (diagonal && t.is_rational()) {
            bool rational_diag = true;
            for (unsigned i = 0; i < J.dim(); ++i)
                if (!J.at(i, i).is_rational()) rational_diag = false;
            if (rational_diag) {
                Rational tr = t.rational();
                BigInt a = numerator(tr), b = denominator(tr);
                SquareMatrix R = SquareMatrix::identity(J.dim());
                for (unsigned i = 0; i < J.dim(); ++i) {
                    Rational base = J.at(i, i).rational();
                    if (base == 0) throw DomainError("zero diagonal entry has no power");
                    Coeff num = pow(Coeff(base), static_cast<long>(a));
                    R.at(i, i) = radical_root(num.rational(),
                                              static_cast<unsigned>(b));
                }
                return R;
            }
        }
        // Exact path 2: unipotent J, exact log/exp series terminate.
        SquareMatrix L = matrix_log(J);  // throws ModeError if not nilpotent
        return matrix_exp(mat_scale(t, L));
    }

    SquareMatrix L = matrix_log(J);
    Coeff tt = t;
    if (tt.is_exact())
        tt = to_mode(tt, Mode::approx, L.prec_bits());
    else if (L.mode() == Mode::exact)
        L = mat_to_mode(L, Mode::approx, tt.complex().prec_bits());
    return matrix_exp(mat_scale(tt, L));
}

}  // namespace germflow
