#include "germflow/flow.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace germflow {

// ---------------------------------------------------------------------------
// Mode plumbing. Flow evaluation constantly meets mixed inputs (an exact germ
// with an approximate time, structural-zero coefficients next to complex
// floats), so every entry point harmonizes its operands once, up front.

namespace {

BigFloat series_tolerance(unsigned prec) {
    BigFloat t = bf_make(prec);
    t = 1;
    for (unsigned i = 0; i + 8 < prec; ++i) t /= 2;  // 2^-(prec-8)
    return t;
}

unsigned coeff_prec(const Coeff& c) {
    return c.is_exact() ? 64 : c.complex().prec_bits();
}

// Largest precision among the approximate coefficients; 64 if all exact.
unsigned components_prec(const std::vector<FormalSeries>& comps) {
    unsigned p = 64;
    for (const auto& comp : comps)
        for (const auto& [m, c] : comp.terms())
            if (!c.is_exact()) p = std::max(p, c.complex().prec_bits());
    return p;
}

Mode components_mode(const std::vector<FormalSeries>& comps) {
    for (const auto& comp : comps)
        if (comp.mode() == Mode::approx) return Mode::approx;
    return Mode::exact;
}

FormalSeries series_to_mode(const FormalSeries& s, Mode mode, unsigned prec) {
    if (mode == Mode::exact) return s;
    FormalSeries out(s.nvars(), s.order());
    for (const auto& [m, c] : s.terms()) out.set_coeff(m, to_mode(c, mode, prec));
    return out;
}

GermMap germ_to_mode(const GermMap& g, Mode mode, unsigned prec) {
    if (mode == Mode::exact) return g;
    std::vector<FormalSeries> comps;
    comps.reserve(g.nvars());
    for (const auto& comp : g.components())
        comps.push_back(series_to_mode(comp, mode, prec));
    return GermMap(std::move(comps));
}

GermMap identity_in_mode(unsigned n, unsigned order, Mode mode, unsigned prec) {
    return germ_to_mode(GermMap::identity(n, order), mode, prec);
}

// c equals the integer v, decided without a tolerance: exact comparison for
// exact variants, bitwise part comparison for complex floats.
bool coeff_equals_int(const Coeff& c, long v) {
    if (c.is_exact()) return c == Coeff(v);
    return c.complex().re == v && c.complex().im == 0;
}

long checked_long(const BigInt& z, const char* what) {
    if (z < std::numeric_limits<long>::min() || z > std::numeric_limits<long>::max())
        throw DomainError(std::string(what) + " is too large");
    return static_cast<long>(z);
}

Rational rational_pow(const Rational& q, long a) {
    if (a == 0) return Rational(1);
    if (a < 0) {
        if (q == 0) throw DivisionByZero("0 has no negative power");
        return rational_pow(Rational(1) / q, -a);
    }
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    const auto e = static_cast<unsigned long>(a);
    return make_rational(pow(numerator(q), e), pow(denominator(q), e));
}

}  // namespace

// ---------------------------------------------------------------------------
// FlowFamily

FlowFamily::FlowFamily(Hyperbolic h, unsigned order)
    : kind_(std::move(h)), order_(order) {
    const Hyperbolic& H = std::get<Hyperbolic>(kind_);
    if (H.multipliers.size() != H.f.nvars())
        throw DomainError("flow family needs one multiplier per variable");
    order_ = std::min(order_, H.f.order());
}

FlowFamily::FlowFamily(Parabolic p, unsigned order)
    : kind_(std::move(p)), order_(order) {
    order_ = std::min(order_, std::get<Parabolic>(kind_).v.order());
}

// ---------------------------------------------------------------------------
// The Lie series

namespace {

// D_v(g) = sum_i v_i dg/dx_i, exact to `order` when g is: v has no constant
// term, so the derivative coefficients lost at degree `order` only influence
// higher degrees of the product.
FormalSeries lie_derivative(const FormalSeries& g,
                            const std::vector<FormalSeries>& vcomps,
                            unsigned order) {
    FormalSeries acc(g.nvars(), order);
    for (unsigned i = 0; i < vcomps.size(); ++i) {
        if (vcomps[i].empty()) continue;
        FormalSeries dg = with_order(derive(g, i), order);
        if (dg.empty()) continue;
        acc = series_add(acc, series_mul(vcomps[i], dg));
    }
    return acc;
}

BigFloat max_abs_coeff(const std::vector<FormalSeries>& comps, unsigned prec) {
    BigFloat worst = bf_make(prec);
    for (const auto& comp : comps)
        for (const auto& [m, c] : comp.terms()) {
            BigFloat a = bc_abs(c.complex());
            if (a > worst) worst = a;
        }
    return worst;
}

}  // namespace

GermMap exp_flow(const VectorFieldGerm& v, const Coeff& t, unsigned N) {
    const unsigned n = v.nvars();
    const unsigned order = std::min(N, v.order());

    Mode mode = t.mode();
    unsigned prec = std::max(coeff_prec(t), components_prec(v.components()));
    if (components_mode(v.components()) == Mode::approx) mode = Mode::approx;

    if (order == 0 || t.is_zero()) return identity_in_mode(n, order, mode, prec);

    bool linear_is_zero = true;
    for (unsigned s = 0; s < n && linear_is_zero; ++s)
        for (unsigned j = 0; j < n; ++j)
            if (!v.component(s).coeff(MultiIndex::unit(n, j)).is_zero()) {
                linear_is_zero = false;
                break;
            }
    if (!linear_is_zero && mode == Mode::exact)
        throw NotRepresentable(
            "the flow of a vector field with a nonzero linear part involves "
            "exponentials; use approximate coefficients");

    const Coeff tt = to_mode(t, mode, prec);
    std::vector<FormalSeries> vv;
    vv.reserve(n);
    for (const auto& comp : v.components())
        vv.push_back(series_to_mode(truncate(comp, order), mode, prec));

    std::vector<FormalSeries> result = identity_in_mode(n, order, mode, prec).components();
    std::vector<FormalSeries> term = result;

    // scale after k steps is t^k / k!, updated multiplicatively
    Coeff scale = to_mode(Coeff(1), mode, prec);
    const BigFloat eps = series_tolerance(prec);
    unsigned small_streak = 0;
    for (unsigned long k = 1;; ++k) {
        bool all_empty = true;
        for (unsigned s = 0; s < n; ++s) {
            term[s] = lie_derivative(term[s], vv, order);
            if (!term[s].empty()) all_empty = false;
        }
        // with a zero linear part each step raises the minimum degree, so the
        // series empties structurally after at most `order` steps
        if (all_empty) break;
        scale = div_big(scale * tt, BigInt(k));

        BigFloat contrib_norm = bf_make(prec);
        for (unsigned s = 0; s < n; ++s) {
            FormalSeries contrib = scalar_mul(scale, term[s]);
            result[s] = series_add(result[s], contrib);
            if (!linear_is_zero) {
                BigFloat a = max_abs_coeff({contrib}, prec);
                if (a > contrib_norm) contrib_norm = a;
            }
        }
        if (linear_is_zero) continue;

        // infinite series: stop only after two consecutive negligible terms,
        // since t^k/k! need not decrease from the start
        if (contrib_norm < eps) {
            if (++small_streak >= 2) break;
        } else {
            small_streak = 0;
        }
        if (k >= 10000)
            throw ConvergenceError("flow series did not settle within 10000 terms");
    }
    return GermMap(std::move(result));
}

GermMap exp_map(const VectorFieldGerm& v, unsigned N) {
    return exp_flow(v, Coeff(1), N);
}

VectorFieldGerm formal_log(const GermMap& u, unsigned N) {
    const unsigned n = u.nvars();
    const unsigned order = std::min(N, u.order());
    const Mode mode = u.mode();
    const unsigned prec = components_prec(u.components());

    for (unsigned s = 0; s < n; ++s)
        for (unsigned j = 0; j < n; ++j)
            if (!coeff_equals_int(u.linear_coeff(s, j), s == j ? 1 : 0))
                throw DomainError(
                    "the formal generator needs a germ tangent to the identity; "
                    "use flow_family for general linear parts");

    // Triangular solve: with v correct below degree d, exp_map(v) matches u
    // below degree d and the degree-d defect is exactly the missing part of v
    // (it enters the Lie series only through the k = 1 term).
    std::vector<FormalSeries> vcomps(n, FormalSeries(n, order));
    for (unsigned d = 2; d <= order; ++d) {
        GermMap w = germ_to_mode(exp_map(VectorFieldGerm(vcomps), order), mode, prec);
        GermMap r = germ_sub(u, w);
        for (unsigned s = 0; s < n; ++s)
            for (const auto& [m, c] : r.component(s).terms())
                if (m.degree() == d) vcomps[s].set_coeff(m, c);
    }
    return VectorFieldGerm(std::move(vcomps));
}

// ---------------------------------------------------------------------------
// Flow families

FlowFamily flow_family(const GermMap& u, unsigned N) {
    const unsigned n = u.nvars();
    const unsigned order = std::min(N, u.order());

    bool tangent_to_identity = true;
    for (unsigned s = 0; s < n && tangent_to_identity; ++s)
        for (unsigned j = 0; j < n; ++j)
            if (!coeff_equals_int(u.linear_coeff(s, j), s == j ? 1 : 0)) {
                tangent_to_identity = false;
                break;
            }
    if (tangent_to_identity)
        return FlowFamily(Parabolic{formal_log(u, order)}, order);

    if (n == 1) {
        const Coeff lam = u.linear_coeff(0, 0);
        if (lam.is_exact() && root_of_unity_order(lam) != 0)
            throw DomainError(
                "root-of-unity multiplier: no flow embedding; iterative_root "
                "can certify the obstruction");
        LinearizationResult r = koenigs(truncate(u, order), order);
        return FlowFamily(Hyperbolic{std::move(r.f), std::move(r.multipliers)}, order);
    }

    for (unsigned s = 0; s < n; ++s)
        for (unsigned j = 0; j < n; ++j)
            if (s != j && !u.linear_coeff(s, j).is_zero())
                throw DomainError("flow embedding needs a diagonal linear part");
    LinearizationResult r = poincare_linearize(truncate(u, order), order);
    return FlowFamily(Hyperbolic{std::move(r.f), std::move(r.multipliers)}, order);
}

namespace {

// lambda^t in the exact tower. Integer t works for every exact scalar;
// fractional t = a/b needs rational lambda and takes the real b-th root of
// lambda, adjoining a radical generator when the root is irrational. The
// generator is adjoined for lambda itself (not lambda^a) so that every
// exponent with the same denominator lands in the same extension field and
// group-law arithmetic between them stays internal.
Coeff exact_scalar_power(const Coeff& lam, const Coeff& t) {
    if (!t.is_rational())
        throw NotRepresentable("flow exponent must be rational in exact mode");
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    const Rational& tq = t.rational();
    const long a = checked_long(numerator(tq), "flow exponent numerator");
    const BigInt den = denominator(tq);
    if (den == 1) return pow(lam, a);
    if (!lam.is_rational())
        throw NotRepresentable(
            "fractional power of a non-rational multiplier is not "
            "representable exactly; use approximate mode");
    const long b = checked_long(den, "flow exponent denominator");
    return pow(radical_root(lam.rational(), static_cast<unsigned>(b)), a);
}

}  // namespace

GermMap evaluate_flow(const FlowFamily& F, const Coeff& t, unsigned N) {
    const unsigned order = std::min(N, F.order());

    if (!F.is_hyperbolic()) return exp_flow(F.parabolic().v, t, order);

    const Hyperbolic& H = F.hyperbolic();
    const unsigned n = H.f.nvars();

    Mode mode = t.mode();
    unsigned prec = std::max(coeff_prec(t), components_prec(H.f.components()));
    if (components_mode(H.f.components()) == Mode::approx) mode = Mode::approx;
    for (const Coeff& lam : H.multipliers) {
        if (!lam.is_exact()) mode = Mode::approx;
        prec = std::max(prec, coeff_prec(lam));
    }

    if (t.is_zero()) return identity_in_mode(n, order, mode, prec);

    std::vector<Coeff> mu(n);
    if (mode == Mode::exact) {
        for (unsigned s = 0; s < n; ++s)
            mu[s] = exact_scalar_power(H.multipliers[s], t);
    } else {
        const Coeff tc = to_mode(t, Mode::approx, prec);
        for (unsigned s = 0; s < n; ++s) {
            const Coeff lam = to_mode(H.multipliers[s], Mode::approx, prec);
            mu[s] = Coeff(bc_exp(bc_mul(tc.complex(), bc_log(lam.complex()))));
        }
    }

    const GermMap f = germ_to_mode(truncate(H.f, order), mode, prec);
    std::vector<FormalSeries> scaled;
    scaled.reserve(n);
    for (unsigned s = 0; s < n; ++s)
        scaled.push_back(scalar_mul(mu[s], f.component(s)));
    return compose(compositional_inverse(f), GermMap(std::move(scaled)));
}

GermMap verify_group_law(const FlowFamily& F, const Coeff& s, const Coeff& t,
                         unsigned N) {
    Coeff sum;
    if (s.mode() == t.mode()) {
        sum = s + t;
    } else {
        const unsigned prec = std::max(coeff_prec(s), coeff_prec(t));
        sum = to_mode(s, Mode::approx, prec) + to_mode(t, Mode::approx, prec);
    }
    GermMap left = compose(evaluate_flow(F, s, N), evaluate_flow(F, t, N));
    return germ_sub(left, evaluate_flow(F, sum, N));
}

// ---------------------------------------------------------------------------
// Iterative roots

namespace {

// The digit-th k-th root of lam. Exact roots are enumerated in the tower:
// rational lam via the real radical root times a root of unity, a
// root-of-unity lam inside the k-times-finer cyclotomic field. Branches that
// would mix a radical with an irrational root of unity are refused.
Coeff kth_root_branch(const Coeff& lam, unsigned k, long digit, Mode mode,
                      unsigned prec) {
    if (mode == Mode::approx) {
        BigComplex L = bc_log(to_mode(lam, Mode::approx, prec).complex());
        BigFloat angle = bf_pi(prec);
        angle *= 2 * digit;
        L.im += angle;
        BigComplex divisor = bc_make(prec);
        divisor.re = static_cast<long>(k);
        return Coeff(bc_exp(bc_div(L, divisor)));
    }
    if (lam.is_rational()) {
        const Rational& q = lam.rational();
        const bool negative = q < 0;
        const Coeff r = radical_root(negative ? Rational(-q) : q, k);
        const Coeff z = negative ? root_of_unity(2L * k, 2 * digit + 1)
                                 : root_of_unity(k, digit);
        if (z.is_rational() || r.is_rational()) return z * r;
        throw NotRepresentable(
            "this root branch mixes a radical with a root of unity; use "
            "approximate mode");
    }
    const unsigned ord = root_of_unity_order(lam);
    if (ord != 0) {
        for (unsigned j = 1; j <= ord; ++j) {
            if (std::gcd(j, ord) != 1) continue;
            if (root_of_unity(ord, j) == lam)
                return root_of_unity(static_cast<long>(ord) * k,
                                     j + static_cast<long>(ord) * digit);
        }
    }
    throw NotRepresentable(
        "k-th root of this multiplier is not representable exactly; use "
        "approximate mode");
}

// Multi-indices of total degree d in the canonical term order; only the
// one- and two-variable charts are needed here.
std::vector<MultiIndex> degree_indices(unsigned n, unsigned d) {
    std::vector<MultiIndex> out;
    if (n == 1) {
        out.emplace_back(std::vector<unsigned>{d});
        return out;
    }
    for (unsigned i = 0; i <= d; ++i)
        out.emplace_back(std::vector<unsigned>{d - i, i});
    return out;
}

}  // namespace

namespace {

// A coefficient whose equation degenerated to 0 = 0: any value satisfies the
// composition identity at its own degree, so it is a parameter of the
// candidate, not a forced value.
struct FreeSlot {
    unsigned component;
    MultiIndex index;
    unsigned degree;
};

int find_free(const std::vector<FreeSlot>& frees, unsigned s, const MultiIndex& m) {
    for (unsigned i = 0; i < frees.size(); ++i)
        if (frees[i].component == s && frees[i].index == m)
            return static_cast<int>(i);
    return -1;
}

}  // namespace

RootResult iterative_root(const GermMap& u, unsigned k, unsigned N, long branch) {
    if (k < 2) throw DomainError("root exponent k must be >= 2");
    const unsigned n = u.nvars();
    if (n > 2)
        throw DomainError("iterative roots are implemented for 1 and 2 variables");
    const unsigned order = std::min(N, u.order());
    if (order < 1) throw DomainError("order must be >= 1");
    const Mode mode = u.mode();
    const unsigned prec = components_prec(u.components());

    long nbranches = 1;
    for (unsigned s = 0; s < n; ++s) nbranches *= static_cast<long>(k);
    if (branch < 0 || branch >= nbranches)
        throw DomainError("branch index out of range (one base-k digit per variable)");

    for (unsigned s = 0; s < n; ++s)
        for (unsigned j = 0; j < n; ++j)
            if (s != j && !u.linear_coeff(s, j).is_zero())
                throw DomainError("iterative root needs a diagonal linear part");

    std::vector<Coeff> mu(n);
    long digits = branch;
    for (unsigned s = 0; s < n; ++s) {
        const Coeff lam = u.linear_coeff(s, s);
        if (lam.is_zero())
            throw DomainError("zero multiplier: not a diffeomorphism germ");
        mu[s] = kth_root_branch(lam, k, digits % k, mode, prec);
        digits /= k;
    }

    // the new coefficient c of x^m in component s enters the k-fold
    // composition once per slot: alpha = sum_{j=1}^{k} mu_s^{k-j} (mu^m)^{j-1}
    auto alpha_at = [&](unsigned s, const MultiIndex& m) {
        Coeff mum = to_mode(Coeff(1), mode, prec);
        for (unsigned i = 0; i < n; ++i)
            if (m.e[i]) mum = mum * pow(mu[i], m.e[i]);
        Coeff alpha = to_mode(Coeff(0), mode, prec);
        for (unsigned j = 1; j <= k; ++j)
            alpha = alpha + pow(mu[s], static_cast<long>(k - j)) *
                                pow(mum, static_cast<long>(j - 1));
        return alpha;
    };

    auto linear_candidate = [&] {
        std::vector<FormalSeries> comps;
        comps.reserve(n);
        for (unsigned s = 0; s < n; ++s) {
            FormalSeries c(n, order);
            c.set_coeff(MultiIndex::unit(n, s), mu[s]);
            comps.push_back(std::move(c));
        }
        return comps;
    };

    // k-fold composition of the candidate truncated at degree d; the
    // candidate's own degree-d coefficients are still zero when this is
    // called, so the degree-d coefficients of the result are the "known"
    // parts of the composition equations.
    auto compose_k = [&](const std::vector<FormalSeries>& comps, unsigned d) {
        const GermMap gd = truncate(GermMap(comps), d);
        GermMap P = gd;
        for (unsigned j = 1; j < k; ++j) P = compose(gd, P);
        return P;
    };

    auto defect = [&](const GermMap& P, unsigned s, const MultiIndex& m) {
        return to_mode(u.component(s).coeff(m), mode, prec) -
               to_mode(P.component(s).coeff(m), mode, prec);
    };

    // In approximate mode a vanishing alpha cannot be asserted bitwise:
    // rounding leaves residue where the exact value would be zero. Anything
    // below the working tolerance is the degenerate case, and only exact
    // arithmetic can settle whether it frees or blocks the coefficient.
    const BigFloat approx_tol = series_tolerance(prec);
    auto alpha_vanishes = [&](const Coeff& a) {
        if (mode == Mode::exact) return a.is_zero();
        return !(bc_abs(a.complex()) > approx_tol);
    };

    // Discovery pass: solve degree by degree with every free coefficient held
    // at zero, until the first blocked equation (alpha = 0, beta != 0).
    std::vector<FormalSeries> gcomps = linear_candidate();
    std::vector<ForcedCoefficient> prefix;
    std::vector<FreeSlot> frees;
    bool blocked = false;
    unsigned blocked_degree = 0, blocked_comp = 0;
    MultiIndex blocked_index;
    Coeff blocked_alpha, blocked_beta;

    for (unsigned d = 2; d <= order && !blocked; ++d) {
        const GermMap P = compose_k(gcomps, d);
        for (unsigned s = 0; s < n && !blocked; ++s) {
            for (const MultiIndex& m : degree_indices(n, d)) {
                const Coeff alpha = alpha_at(s, m);
                const Coeff beta = defect(P, s, m);
                if (alpha_vanishes(alpha)) {
                    if (mode == Mode::approx)
                        throw DomainError(
                            "degenerate root equation: obstruction "
                            "certificates need exact coefficients");
                    if (beta.is_zero()) {
                        frees.push_back(FreeSlot{s, m, d});
                        continue;
                    }
                    blocked = true;
                    blocked_degree = d;
                    blocked_comp = s;
                    blocked_index = m;
                    blocked_alpha = alpha;
                    blocked_beta = beta;
                    break;
                }
                const Coeff c = beta / alpha;
                gcomps[s].set_coeff(m, c);
                prefix.push_back(ForcedCoefficient{s, m, c});
            }
        }
    }

    if (!blocked) return GermMap(std::move(gcomps));

    // The blocked equation 0 * c = beta refutes the root only if beta does
    // not depend on the free coefficients below it. The defect coefficient is
    // a polynomial in each free of degree at most (d-1)/(d'-1) (a degree-d'
    // term used j times contributes total degree >= j(d'-1)+1), so agreement
    // on a full integer grid of that size proves it constant. Free slots at
    // the blocked degree itself cannot reach a different degree-d index at
    // all and are skipped.
    std::vector<FreeSlot> lower;
    for (const FreeSlot& f : frees)
        if (f.degree < blocked_degree) lower.push_back(f);

    if (!lower.empty()) {
        unsigned long grid = 1;
        std::vector<unsigned> bound(lower.size());
        for (unsigned i = 0; i < lower.size(); ++i) {
            bound[i] = (blocked_degree - 1) / (lower[i].degree - 1);
            grid *= bound[i] + 1;
        }
        if (grid > 256)
            throw DomainError(
                "too many free coefficients precede the blocked degree; the "
                "obstruction cannot be certified");

        // replay the forced solve for one assignment of the free slots
        auto replay_defect = [&](const std::vector<Coeff>& vals) {
            std::vector<FormalSeries> comps = linear_candidate();
            for (unsigned d = 2; d < blocked_degree; ++d) {
                const GermMap P = compose_k(comps, d);
                for (unsigned s = 0; s < n; ++s) {
                    for (const MultiIndex& m : degree_indices(n, d)) {
                        const int fi = find_free(lower, s, m);
                        if (fi >= 0) {
                            comps[s].set_coeff(m, vals[fi]);
                            continue;
                        }
                        comps[s].set_coeff(m, defect(P, s, m) / alpha_at(s, m));
                    }
                }
            }
            return defect(compose_k(comps, blocked_degree), blocked_comp,
                          blocked_index);
        };

        std::vector<unsigned> at(lower.size(), 0);
        for (;;) {
            std::vector<Coeff> vals(lower.size());
            for (unsigned i = 0; i < lower.size(); ++i)
                vals[i] = Coeff(static_cast<long>(at[i]));
            if (!(replay_defect(vals) == blocked_beta))
                throw DomainError(
                    "the blocked coefficient depends on free lower-degree "
                    "coefficients; the obstruction is not conclusive");
            unsigned i = 0;
            while (i < at.size() && at[i] == bound[i]) at[i++] = 0;
            if (i == at.size()) break;
            ++at[i];
        }
    }

    return ObstructionCertificate{blocked_degree, blocked_alpha, blocked_beta,
                                  std::move(prefix), branch};
}

GermMap example2_germ(unsigned m, unsigned N) {
    if (m < 1) throw DomainError("the model germ needs m >= 1");
    if (N < 2 * m + 1)
        throw DomainError("order must reach total degree 2m+1");

    // (z - zbar)/(2i) = -(i/2) z + (i/2) zbar
    const Coeff i_half = root_of_unity(4, 1) * Coeff(make_rational(1, 2));
    FormalSeries s(2, N);
    s.set_coeff(MultiIndex(std::vector<unsigned>{1, 0}), -i_half);
    s.set_coeff(MultiIndex(std::vector<unsigned>{0, 1}), i_half);

    FormalSeries p = s;
    for (unsigned j = 1; j < 2 * m + 1; ++j) p = series_mul(p, s);

    const FormalSeries first = scalar_mul(
        root_of_unity(2L * m, 1), series_add(FormalSeries::variable(2, N, 0), p));
    return make_conjugate_pair(first);
}

}  // namespace germflow
