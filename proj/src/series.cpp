#include "germflow/series.hpp"

#include <algorithm>
#include <cstdint>

namespace germflow {

namespace {

void require_same_shape(const FormalSeries& a, const FormalSeries& b) {
    if (a.nvars() != b.nvars())
        throw DomainError("series arity mismatch");
    if (!a.empty() && !b.empty() && a.mode() != b.mode())
        throw ModeError("series operands have different arithmetic modes");
}

// Rational-only operands multiply as scaled integer polynomials: clear the
// denominators once per operand, accumulate integer products (no gcd work in
// the hot loop), and normalize once per surviving output term. Returns false
// when the operands do not fit the scheme, leaving r untouched.
bool rational_fast_mul(const FormalSeries& a, const FormalSeries& b,
                       unsigned order, FormalSeries& r) {
    const unsigned n = a.nvars();
    if (n > 8 || order > 255) return false;
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;

    struct ITerm {
        std::uint64_t key;
        unsigned deg;
        BigInt num;
    };
    auto scale = [n](const FormalSeries& s, BigInt& l, std::vector<ITerm>& out) {
        l = 1;
        for (const auto& [m, c] : s.terms()) {
            if (!c.is_rational()) return false;
            l = boost::multiprecision::lcm(l, BigInt(denominator(c.rational())));
        }
        // a pathological denominator spread would make the scaled integers
        // larger than the gcd work they avoid
        if (boost::multiprecision::msb(l) > 8192) return false;
        out.reserve(s.terms().size());
        for (const auto& [m, c] : s.terms()) {
            std::uint64_t key = 0;
            for (unsigned i = 0; i < n; ++i)
                key = (key << 8) | static_cast<std::uint64_t>(m.e[i]);
            out.push_back({key, m.degree(),
                           BigInt(numerator(c.rational()) *
                                  (l / denominator(c.rational())))});
        }
        return true;
    };

    BigInt la, lb;
    std::vector<ITerm> ia, ib;
    if (!scale(a, la, ia) || !scale(b, lb, ib)) return false;

    // terms arrive in ascending total degree, so packed keys of every pair
    // that survives the order bound stay within one byte per exponent and
    // the first pair over the bound ends its loop
    const unsigned bmin = ib.front().deg;
    std::vector<std::pair<std::uint64_t, BigInt>> acc;
    acc.reserve(64);
    for (const ITerm& ta : ia) {
        if (ta.deg + bmin > order) break;
        for (const ITerm& tb : ib) {
            if (ta.deg + tb.deg > order) break;
            const std::uint64_t key = ta.key + tb.key;
            auto it = std::lower_bound(
                acc.begin(), acc.end(), key,
                [](const auto& p, std::uint64_t k) { return p.first < k; });
            if (it != acc.end() && it->first == key)
                it->second += ta.num * tb.num;
            else
                acc.emplace(it, key, BigInt(ta.num * tb.num));
        }
    }

    const BigInt den = la * lb;
    for (auto& [key, num] : acc) {
        if (num == 0) continue;
        std::vector<unsigned> e(n);
        for (unsigned i = 0; i < n; ++i)
            e[n - 1 - i] = static_cast<unsigned>((key >> (8 * i)) & 0xff);
        r.set_coeff(MultiIndex(std::move(e)), Coeff(make_rational(num, den)));
    }
    return true;
}

}  // namespace

FormalSeries series_add(const FormalSeries& a, const FormalSeries& b) {
    require_same_shape(a, b);
    FormalSeries r(a.nvars(), std::min(a.order(), b.order()));
    for (const auto& [m, c] : a.terms()) r.add_to_coeff(m, c);
    for (const auto& [m, c] : b.terms()) r.add_to_coeff(m, c);
    return r;
}

FormalSeries series_sub(const FormalSeries& a, const FormalSeries& b) {
    require_same_shape(a, b);
    FormalSeries r(a.nvars(), std::min(a.order(), b.order()));
    for (const auto& [m, c] : a.terms()) r.add_to_coeff(m, c);
    for (const auto& [m, c] : b.terms()) r.add_to_coeff(m, -c);
    return r;
}

FormalSeries series_mul(const FormalSeries& a, const FormalSeries& b) {
    return series_mul_to(a, b, std::min(a.order(), b.order()));
}

FormalSeries series_mul_to(const FormalSeries& a, const FormalSeries& b,
                           unsigned order) {
    require_same_shape(a, b);
    const unsigned n = a.nvars();
    FormalSeries r(n, order);
    if (a.empty() || b.empty()) return r;
    if (rational_fast_mul(a, b, order, r)) return r;

    // terms iterate in ascending total degree, so the first pair over the
    // order bound ends its whole loop
    const unsigned bmin = b.terms().begin()->first.degree();

    if (n <= 8 && order <= 255) {
        // accumulate under packed integer keys in a sorted flat array: no
        // tree nodes and single-word comparisons in the hot loop (kept
        // exponents are bounded by the order, so 8 bits each suffice)
        std::vector<std::pair<std::uint64_t, Coeff>> acc;
        acc.reserve(64);
        for (const auto& [ma, ca] : a.terms()) {
            const unsigned da = ma.degree();
            if (da + bmin > order) break;
            for (const auto& [mb, cb] : b.terms()) {
                if (da + mb.degree() > order) break;
                std::uint64_t key = 0;
                for (unsigned i = 0; i < n; ++i)
                    key = (key << 8) |
                          static_cast<std::uint64_t>(ma.e[i] + mb.e[i]);
                auto it = std::lower_bound(
                    acc.begin(), acc.end(), key,
                    [](const auto& p, std::uint64_t k) { return p.first < k; });
                if (it != acc.end() && it->first == key)
                    it->second = it->second + ca * cb;
                else
                    acc.emplace(it, key, ca * cb);
            }
        }
        for (auto& [key, c] : acc) {
            if (c.is_zero()) continue;
            std::vector<unsigned> e(n);
            for (unsigned i = 0; i < n; ++i)
                e[n - 1 - i] = static_cast<unsigned>((key >> (8 * i)) & 0xff);
            r.set_coeff(MultiIndex(std::move(e)), std::move(c));
        }
        return r;
    }

    for (const auto& [ma, ca] : a.terms()) {
        const unsigned da = ma.degree();
        if (da + bmin > order) break;
        for (const auto& [mb, cb] : b.terms()) {
            if (da + mb.degree() > order) break;
            MultiIndex m = ma;
            for (unsigned i = 0; i < m.size(); ++i) m.e[i] += mb.e[i];
            r.add_to_coeff(m, ca * cb);
        }
    }
    return r;
}

FormalSeries scalar_mul(const Coeff& c, const FormalSeries& s) {
    FormalSeries r(s.nvars(), s.order());
    if (c.is_zero()) return r;
    for (const auto& [m, x] : s.terms()) r.add_to_coeff(m, c * x);
    return r;
}

FormalSeries truncate(const FormalSeries& s, unsigned new_order) {
    if (new_order >= s.order()) return s;
    FormalSeries r(s.nvars(), new_order);
    for (const auto& [m, c] : s.terms()) r.add_to_coeff(m, c);
    return r;
}

FormalSeries with_order(const FormalSeries& s, unsigned order) {
    if (order <= s.order()) return truncate(s, order);
    FormalSeries r(s.nvars(), order);
    for (const auto& [m, c] : s.terms()) r.add_to_coeff(m, c);
    return r;
}

FormalSeries derive(const FormalSeries& s, unsigned var) {
    if (var >= s.nvars()) throw DomainError("variable index out of range");
    FormalSeries r(s.nvars(), s.order() > 0 ? s.order() - 1 : 0);
    for (const auto& [m, c] : s.terms()) {
        if (m.e[var] == 0) continue;
        MultiIndex d = m;
        d.e[var] -= 1;
        r.add_to_coeff(d, mul_int(c, static_cast<long>(m.e[var])));
    }
    return r;
}

// ---------------------------------------------------------------------------
// GermMap / VectorFieldGerm construction

namespace {

void check_component_shape(const std::vector<FormalSeries>& comps,
                           const char* what) {
    if (comps.empty()) throw DomainError("empty component list");
    unsigned n = static_cast<unsigned>(comps.size());
    unsigned order = comps.front().order();
    for (const auto& c : comps) {
        if (c.nvars() != n)
            throw DomainError(std::string(what) +
                              ": component arity must equal component count");
        if (c.order() != order)
            throw DomainError(std::string(what) +
                              ": components must share one truncation order");
        if (!c.coeff(MultiIndex::zero(n)).is_zero())
            throw DomainError(std::string(what) +
                              ": nonzero constant term (germ must fix 0)");
    }
}

}  // namespace

GermMap::GermMap(std::vector<FormalSeries> components) : comps_(std::move(components)) {
    check_component_shape(comps_, "germ");
}

GermMap GermMap::identity(unsigned nvars, unsigned order) {
    std::vector<FormalSeries> comps;
    for (unsigned i = 0; i < nvars; ++i)
        comps.push_back(FormalSeries::variable(nvars, order, i));
    return GermMap(std::move(comps));
}

VectorFieldGerm::VectorFieldGerm(std::vector<FormalSeries> components)
    : comps_(std::move(components)) {
    check_component_shape(comps_, "vector field");
}

VectorFieldGerm VectorFieldGerm::zero(unsigned nvars, unsigned order) {
    std::vector<FormalSeries> comps(nvars, FormalSeries::zero(nvars, order));
    return VectorFieldGerm(std::move(comps));
}

// ---------------------------------------------------------------------------
// Composition

namespace {

// Split s by the exponent of variable v: s = sum_k slice_k * x_v^k with the
// v-exponent zeroed inside each slice.
std::vector<FormalSeries> slices_by_var(const FormalSeries& s, unsigned v) {
    unsigned maxk = 0;
    for (const auto& [m, c] : s.terms()) maxk = std::max(maxk, m.e[v]);
    std::vector<FormalSeries> slices(maxk + 1, FormalSeries(s.nvars(), s.order()));
    for (const auto& [m, c] : s.terms()) {
        MultiIndex rest = m;
        unsigned k = rest.e[v];
        rest.e[v] = 0;
        slices[k].set_coeff(rest, c);
    }
    return slices;
}

// Horner evaluation of s at args for variables 0..v, recursing downward.
// The inner series have valuation >= 1, so while k more multiplications by
// args[v] are still to come, only degrees <= order - k of the accumulator
// can survive to the end; every multiply and every slice evaluation runs
// truncated to that bound, which keeps high-power slices cheap.
FormalSeries eval_through_var(const FormalSeries& s,
                              const std::vector<FormalSeries>& args, unsigned v,
                              unsigned order) {
    const unsigned n = s.nvars();
    if (s.empty()) return FormalSeries(n, order);
    auto slices = slices_by_var(s, v);
    // powers of the variable above the order cannot contribute at all
    const unsigned top =
        std::min(static_cast<unsigned>(slices.size() - 1), order);
    FormalSeries acc(n, order - top);
    for (unsigned k = top + 1; k-- > 0;) {
        const unsigned cap = order - k;
        acc = series_mul_to(acc, args[v], cap);
        const FormalSeries& sl = slices[k];
        if (sl.empty()) continue;
        if (v == 0) {
            Coeff c = sl.coeff(MultiIndex::zero(n));
            if (!c.is_zero())
                acc = series_add(acc, FormalSeries::constant(n, cap, c));
        } else {
            acc = series_add(acc, eval_through_var(sl, args, v - 1, cap));
        }
    }
    return acc;
}

}  // namespace

FormalSeries compose_series(const FormalSeries& s,
                            const std::vector<FormalSeries>& args) {
    if (args.size() != s.nvars())
        throw DomainError("composition needs one series per variable");
    unsigned order = s.order();
    for (const auto& a : args) {
        if (a.nvars() != s.nvars()) throw DomainError("series arity mismatch");
        if (!a.coeff(MultiIndex::zero(a.nvars())).is_zero())
            throw DomainError("nonzero constant term in inner series");
        order = std::min(order, a.order());
    }
    return eval_through_var(s, args, s.nvars() - 1, order);
}

GermMap compose(const GermMap& outer, const GermMap& inner) {
    if (outer.nvars() != inner.nvars())
        throw DomainError("composition arity mismatch");
    std::vector<FormalSeries> comps;
    for (unsigned i = 0; i < outer.nvars(); ++i)
        comps.push_back(compose_series(outer.component(i), inner.components()));
    return GermMap(std::move(comps));
}

// ---------------------------------------------------------------------------
// Compositional inverse

namespace {

// Exact Gauss-Jordan inverse of a small coefficient matrix. Exact mode picks
// the first nonzero pivot; approximate mode picks the largest in magnitude.
std::vector<std::vector<Coeff>> invert_matrix(std::vector<std::vector<Coeff>> a) {
    const std::size_t n = a.size();
    // Harmonize mode: one approximate entry makes the whole solve approximate
    // (structural zeros from sparse storage arrive as exact rationals).
    bool approx = false;
    unsigned prec = 64;
    for (const auto& row : a)
        for (const auto& x : row)
            if (!x.is_exact()) {
                approx = true;
                prec = std::max(prec, x.complex().prec_bits());
            }
    if (approx)
        for (auto& row : a)
            for (auto& x : row) x = to_mode(x, Mode::approx, prec);
    std::vector<std::vector<Coeff>> inv(n, std::vector<Coeff>(n, Coeff(0)));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = Coeff(1);
    if (approx)
        for (auto& row : inv)
            for (auto& x : row) x = to_mode(x, Mode::approx, prec);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = n;
        if (approx) {
            BigFloat best;
            for (std::size_t r = col; r < n; ++r) {
                BigFloat mag = bc_abs(a[r][col].complex());
                if (mag > 0 && (piv == n || mag > best)) {
                    best = mag;
                    piv = r;
                }
            }
        } else {
            for (std::size_t r = col; r < n; ++r)
                if (!a[r][col].is_zero()) {
                    piv = r;
                    break;
                }
        }
        if (piv == n) throw DomainError("singular linear part");
        std::swap(a[col], a[piv]);
        std::swap(inv[col], inv[piv]);
        Coeff d = a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] = a[col][j] / d;
            inv[col][j] = inv[col][j] / d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            Coeff f = a[r][col];
            if (f.is_zero()) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] = a[r][j] - f * a[col][j];
                inv[r][j] = inv[r][j] - f * inv[col][j];
            }
        }
    }
    return inv;
}

std::vector<std::vector<Coeff>> linear_part_of(const GermMap& g) {
    std::vector<std::vector<Coeff>> j(g.nvars(), std::vector<Coeff>(g.nvars(), Coeff(0)));
    for (unsigned s = 0; s < g.nvars(); ++s)
        for (unsigned k = 0; k < g.nvars(); ++k) j[s][k] = g.linear_coeff(s, k);
    return j;
}

GermMap linear_germ(const std::vector<std::vector<Coeff>>& j, unsigned order) {
    unsigned n = static_cast<unsigned>(j.size());
    std::vector<FormalSeries> comps;
    for (unsigned s = 0; s < n; ++s) {
        FormalSeries c(n, order);
        for (unsigned k = 0; k < n; ++k)
            c.set_coeff(MultiIndex::unit(n, k), j[s][k]);
        comps.push_back(std::move(c));
    }
    return GermMap(std::move(comps));
}

}  // namespace

GermMap compositional_inverse(const GermMap& u) {
    const unsigned n = u.nvars();
    const unsigned order = u.order();

    // The identity germ must match u's arithmetic mode, or the fixed-point
    // subtraction below would mix exact and approximate coefficients.
    bool approx = false;
    unsigned prec = 64;
    for (const auto& comp : u.components())
        for (const auto& [m, c] : comp.terms())
            if (!c.is_exact()) {
                approx = true;
                prec = std::max(prec, c.complex().prec_bits());
            }
    Coeff one(1);
    if (approx) one = to_mode(one, Mode::approx, prec);
    std::vector<FormalSeries> idcomps;
    for (unsigned s = 0; s < n; ++s) {
        FormalSeries c(n, order);
        c.set_coeff(MultiIndex::unit(n, s), one);
        idcomps.push_back(std::move(c));
    }
    GermMap id(std::move(idcomps));
    auto jinv = invert_matrix(linear_part_of(u));
    GermMap linv = linear_germ(jinv, order);

    // higher-order part H = u - J*x
    GermMap lin = linear_germ(linear_part_of(u), order);
    GermMap high = germ_sub(u, lin);
    if (germ_is_zero(high)) return linv;

    // fixed point g <- J^{-1}(id - H(g)); pass p fixes degree p, and degrees
    // above p cannot influence degrees <= p (H has valuation >= 2), so each
    // pass runs truncated to order p and only the last works at full order
    GermMap g = truncate(linv, std::min(order, 1u));
    for (unsigned p = 2; p <= order; ++p) {
        GermMap gp = with_order(g, p);
        GermMap rhs = germ_sub(truncate(id, p), compose(truncate(high, p), gp));
        g = compose(truncate(linv, p), rhs);
    }
    return with_order(g, order);
}

GermMap germ_sub(const GermMap& a, const GermMap& b) {
    if (a.nvars() != b.nvars()) throw DomainError("germ arity mismatch");
    std::vector<FormalSeries> comps;
    for (unsigned i = 0; i < a.nvars(); ++i)
        comps.push_back(series_sub(a.component(i), b.component(i)));
    return GermMap(std::move(comps));
}

bool germ_is_zero(const GermMap& g) {
    for (const auto& c : g.components())
        if (!c.empty()) return false;
    return true;
}

GermMap truncate(const GermMap& g, unsigned new_order) {
    std::vector<FormalSeries> comps;
    for (const auto& c : g.components()) comps.push_back(truncate(c, new_order));
    return GermMap(std::move(comps));
}

GermMap with_order(const GermMap& g, unsigned order) {
    std::vector<FormalSeries> comps;
    for (const auto& c : g.components()) comps.push_back(with_order(c, order));
    return GermMap(std::move(comps));
}

VectorFieldGerm with_order(const VectorFieldGerm& v, unsigned order) {
    std::vector<FormalSeries> comps;
    for (const auto& c : v.components()) comps.push_back(with_order(c, order));
    return VectorFieldGerm(std::move(comps));
}

// ---------------------------------------------------------------------------
// Conjugate-pair chart

FormalSeries conjugate_involution(const FormalSeries& s) {
    if (s.nvars() != 2)
        throw DomainError("conjugation involution lives in the 2-variable chart");
    FormalSeries r(2, s.order());
    for (const auto& [m, c] : s.terms()) {
        MultiIndex sw(std::vector<unsigned>{m.e[1], m.e[0]});
        r.set_coeff(sw, conj(c));
    }
    return r;
}

GermMap make_conjugate_pair(const FormalSeries& first) {
    FormalSeries second = conjugate_involution(first);
    return GermMap({first, second});
}

}  // namespace germflow
