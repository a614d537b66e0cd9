#include "germflow/coeff.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>

namespace germflow {

// ===========================================================================
// BigFloat helpers

BigFloat bf_make(unsigned prec_bits) {
    BigFloat x;
    mpfr_set_prec(x.backend().data(), prec_bits);
    mpfr_set_ui(x.backend().data(), 0, MPFR_RNDN);
    return x;
}

BigFloat bf_round_to(const BigFloat& x, unsigned prec_bits) {
    BigFloat t = bf_make(prec_bits);
    mpfr_set(t.backend().data(), x.backend().data(), MPFR_RNDN);
    return t;
}

unsigned bf_prec(const BigFloat& x) {
    return static_cast<unsigned>(mpfr_get_prec(x.backend().data()));
}

BigFloat bf_from_rational(const Rational& q, unsigned prec_bits) {
    BigFloat t = bf_make(prec_bits);
    mpfr_set_q(t.backend().data(), q.backend().data(), MPFR_RNDN);
    return t;
}

BigFloat bf_pi(unsigned prec_bits) {
    BigFloat t = bf_make(prec_bits);
    mpfr_const_pi(t.backend().data(), MPFR_RNDN);
    return t;
}

// ===========================================================================
// BigComplex

unsigned BigComplex::prec_bits() const {
    return std::max(bf_prec(re), bf_prec(im));
}

BigComplex bc_make(unsigned prec_bits) {
    return BigComplex(bf_make(prec_bits), bf_make(prec_bits));
}

// Results are rounded to exactly max(operand precisions); boost would
// otherwise let intermediate precisions creep upward.
namespace {
unsigned bc_pair_prec(const BigComplex& a, const BigComplex& b) {
    return std::max(a.prec_bits(), b.prec_bits());
}
}  // namespace

BigComplex bc_add(const BigComplex& a, const BigComplex& b) {
    unsigned p = bc_pair_prec(a, b);
    return BigComplex(bf_round_to(BigFloat(a.re + b.re), p),
                      bf_round_to(BigFloat(a.im + b.im), p));
}

BigComplex bc_sub(const BigComplex& a, const BigComplex& b) {
    unsigned p = bc_pair_prec(a, b);
    return BigComplex(bf_round_to(BigFloat(a.re - b.re), p),
                      bf_round_to(BigFloat(a.im - b.im), p));
}

BigComplex bc_mul(const BigComplex& a, const BigComplex& b) {
    unsigned p = bc_pair_prec(a, b);
    return BigComplex(bf_round_to(BigFloat(a.re * b.re - a.im * b.im), p),
                      bf_round_to(BigFloat(a.re * b.im + a.im * b.re), p));
}

BigComplex bc_div(const BigComplex& a, const BigComplex& b) {
    BigFloat den = b.re * b.re + b.im * b.im;
    if (den == 0)
        throw DivisionByZero("complex division by zero");
    unsigned p = bc_pair_prec(a, b);
    return BigComplex(bf_round_to(BigFloat((a.re * b.re + a.im * b.im) / den), p),
                      bf_round_to(BigFloat((a.im * b.re - a.re * b.im) / den), p));
}

BigFloat bc_abs(const BigComplex& a) {
    return bf_round_to(sqrt(BigFloat(a.re * a.re + a.im * a.im)), a.prec_bits());
}

BigComplex bc_exp(const BigComplex& a) {
    unsigned p = a.prec_bits();
    BigFloat m = exp(a.re);
    return BigComplex(bf_round_to(BigFloat(m * cos(a.im)), p),
                      bf_round_to(BigFloat(m * sin(a.im)), p));
}

BigComplex bc_log(const BigComplex& a) {
    BigFloat r = bc_abs(a);
    if (r == 0)
        throw DivisionByZero("logarithm of zero");
    unsigned p = a.prec_bits();
    return BigComplex(bf_round_to(log(r), p), bf_round_to(atan2(a.im, a.re), p));
}

// ===========================================================================
// Rational polynomial helpers (dense, ascending coefficients)

namespace {

using QPoly = std::vector<Rational>;

void qp_trim(QPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

QPoly qp_add(const QPoly& a, const QPoly& b) {
    QPoly r(std::max(a.size(), b.size()), Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    qp_trim(r);
    return r;
}

QPoly qp_mul(const QPoly& a, const QPoly& b) {
    if (a.empty() || b.empty()) return {};
    QPoly r(a.size() + b.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    qp_trim(r);
    return r;
}

// Remainder of a modulo the monic polynomial m.
QPoly qp_mod_monic(QPoly a, const QPoly& m) {
    qp_trim(a);
    const std::size_t dm = m.size() - 1;
    while (a.size() > dm) {
        Rational lead = a.back();
        std::size_t shift = a.size() - 1 - dm;
        if (lead != 0)
            for (std::size_t i = 0; i < dm; ++i) a[shift + i] -= lead * m[i];
        a.pop_back();
        qp_trim(a);
    }
    return a;
}

// Extended gcd: returns (g, s) with s*a == g (mod m), g the monic gcd of a
// and m. When m is irreducible and a != 0 mod m, g == 1 and s is a^{-1}.
std::pair<QPoly, QPoly> qp_invert_mod(const QPoly& a, const QPoly& m) {
    QPoly r0 = m, r1 = qp_mod_monic(a, m);
    QPoly s0 = {}, s1 = {Rational(1)};
    while (!r1.empty()) {
        // divide r0 by r1
        QPoly q;
        QPoly rem = r0;
        qp_trim(rem);
        if (rem.size() >= r1.size()) {
            q.assign(rem.size() - r1.size() + 1, Rational(0));
            while (rem.size() >= r1.size() && !rem.empty()) {
                Rational c = rem.back() / r1.back();
                std::size_t shift = rem.size() - r1.size();
                q[shift] = c;
                for (std::size_t i = 0; i < r1.size(); ++i)
                    rem[shift + i] -= c * r1[i];
                qp_trim(rem);
                if (rem.size() <= shift) break;
            }
        }
        QPoly qs1 = qp_mul(q, s1);
        for (auto& c : qs1) c = -c;
        QPoly s2 = qp_add(s0, qs1);  // s2 = s0 - q*s1
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = s2;
    }
    return {r0, s0};
}

std::vector<unsigned> divisors_of(unsigned k) {
    std::vector<unsigned> d;
    for (unsigned i = 1; i <= k; ++i)
        if (k % i == 0) d.push_back(i);
    return d;
}

// Integer polynomial division helpers for Phi_k (divisors are monic).
using ZPoly = std::vector<BigInt>;

void zp_trim(ZPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

ZPoly zp_div_exact_monic(const ZPoly& a, const ZPoly& m) {
    ZPoly rem = a, q;
    zp_trim(rem);
    const std::size_t dm = m.size() - 1;
    q.assign(rem.size() >= m.size() ? rem.size() - dm : 0, BigInt(0));
    while (rem.size() > dm) {
        BigInt lead = rem.back();
        std::size_t shift = rem.size() - 1 - dm;
        q[shift] = lead;
        for (std::size_t i = 0; i + 1 < m.size(); ++i) rem[shift + i] -= lead * m[i];
        rem.pop_back();
        zp_trim(rem);
    }
    return q;
}

}  // namespace

unsigned euler_phi(unsigned k) {
    unsigned result = k;
    unsigned n = k;
    for (unsigned p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            result -= result / p;
        }
    }
    if (n > 1) result -= result / n;
    return result;
}

std::vector<BigInt> cyclotomic_polynomial(unsigned k) {
    if (k < 1) throw DomainError("cyclotomic_polynomial requires k >= 1");
    static std::map<unsigned, ZPoly> memo;
    static std::mutex memo_mutex;
    std::lock_guard<std::mutex> lock(memo_mutex);
    auto hit = memo.find(k);
    if (hit != memo.end()) return hit->second;
    for (unsigned d : divisors_of(k)) {
        if (memo.count(d)) continue;
        ZPoly num(d + 1, BigInt(0));
        num[0] = -1;
        num[d] = 1;  // x^d - 1
        for (unsigned e : divisors_of(d))
            if (e != d) num = zp_div_exact_monic(num, memo.at(e));
        memo[d] = num;
    }
    return memo.at(k);
}

// ===========================================================================
// Cyclotomic / Radical construction and normalization

namespace {

QPoly phi_as_qpoly(unsigned k) {
    QPoly m;
    for (const BigInt& c : cyclotomic_polynomial(k)) m.emplace_back(Rational(c));
    return m;
}

Coeff make_cyclotomic(unsigned k, QPoly poly) {
    poly = qp_mod_monic(std::move(poly), phi_as_qpoly(k));
    bool rational_only = true;
    for (std::size_t i = 1; i < poly.size(); ++i)
        if (poly[i] != 0) { rational_only = false; break; }
    if (rational_only)
        return Coeff(poly.empty() ? Rational(0) : poly[0]);
    poly.resize(euler_phi(k), Rational(0));
    return Coeff(Cyclotomic{k, std::move(poly)});
}

Coeff make_radical(const Rational& base, unsigned degree, QPoly poly) {
    // reduce exponents >= degree via w^degree = base
    QPoly out(degree, Rational(0));
    for (std::size_t i = 0; i < poly.size(); ++i) {
        if (poly[i] == 0) continue;
        Rational scale(1);
        for (std::size_t j = 0; j < i / degree; ++j) scale *= base;
        out[i % degree] += poly[i] * scale;
    }
    bool rational_only = true;
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] != 0) { rational_only = false; break; }
    if (rational_only)
        return Coeff(out.empty() ? Rational(0) : out[0]);
    return Coeff(Radical{base, degree, std::move(out)});
}

// Lift an element of Q(zeta_k) into Q(zeta_K), k | K.
Cyclotomic lift_cyclotomic(const Cyclotomic& c, unsigned K) {
    if (c.conductor == K) return c;
    unsigned step = K / c.conductor;
    QPoly poly(std::size_t(euler_phi(c.conductor) - 1) * step + 1, Rational(0));
    for (std::size_t i = 0; i < c.coeffs.size(); ++i) poly[i * step] = c.coeffs[i];
    poly = qp_mod_monic(std::move(poly), phi_as_qpoly(K));
    poly.resize(euler_phi(K), Rational(0));
    return Cyclotomic{K, std::move(poly)};
}

unsigned lcm_u(unsigned a, unsigned b) { return a / std::gcd(a, b) * b; }

std::optional<Rational> exact_rational_root(const Rational& c, unsigned p) {
    BigInt num = numerator(c), den = denominator(c);
    bool neg = num < 0;
    if (neg && p % 2 == 0) return std::nullopt;
    BigInt anum = abs(num);
    BigInt rn, rd;
    int en = mpz_root(rn.backend().data(), anum.backend().data(), p);
    int ed = mpz_root(rd.backend().data(), den.backend().data(), p);
    if (!en || !ed) return std::nullopt;
    if (neg) rn = -rn;
    return make_rational(rn, rd);
}

}  // namespace

Coeff root_of_unity(long k, long j) {
    if (k < 1) throw DomainError("root_of_unity requires k >= 1");
    long jm = ((j % k) + k) % k;
    if (jm == 0) return Coeff(1);
    long g = std::gcd(jm, k);
    unsigned kk = static_cast<unsigned>(k / g);
    unsigned jj = static_cast<unsigned>(jm / g);
    if (kk == 1) return Coeff(1);
    if (kk == 2) return Coeff(-1);
    QPoly poly(jj + 1, Rational(0));
    poly[jj] = 1;
    return make_cyclotomic(kk, std::move(poly));
}

Coeff radical_root(const Rational& c, unsigned b) {
    if (b < 1) throw DomainError("radical_root requires b >= 1");
    if (c == 0) return Coeff(Rational(0));
    if (c < 0 && b % 2 == 0)
        throw NotRepresentable("even root of a negative rational has no real value");
    Rational base = c;
    unsigned deg = b;
    if (deg == 1) return Coeff(base);
    // Peel off prime factors of the degree while exact roots exist; what
    // remains gives an irreducible binomial x^deg - base.
    unsigned p = 2;
    while (p <= deg) {
        if (deg % p == 0) {
            auto r = exact_rational_root(base, p);
            if (r) {
                base = *r;
                deg /= p;
                if (deg == 1) return Coeff(base);
                continue;  // retry the same prime
            }
        }
        ++p;
        while (p <= deg && deg % p != 0) ++p;
    }
    QPoly gen(2, Rational(0));
    gen[1] = 1;
    return make_radical(base, deg, std::move(gen));
}

// ===========================================================================
// Coeff basics

bool Coeff::is_zero() const {
    if (is_rational()) return rational() == 0;
    if (is_cyclotomic()) {
        for (const auto& c : cyclotomic().coeffs)
            if (c != 0) return false;
        return true;
    }
    if (is_radical()) {
        for (const auto& c : radical().coeffs)
            if (c != 0) return false;
        return true;
    }
    const BigComplex& z = complex();
    return z.re == 0 && z.im == 0;
}

bool Coeff::is_one() const {
    if (is_rational()) return rational() == 1;
    if (is_complex()) return complex().re == 1 && complex().im == 0;
    return false;  // extensions demote rational values eagerly
}

// ===========================================================================
// Arithmetic dispatch

namespace {

enum class BinOp { add, sub, mul };

Coeff exact_binop(BinOp op, const Coeff& a, const Coeff& b);

Coeff rational_binop(BinOp op, const Rational& a, const Rational& b) {
    switch (op) {
        case BinOp::add: return Coeff(Rational(a + b));
        case BinOp::sub: return Coeff(Rational(a - b));
        case BinOp::mul: return Coeff(Rational(a * b));
    }
    throw Error("unreachable");
}

QPoly coeff_as_qpoly_cyc(const Coeff& a, unsigned K) {
    if (a.is_rational()) return a.rational() == 0 ? QPoly{} : QPoly{a.rational()};
    Cyclotomic c = lift_cyclotomic(a.cyclotomic(), K);
    QPoly p = c.coeffs;
    qp_trim(p);
    return p;
}

Coeff cyclotomic_binop(BinOp op, const Coeff& a, const Coeff& b) {
    unsigned ka = a.is_cyclotomic() ? a.cyclotomic().conductor : 1;
    unsigned kb = b.is_cyclotomic() ? b.cyclotomic().conductor : 1;
    unsigned K = lcm_u(ka, kb);
    QPoly pa = coeff_as_qpoly_cyc(a, K);
    QPoly pb = coeff_as_qpoly_cyc(b, K);
    QPoly r;
    switch (op) {
        case BinOp::add: r = qp_add(pa, pb); break;
        case BinOp::sub:
            for (auto& c : pb) c = -c;
            r = qp_add(pa, pb);
            break;
        case BinOp::mul: r = qp_mul(pa, pb); break;
    }
    return make_cyclotomic(K, std::move(r));
}

QPoly coeff_as_qpoly_rad(const Coeff& a) {
    if (a.is_rational()) return a.rational() == 0 ? QPoly{} : QPoly{a.rational()};
    QPoly p = a.radical().coeffs;
    qp_trim(p);
    return p;
}

Coeff radical_binop(BinOp op, const Coeff& a, const Coeff& b) {
    const Radical& ra = a.is_radical() ? a.radical() : b.radical();
    if (a.is_radical() && b.is_radical()) {
        const Radical& rb = b.radical();
        if (ra.degree != rb.degree || ra.base != rb.base)
            throw ModeError("incompatible radical extensions");
    }
    QPoly pa = coeff_as_qpoly_rad(a);
    QPoly pb = coeff_as_qpoly_rad(b);
    QPoly r;
    switch (op) {
        case BinOp::add: r = qp_add(pa, pb); break;
        case BinOp::sub:
            for (auto& c : pb) c = -c;
            r = qp_add(pa, pb);
            break;
        case BinOp::mul: r = qp_mul(pa, pb); break;
    }
    return make_radical(ra.base, ra.degree, std::move(r));
}

Coeff exact_binop(BinOp op, const Coeff& a, const Coeff& b) {
    if (a.is_rational() && b.is_rational())
        return rational_binop(op, a.rational(), b.rational());
    bool cyc = a.is_cyclotomic() || b.is_cyclotomic();
    bool rad = a.is_radical() || b.is_radical();
    if (cyc && rad)
        throw ModeError("cyclotomic and radical scalars do not mix");
    if (cyc) return cyclotomic_binop(op, a, b);
    return radical_binop(op, a, b);
}

Coeff binop(BinOp op, const Coeff& a, const Coeff& b) {
    if (a.is_exact() != b.is_exact())
        throw ModeError("mixed exact/approximate arithmetic is rejected");
    if (!a.is_exact()) {
        switch (op) {
            case BinOp::add: return Coeff(bc_add(a.complex(), b.complex()));
            case BinOp::sub: return Coeff(bc_sub(a.complex(), b.complex()));
            case BinOp::mul: return Coeff(bc_mul(a.complex(), b.complex()));
        }
    }
    return exact_binop(op, a, b);
}

}  // namespace

Coeff operator+(const Coeff& a, const Coeff& b) { return binop(BinOp::add, a, b); }
Coeff operator-(const Coeff& a, const Coeff& b) { return binop(BinOp::sub, a, b); }
Coeff operator*(const Coeff& a, const Coeff& b) { return binop(BinOp::mul, a, b); }

Coeff operator-(const Coeff& a) {
    return mul_int(a, -1);
}

Coeff inv(const Coeff& a) {
    if (a.is_zero()) throw DivisionByZero("division by zero");
    if (a.is_rational()) return Coeff(Rational(1 / a.rational()));
    if (a.is_cyclotomic()) {
        const Cyclotomic& c = a.cyclotomic();
        QPoly p = c.coeffs;
        qp_trim(p);
        auto [g, s] = qp_invert_mod(p, phi_as_qpoly(c.conductor));
        // Phi_k is irreducible, so g is a nonzero constant.
        Rational gc = g.empty() ? Rational(1) : g[0];
        for (auto& x : s) x /= gc;
        return make_cyclotomic(c.conductor, std::move(s));
    }
    if (a.is_radical()) {
        const Radical& r = a.radical();
        QPoly m(r.degree + 1, Rational(0));
        m[0] = -r.base;
        m[r.degree] = 1;
        QPoly p = r.coeffs;
        qp_trim(p);
        auto [g, s] = qp_invert_mod(p, m);
        if (g.size() != 1)
            throw DivisionByZero("non-invertible element in radical extension");
        for (auto& x : s) x /= g[0];
        return make_radical(r.base, r.degree, std::move(s));
    }
    BigComplex one = bc_make(a.complex().prec_bits());
    one.re = 1;
    return Coeff(bc_div(one, a.complex()));
}

Coeff operator/(const Coeff& a, const Coeff& b) {
    if (a.is_exact() != b.is_exact())
        throw ModeError("mixed exact/approximate arithmetic is rejected");
    if (b.is_zero()) throw DivisionByZero("division by zero");
    if (!a.is_exact()) return Coeff(bc_div(a.complex(), b.complex()));
    return a * inv(b);
}

bool operator==(const Coeff& a, const Coeff& b) {
    if (!a.is_exact() || !b.is_exact())
        throw ModeError("approximate scalars support only tolerance comparison");
    if (a.is_rational() && b.is_rational()) return a.rational() == b.rational();
    return (a - b).is_zero();
}

Coeff pow(const Coeff& a, long n) {
    if (n < 0) return inv(pow(a, -n));
    Coeff result = a.is_exact() ? Coeff(1) : [&] {
        BigComplex one = bc_make(a.complex().prec_bits());
        one.re = 1;
        return Coeff(one);
    }();
    Coeff base = a;
    unsigned long e = static_cast<unsigned long>(n);
    while (e > 0) {
        if (e & 1) result = result * base;
        base = base * base;
        e >>= 1;
    }
    return result;
}

Coeff conj(const Coeff& a) {
    if (a.is_rational() || a.is_radical()) return a;  // real values
    if (a.is_cyclotomic()) {
        const Cyclotomic& c = a.cyclotomic();
        unsigned k = c.conductor;
        QPoly poly(k, Rational(0));
        for (std::size_t i = 0; i < c.coeffs.size(); ++i)
            poly[(k - i) % k] += c.coeffs[i];
        return make_cyclotomic(k, std::move(poly));
    }
    const BigComplex& z = a.complex();
    return Coeff(BigComplex(z.re, -z.im));
}

Coeff mul_int(const Coeff& a, long n) {
    if (a.is_rational()) return Coeff(Rational(a.rational() * n));
    if (a.is_cyclotomic()) {
        QPoly p = a.cyclotomic().coeffs;
        for (auto& c : p) c *= n;
        return make_cyclotomic(a.cyclotomic().conductor, std::move(p));
    }
    if (a.is_radical()) {
        QPoly p = a.radical().coeffs;
        for (auto& c : p) c *= n;
        return make_radical(a.radical().base, a.radical().degree, std::move(p));
    }
    const BigComplex& z = a.complex();
    return Coeff(BigComplex(z.re * n, z.im * n));
}

Coeff div_big(const Coeff& a, const BigInt& n) {
    if (n == 0) throw DivisionByZero("division by zero");
    Rational r = make_rational(BigInt(1), n);
    if (a.is_rational()) return Coeff(Rational(a.rational() * r));
    if (a.is_cyclotomic()) {
        QPoly p = a.cyclotomic().coeffs;
        for (auto& c : p) c *= r;
        return make_cyclotomic(a.cyclotomic().conductor, std::move(p));
    }
    if (a.is_radical()) {
        QPoly p = a.radical().coeffs;
        for (auto& c : p) c *= r;
        return make_radical(a.radical().base, a.radical().degree, std::move(p));
    }
    const BigComplex& z = a.complex();
    BigFloat d = bf_from_rational(Rational(n), z.prec_bits());
    return Coeff(BigComplex(z.re / d, z.im / d));
}

Coeff to_mode(const Coeff& a, Mode m, unsigned prec_bits) {
    if (m == Mode::approx)
        return a.is_exact() ? Coeff(embed_complex(a, prec_bits)) : a;
    if (!a.is_exact())
        throw ModeError("cannot promote an approximate scalar to exact");
    return a;
}

unsigned root_of_unity_order(const Coeff& a) {
    if (!a.is_exact())
        throw ModeError("root_of_unity_order requires an exact scalar");
    if (a.is_rational()) {
        if (a.rational() == 1) return 1;
        if (a.rational() == -1) return 2;
        return 0;
    }
    if (a.is_radical()) return 0;  // nontrivial radical values are not +-1
    const Cyclotomic& c = a.cyclotomic();
    if (!(a * conj(a)).is_one()) return 0;
    unsigned bound = lcm_u(2, c.conductor);
    for (unsigned r : divisors_of(bound))
        if (pow(a, r).is_one()) return r;
    return 0;
}

// ===========================================================================
// Embedding

BigComplex embed_complex(const Coeff& a, unsigned prec_bits) {
    if (prec_bits < 64) throw DomainError("embedding precision must be >= 64 bits");
    const unsigned guard = prec_bits + 64;
    auto finish = [&](const BigFloat& re, const BigFloat& im) {
        return BigComplex(bf_round_to(re, prec_bits), bf_round_to(im, prec_bits));
    };
    if (a.is_rational())
        return finish(bf_from_rational(a.rational(), guard), bf_make(prec_bits));
    if (a.is_cyclotomic()) {
        const Cyclotomic& c = a.cyclotomic();
        BigFloat two_pi = bf_pi(guard);
        two_pi *= 2;
        BigFloat acc_re = bf_make(guard), acc_im = bf_make(guard);
        for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
            if (c.coeffs[i] == 0) continue;
            BigFloat theta = two_pi * BigFloat(static_cast<unsigned long>(i));
            theta /= static_cast<unsigned long>(c.conductor);
            BigFloat s = bf_make(guard), co = bf_make(guard);
            mpfr_sin_cos(s.backend().data(), co.backend().data(),
                         theta.backend().data(), MPFR_RNDN);
            BigFloat w = bf_from_rational(c.coeffs[i], guard);
            acc_re += w * co;
            acc_im += w * s;
        }
        return finish(acc_re, acc_im);
    }
    if (a.is_radical()) {
        const Radical& r = a.radical();
        Rational absbase = r.base < 0 ? Rational(-r.base) : r.base;
        BigFloat b = bf_from_rational(absbase, guard);
        BigFloat root = bf_make(guard);
        mpfr_rootn_ui(root.backend().data(), b.backend().data(), r.degree, MPFR_RNDN);
        if (r.base < 0) root = -root;
        BigFloat acc = bf_make(guard), p = bf_make(guard);
        p = 1;
        for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
            if (r.coeffs[i] != 0) acc += bf_from_rational(r.coeffs[i], guard) * p;
            p *= root;
        }
        return finish(acc, bf_make(prec_bits));
    }
    const BigComplex& z = a.complex();
    return BigComplex(bf_round_to(z.re, prec_bits), bf_round_to(z.im, prec_bits));
}

BigFloat abs_diff(const Coeff& a, const Coeff& b, unsigned prec_bits) {
    return bc_abs(bc_sub(embed_complex(a, prec_bits), embed_complex(b, prec_bits)));
}

// ===========================================================================
// Text form

namespace {

std::string rational_str(const Rational& q) { return q.str(); }

// Renders sum_i coeffs[i] * gen^i with the generator's display name.
std::string poly_str(const std::vector<Rational>& coeffs, const std::string& gen) {
    std::string out;
    bool first = true;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == 0) continue;
        Rational c = coeffs[i];
        bool neg = c < 0;
        if (neg) c = -c;
        if (first) {
            if (neg) out += "-";
            first = false;
        } else {
            out += neg ? " - " : " + ";
        }
        std::string term;
        if (i == 0) {
            term = rational_str(c);
        } else {
            if (c != 1) term = rational_str(c) + "*";
            term += gen;
            if (i >= 2) term += "^" + std::to_string(i);
        }
        out += term;
    }
    return first ? "0" : out;
}

}  // namespace

std::string to_string(const Coeff& a) {
    if (a.is_rational()) return rational_str(a.rational());
    if (a.is_cyclotomic()) {
        const Cyclotomic& c = a.cyclotomic();
        return poly_str(c.coeffs, "zeta(" + std::to_string(c.conductor) + ")");
    }
    if (a.is_radical()) {
        const Radical& r = a.radical();
        return poly_str(r.coeffs,
                        "root(" + std::to_string(r.degree) + "," +
                            rational_str(r.base) + ")");
    }
    const BigComplex& z = a.complex();
    return "(" + z.re.str(0) + "," + z.im.str(0) + ")";
}

Rational make_rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw DivisionByZero("rational with zero denominator");
    return Rational(num, den);
}

Rational factorial_rational(unsigned k) {
    BigInt f;
    mpz_fac_ui(f.backend().data(), k);
    return Rational(f);
}

}  // namespace germflow
