#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <string>
#include <variant>
#include <vector>

#include "germflow/errors.hpp"

namespace germflow {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using BigFloat = boost::multiprecision::mpfr_float;

enum class Mode { exact, approx };

// ---------------------------------------------------------------------------
// Variable-precision float helpers. Precision is tracked in bits (mpfr
// native); boost's digits10 interface is bypassed.

BigFloat bf_make(unsigned prec_bits);                      // value 0 at prec
BigFloat bf_round_to(const BigFloat& x, unsigned prec_bits);
unsigned bf_prec(const BigFloat& x);
BigFloat bf_from_rational(const Rational& q, unsigned prec_bits);
BigFloat bf_pi(unsigned prec_bits);

// ---------------------------------------------------------------------------
// Scalar variants

// Element of Q(zeta_k) in the power basis 1, zeta, ..., zeta^(phi(k)-1),
// reduced modulo the k-th cyclotomic polynomial. Fully reduced means value
// equality is coefficient-vector equality.
struct Cyclotomic {
    unsigned conductor = 1;
    std::vector<Rational> coeffs;  // size euler_phi(conductor)
};

// Element of Q[w]/(w^degree - base) where w is the real root of x^degree =
// base (positive base, or negative base with odd degree). Construction via
// radical_root() keeps x^degree - base irreducible over Q, so the quotient
// is a field and zero testing is sound.
struct Radical {
    Rational base;
    unsigned degree = 2;
    std::vector<Rational> coeffs;  // size degree
};

// Arbitrary-precision complex float. Precision is carried by the mpfr parts;
// arithmetic results take the maximum precision of the operands.
struct BigComplex {
    BigFloat re, im;

    BigComplex() = default;
    BigComplex(BigFloat r, BigFloat i) : re(std::move(r)), im(std::move(i)) {}
    unsigned prec_bits() const;
};

BigComplex bc_make(unsigned prec_bits);
BigComplex bc_add(const BigComplex& a, const BigComplex& b);
BigComplex bc_sub(const BigComplex& a, const BigComplex& b);
BigComplex bc_mul(const BigComplex& a, const BigComplex& b);
BigComplex bc_div(const BigComplex& a, const BigComplex& b);
BigFloat bc_abs(const BigComplex& a);
BigComplex bc_exp(const BigComplex& a);
BigComplex bc_log(const BigComplex& a);  // principal branch

// ---------------------------------------------------------------------------
// Coefficient: the tagged scalar used by every series in the engine.
//
// Exact variants (Rational, Cyclotomic, Radical) interoperate: rationals lift
// into either extension, cyclotomics lift to a common conductor. Cyclotomic
// and Radical do not mix, and exact never mixes with BigComplex; both are
// ModeError. Extension elements that collapse to Q demote eagerly to
// Rational, so representation is canonical across variants.

class Coeff {
  public:
    using Storage = std::variant<Rational, Cyclotomic, Radical, BigComplex>;

    Coeff() : v_(Rational(0)) {}
    Coeff(Rational q) : v_(std::move(q)) {}
    Coeff(long n) : v_(Rational(n)) {}
    Coeff(int n) : v_(Rational(n)) {}
    Coeff(Cyclotomic c) : v_(std::move(c)) {}
    Coeff(Radical r) : v_(std::move(r)) {}
    Coeff(BigComplex z) : v_(std::move(z)) {}

    Mode mode() const { return is_exact() ? Mode::exact : Mode::approx; }
    bool is_exact() const { return !std::holds_alternative<BigComplex>(v_); }

    bool is_rational() const { return std::holds_alternative<Rational>(v_); }
    bool is_cyclotomic() const { return std::holds_alternative<Cyclotomic>(v_); }
    bool is_radical() const { return std::holds_alternative<Radical>(v_); }
    bool is_complex() const { return std::holds_alternative<BigComplex>(v_); }

    const Rational& rational() const { return std::get<Rational>(v_); }
    const Cyclotomic& cyclotomic() const { return std::get<Cyclotomic>(v_); }
    const Radical& radical() const { return std::get<Radical>(v_); }
    const BigComplex& complex() const { return std::get<BigComplex>(v_); }

    const Storage& storage() const { return v_; }

    // Structural zero. For exact variants this is value zero; for BigComplex
    // it means both parts are exactly 0 (value comparison needs a tolerance).
    bool is_zero() const;
    bool is_one() const;

  private:
    Storage v_;
};

Coeff operator+(const Coeff& a, const Coeff& b);
Coeff operator-(const Coeff& a, const Coeff& b);
Coeff operator*(const Coeff& a, const Coeff& b);
Coeff operator/(const Coeff& a, const Coeff& b);
Coeff operator-(const Coeff& a);

// Decidable equality for exact values; throws ModeError if either side is
// approximate (BigComplex supports only tolerance comparison).
bool operator==(const Coeff& a, const Coeff& b);
inline bool operator!=(const Coeff& a, const Coeff& b) { return !(a == b); }

Coeff pow(const Coeff& a, long n);
Coeff inv(const Coeff& a);
Coeff conj(const Coeff& a);

// Multiply / divide by a machine integer, valid in both modes.
Coeff mul_int(const Coeff& a, long n);
Coeff div_big(const Coeff& a, const BigInt& n);

// Convert an exact value into the given mode (exact -> identity,
// approx -> embed at prec_bits). Approximate input stays approximate.
Coeff to_mode(const Coeff& a, Mode m, unsigned prec_bits);

// ---------------------------------------------------------------------------
// Cyclotomic construction

unsigned euler_phi(unsigned k);

// k-th cyclotomic polynomial, monic with integer coefficients, ascending
// order, degree euler_phi(k). Computed by dividing x^k - 1 by Phi_d over the
// proper divisors d of k; memoized behind a mutex.
std::vector<BigInt> cyclotomic_polynomial(unsigned k);

// Exact value of e^(2*pi*i*j/k). The representation is normalized to the
// smallest conductor k/gcd(j,k), so equal values get equal representations.
Coeff root_of_unity(long k, long j);

// Exact real b-th root c^(1/b) as a Rational when it exists, otherwise as a
// generator of Q[w]/(w^d - c') with the modulus reduced until irreducible.
// Negative c requires odd b. Throws NotRepresentable otherwise.
Coeff radical_root(const Rational& c, unsigned b);

// If the value is a root of unity, return its minimal order r (value =
// e^(2*pi*i*j/r) for some j coprime to r); returns 0 if it is not one.
unsigned root_of_unity_order(const Coeff& a);

// ---------------------------------------------------------------------------
// Embedding into complex floats

BigComplex embed_complex(const Coeff& a, unsigned prec_bits);

// |embed(a) - embed(b)| at the given precision; works for any variants.
BigFloat abs_diff(const Coeff& a, const Coeff& b, unsigned prec_bits);

// ---------------------------------------------------------------------------
// Text form: rationals "p/q", cyclotomics as polynomials in "zeta(k)",
// radicals as polynomials in "root(d,c)", complex floats "(re,im)".
std::string to_string(const Coeff& a);

Rational make_rational(const BigInt& num, const BigInt& den);
Rational factorial_rational(unsigned k);  // 1/k! is (1 / this)

}  // namespace germflow
