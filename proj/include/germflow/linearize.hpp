#pragma once

#include <utility>
#include <vector>

#include "germflow/series.hpp"

namespace germflow {

// ---------------------------------------------------------------------------
// SquareMatrix: small dense matrix of scalars. Exact entries for algebraic
// checks, complex-float entries for logarithms and fractional powers.

class SquareMatrix {
  public:
    explicit SquareMatrix(unsigned n) : n_(n), e_(std::size_t(n) * n, Coeff(0)) {
        if (n < 1) throw DomainError("matrix dimension must be positive");
    }

    static SquareMatrix identity(unsigned n) {
        SquareMatrix m(n);
        for (unsigned i = 0; i < n; ++i) m.at(i, i) = Coeff(1);
        return m;
    }

    unsigned dim() const { return n_; }
    Coeff& at(unsigned r, unsigned c) { return e_.at(std::size_t(r) * n_ + c); }
    const Coeff& at(unsigned r, unsigned c) const {
        return e_.at(std::size_t(r) * n_ + c);
    }

    bool is_zero() const {
        for (const auto& x : e_)
            if (!x.is_zero()) return false;
        return true;
    }

    Mode mode() const {
        for (const auto& x : e_)
            if (!x.is_exact()) return Mode::approx;
        return Mode::exact;
    }

    // highest precision among approximate entries (64 if none)
    unsigned prec_bits() const {
        unsigned p = 64;
        for (const auto& x : e_)
            if (!x.is_exact()) p = std::max(p, x.complex().prec_bits());
        return p;
    }

  private:
    unsigned n_;
    std::vector<Coeff> e_;
};

SquareMatrix mat_add(const SquareMatrix& a, const SquareMatrix& b);
SquareMatrix mat_sub(const SquareMatrix& a, const SquareMatrix& b);
SquareMatrix mat_mul(const SquareMatrix& a, const SquareMatrix& b);
SquareMatrix mat_scale(const Coeff& c, const SquareMatrix& m);
SquareMatrix mat_to_mode(const SquareMatrix& m, Mode mode, unsigned prec_bits);
bool mat_equal_exact(const SquareMatrix& a, const SquareMatrix& b);
BigFloat frobenius_norm(const SquareMatrix& m, unsigned prec_bits);

// ---------------------------------------------------------------------------
// Resonance

struct ResonanceWitness {
    unsigned s;    // component index, 0-based
    MultiIndex m;  // total degree >= 2, with lambda_s = prod lambda_i^{m_i}

    bool operator==(const ResonanceWitness& o) const { return s == o.s && m == o.m; }
};

// Thrown when a linearization meets a resonant multiplier tuple; carries the
// witnesses so callers can report exactly which relations block the solve.
class ResonanceError : public DomainError {
  public:
    ResonanceError(const std::string& msg, std::vector<ResonanceWitness> w)
        : DomainError(msg), witnesses(std::move(w)) {}

    std::vector<ResonanceWitness> witnesses;
};

// Enumerates all (s, m) with 2 <= |m| <= max_degree and lambda_s equal to
// lambda^m. Exact multipliers compare exactly; approximate multipliers
// compare within tolerance (which must then be positive).
std::vector<ResonanceWitness> resonance_check(const std::vector<Coeff>& multipliers,
                                              unsigned max_degree,
                                              const BigFloat* tolerance = nullptr);

// ---------------------------------------------------------------------------
// Linearization

// f conjugates u to its linear part: compose(f, u) = compose(Lambda, f) with
// Lambda = diag(multipliers), and f has identity linear part.
struct LinearizationResult {
    GermMap f;
    std::vector<Coeff> multipliers;
};

// Degree-1 coefficient matrix J(0) of the germ.
SquareMatrix multiplier(const GermMap& u);

// Frobenius distance ||J - E||_F and whether it is < 1. Rational norm^2
// decides the boundary exactly; other exact values are compared numerically
// at 512 bits (a tie would force norm^2 rational, so no tie is misjudged).
std::pair<BigFloat, bool> closeness_check(const SquareMatrix& J,
                                          unsigned prec_bits = 256);

// One-variable linearization: f = z + O(z^2) with f(u(z)) = lambda*f(z),
// coefficients from the recursion c_k (lambda^k - lambda) = -(known data).
// Requires |lambda| not in {0, 1}; exact mode decides this algebraically.
LinearizationResult koenigs(const GermMap& u, unsigned N);

// n-variable linearization for diagonal J(0), all |lambda_i| < 1, and no
// resonances up to degree N. Solves the homological equation degree by
// degree, dividing by (lambda_s - lambda^m).
LinearizationResult poincare_linearize(const GermMap& u, unsigned N);

// ---------------------------------------------------------------------------
// Matrix logarithm and fractional powers

// Mercator series log(E + X) = X - X^2/2 + ..., requiring ||J - E||_F < 1.
// Exact mode works when X is nilpotent (the series terminates); otherwise
// the call requires approximate entries. Summation stops when the term norm
// falls below 2^-(precision-8); more than 10000 terms is a convergence error.
SquareMatrix matrix_log(const SquareMatrix& J);

// exp(L) by the exponential series, same termination rule; exact nilpotent
// L sums finitely and stays exact.
SquareMatrix matrix_exp(const SquareMatrix& L);

// J^t = exp(t * log J). Mixed modes promote the exact side to approximate.
SquareMatrix matrix_power_t(const SquareMatrix& J, const Coeff& t);

}  // namespace germflow
