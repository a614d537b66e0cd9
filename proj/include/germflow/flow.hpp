#pragma once

#include <variant>
#include <vector>

#include "germflow/linearize.hpp"
#include "germflow/series.hpp"

namespace germflow {

// ---------------------------------------------------------------------------
// FlowFamily: a one-parameter flow phi^t through a germ. The flow is never
// stored as a series in t; it is conjugacy data (Hyperbolic) or generator
// data (Parabolic), evaluated per t by evaluate_flow.

// phi^t = f^{-1} o Lambda^t o f, where f is a linearizing coordinate with
// f(u(x)) = Lambda f(x) and Lambda = diag(multipliers).
struct Hyperbolic {
    GermMap f;
    std::vector<Coeff> multipliers;
};

// phi^t = exp(t v) for a vector-field germ v. A zero linear part makes the
// Lie series finite per degree and keeps exact evaluation exact; a nonzero
// linear part needs exponentials and therefore approximate coefficients.
struct Parabolic {
    VectorFieldGerm v;
};

class FlowFamily {
  public:
    FlowFamily(Hyperbolic h, unsigned order);
    FlowFamily(Parabolic p, unsigned order);

    bool is_hyperbolic() const { return std::holds_alternative<Hyperbolic>(kind_); }
    const Hyperbolic& hyperbolic() const { return std::get<Hyperbolic>(kind_); }
    const Parabolic& parabolic() const { return std::get<Parabolic>(kind_); }
    unsigned order() const { return order_; }

  private:
    std::variant<Hyperbolic, Parabolic> kind_;
    unsigned order_;
};

// ---------------------------------------------------------------------------
// Obstruction certificates for iterative roots

// One uniquely determined coefficient of the root candidate: coefficient of
// x^index in component `component`. Zero values are recorded explicitly —
// a forced zero is as much a constraint as a forced nonzero.
struct ForcedCoefficient {
    unsigned component;
    MultiIndex index;
    Coeff value;
};

// Witness that no k-th root exists on the chosen branch: at total degree
// `degree` the linear equation alpha * c = beta for the next coefficient has
// alpha = 0 and beta != 0 exactly. Replaying forced_prefix through the k-fold
// composition reproduces both values, so the certificate is checkable
// independently of the solver.
struct ObstructionCertificate {
    unsigned degree;
    Coeff alpha;
    Coeff beta;
    std::vector<ForcedCoefficient> forced_prefix;
    long branch;
};

using RootResult = std::variant<GermMap, ObstructionCertificate>;

// ---------------------------------------------------------------------------
// The exponential map and its inversion

// Lie series phi^t = sum_k (t^k / k!) D_v^k(id) truncated at order N, where
// D_v = sum_i v_i d/dx_i acts componentwise. With a zero linear part the sum
// is finite per degree (exact in exact mode). With a nonzero linear part the
// sum is infinite: exact mode is rejected for t != 0, approximate mode sums
// until the term norm stays below 2^-(prec-8) (ConvergenceError past 10000
// terms).
GermMap exp_flow(const VectorFieldGerm& v, const Coeff& t, unsigned N);

// The time-1 flow: exp_flow(v, 1, N).
GermMap exp_map(const VectorFieldGerm& v, unsigned N);

// Inverse of exp_map for germs tangent to the identity: the generator v with
// exp_map(v) = u up to order N. Solved degree by degree — only the k = 1 term
// of the Lie series contains the degree-d part of v, linearly with unit
// coefficient, so each step is a triangular update with no divisions.
VectorFieldGerm formal_log(const GermMap& u, unsigned N);

// Dispatch on the linear part: identity -> Parabolic via formal_log;
// one variable with |lambda| not in {0, 1} -> Hyperbolic via koenigs;
// diagonal contracting non-resonant -> Hyperbolic via poincare_linearize.
// Unit-circle multipliers other than 1 are rejected (for root-of-unity
// multipliers iterative_root produces certificates instead).
FlowFamily flow_family(const GermMap& u, unsigned N);

// The germ phi^t. Hyperbolic exact mode needs lambda^t representable:
// integer t always works, rational t = a/b works for rational lambda via the
// real b-th root of lambda^a (adjoined as a radical when irrational);
// anything else is NotRepresentable and suggests approximate mode.
GermMap evaluate_flow(const FlowFamily& F, const Coeff& t, unsigned N);

// compose(phi^s, phi^t) minus phi^(s+t), zero in exact mode.
GermMap verify_group_law(const FlowFamily& F, const Coeff& s, const Coeff& t,
                         unsigned N);

// ---------------------------------------------------------------------------
// Iterative roots

// Solve g o g o ... o g (k copies) = u by undetermined coefficients, degree
// by degree. The linear part of g takes the branch-th k-th root of each
// diagonal multiplier (branch is a base-k number, one digit per variable,
// digit 0 = principal root). Returns the root, or an ObstructionCertificate
// at the first degree whose coefficient equation reads 0 * c = beta with
// beta != 0 (exact mode only — approximate coefficients cannot certify).
RootResult iterative_root(const GermMap& u, unsigned k, unsigned N,
                          long branch = 0);

// The area-preserving model germ in the conjugate-pair chart (z, zbar):
// first component zeta_{2m} * (z + ((z - zbar)/(2i))^(2m+1)), second its
// formal conjugate; coefficients exact over Q(zeta_{4m}). Every composition
// square of a formal series misses this germ at total degree 2m+1, which
// iterative_root certifies.
GermMap example2_germ(unsigned m, unsigned N);

}  // namespace germflow
