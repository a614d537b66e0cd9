#pragma once

#include <map>
#include <vector>

#include "germflow/coeff.hpp"

namespace germflow {

// ---------------------------------------------------------------------------
// MultiIndex: exponent vector of a monomial x_0^{e_0} ... x_{n-1}^{e_{n-1}}.

struct MultiIndex {
    std::vector<unsigned> e;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<unsigned> exps) : e(std::move(exps)) {}

    static MultiIndex zero(unsigned nvars) {
        return MultiIndex(std::vector<unsigned>(nvars, 0));
    }
    static MultiIndex unit(unsigned nvars, unsigned var) {
        MultiIndex m = zero(nvars);
        m.e[var] = 1;
        return m;
    }

    unsigned size() const { return static_cast<unsigned>(e.size()); }
    unsigned degree() const {
        unsigned d = 0;
        for (unsigned x : e) d += x;
        return d;
    }

    bool operator==(const MultiIndex& o) const { return e == o.e; }
};

// Graded total order: ascending total degree, and within a degree the index
// with the larger leading exponent comes first (so z^2 precedes z*zbar
// precedes zbar^2). Every iteration and rendering uses this order, making
// outputs reproducible bit-for-bit.
struct MultiIndexOrder {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        unsigned da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        return a.e > b.e;
    }
};

// ---------------------------------------------------------------------------
// FormalSeries: truncated formal power series, sparse storage.
//
// Invariants: no stored zero coefficients; every stored index has length
// nvars and total degree <= order; all coefficients share one arithmetic
// mode. Terms of degree > order are identically discarded by every
// operation.

class FormalSeries {
  public:
    using TermMap = std::map<MultiIndex, Coeff, MultiIndexOrder>;

    FormalSeries(unsigned nvars, unsigned order) : nvars_(nvars), order_(order) {
        if (nvars < 1) throw DomainError("series needs at least one variable");
    }

    static FormalSeries zero(unsigned nvars, unsigned order) {
        return FormalSeries(nvars, order);
    }
    static FormalSeries constant(unsigned nvars, unsigned order, const Coeff& c) {
        FormalSeries s(nvars, order);
        s.set_coeff(MultiIndex::zero(nvars), c);
        return s;
    }
    static FormalSeries variable(unsigned nvars, unsigned order, unsigned var) {
        FormalSeries s(nvars, order);
        if (var >= nvars) throw DomainError("variable index out of range");
        if (order >= 1) s.set_coeff(MultiIndex::unit(nvars, var), Coeff(1));
        return s;
    }

    unsigned nvars() const { return nvars_; }
    unsigned order() const { return order_; }
    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    // Structural zero for absent indices is exact rational 0.
    Coeff coeff(const MultiIndex& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Coeff(0) : it->second;
    }

    void set_coeff(const MultiIndex& m, const Coeff& c) {
        if (m.size() != nvars_) throw DomainError("multi-index arity mismatch");
        if (m.degree() > order_) return;
        if (c.is_zero())
            terms_.erase(m);
        else
            terms_[m] = c;
    }

    void add_to_coeff(const MultiIndex& m, const Coeff& c) {
        if (m.size() != nvars_) throw DomainError("multi-index arity mismatch");
        if (m.degree() > order_ || c.is_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, c);
        } else {
            Coeff s = it->second + c;
            if (s.is_zero())
                terms_.erase(it);
            else
                it->second = std::move(s);
        }
    }

    // exact unless some stored coefficient is a complex float
    Mode mode() const {
        for (const auto& [m, c] : terms_)
            if (!c.is_exact()) return Mode::approx;
        return Mode::exact;
    }

    bool operator==(const FormalSeries& o) const {
        if (nvars_ != o.nvars_ || terms_.size() != o.terms_.size()) return false;
        auto a = terms_.begin();
        auto b = o.terms_.begin();
        for (; a != terms_.end(); ++a, ++b)
            if (!(a->first == b->first) || a->second != b->second) return false;
        return true;
    }

  private:
    unsigned nvars_;
    unsigned order_;
    TermMap terms_;
};

FormalSeries series_add(const FormalSeries& a, const FormalSeries& b);
FormalSeries series_sub(const FormalSeries& a, const FormalSeries& b);
FormalSeries series_mul(const FormalSeries& a, const FormalSeries& b);
// multiply with an explicit output order instead of the operands' minimum
// (products beyond it are dropped; the operands' own orders are ignored)
FormalSeries series_mul_to(const FormalSeries& a, const FormalSeries& b,
                           unsigned order);
FormalSeries scalar_mul(const Coeff& c, const FormalSeries& s);
FormalSeries truncate(const FormalSeries& s, unsigned new_order);
FormalSeries derive(const FormalSeries& s, unsigned var);

// Reinterpret a polynomial known in full as a series of higher order (all
// discarded coefficients are genuinely zero). Never changes stored terms.
FormalSeries with_order(const FormalSeries& s, unsigned order);

// ---------------------------------------------------------------------------
// GermMap: n series in n variables fixing the origin, u(0) = 0. The linear
// part J(0) is recoverable from the degree-1 coefficients. The zero germ is
// legal; operations needing invertibility reject it themselves.

class GermMap {
  public:
    explicit GermMap(std::vector<FormalSeries> components);

    static GermMap identity(unsigned nvars, unsigned order);

    unsigned nvars() const { return static_cast<unsigned>(comps_.size()); }
    unsigned order() const { return comps_.front().order(); }
    const FormalSeries& component(unsigned i) const { return comps_.at(i); }
    const std::vector<FormalSeries>& components() const { return comps_; }

    Coeff linear_coeff(unsigned s, unsigned j) const {
        return comps_.at(s).coeff(MultiIndex::unit(nvars(), j));
    }

    Mode mode() const {
        for (const auto& c : comps_)
            if (c.mode() == Mode::approx) return Mode::approx;
        return Mode::exact;
    }

    bool operator==(const GermMap& o) const { return comps_ == o.comps_; }

  private:
    std::vector<FormalSeries> comps_;
};

// VectorFieldGerm: n series in n variables with v(0) = 0.
class VectorFieldGerm {
  public:
    explicit VectorFieldGerm(std::vector<FormalSeries> components);

    static VectorFieldGerm zero(unsigned nvars, unsigned order);

    unsigned nvars() const { return static_cast<unsigned>(comps_.size()); }
    unsigned order() const { return comps_.front().order(); }
    const FormalSeries& component(unsigned i) const { return comps_.at(i); }
    const std::vector<FormalSeries>& components() const { return comps_; }

    bool operator==(const VectorFieldGerm& o) const { return comps_ == o.comps_; }

  private:
    std::vector<FormalSeries> comps_;
};

// Substitute args into s (Horner in the highest variable, recursively).
// Every args[i] must have zero constant term and match arity.
FormalSeries compose_series(const FormalSeries& s,
                            const std::vector<FormalSeries>& args);

GermMap compose(const GermMap& outer, const GermMap& inner);
GermMap compositional_inverse(const GermMap& u);
GermMap germ_sub(const GermMap& a, const GermMap& b);  // componentwise difference
bool germ_is_zero(const GermMap& g);

GermMap truncate(const GermMap& g, unsigned new_order);
GermMap with_order(const GermMap& g, unsigned order);
VectorFieldGerm with_order(const VectorFieldGerm& v, unsigned order);

// ---------------------------------------------------------------------------
// The conjugation involution of the 2-variable (z, zbar) chart: coefficients
// conjugate, exponents swap. An involution: applying it twice is identity.
FormalSeries conjugate_involution(const FormalSeries& s);

// Builds the 2-variable germ (f, involution(f)) whose second component is
// the formal conjugate of the first — the conjugate-pair chart invariant.
GermMap make_conjugate_pair(const FormalSeries& first);

}  // namespace germflow
