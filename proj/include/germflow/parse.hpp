#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "germflow/linearize.hpp"
#include "germflow/series.hpp"

namespace germflow {

// ---------------------------------------------------------------------------
// Surface syntax for germs, vector fields, multiplier tuples and matrices.
//
// Grammar (whitespace insensitive):
//   expr   := ['-'] term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := atom ('^' uint)?
//   atom   := variable | literal | '(' expr ')' | tuple
//   tuple  := '(' expr (',' expr)+ ')'
//
// Variables are z and zbar (the conjugate-pair chart) or x1..x9. Literals
// are unsigned integers, zeta(k), exp(i*pi), exp(i*pi/q), exp(i*pi*p),
// exp(i*pi*p/q), root(b, c) for the real b-th root of the rational c, and i
// as shorthand for zeta(4). A '/' between two rational literals folds into
// a single rational, so 3/4 is one literal; otherwise '/' divides by any
// series with a nonzero constant term, as in z/(1 + z). A leading '-'
// before a number joins the literal; before any other atom it parses as
// multiplication by -1.

enum class ExprKind {
    variable,  // name
    rational,  // value
    zeta,      // arg = k: the root of unity zeta_k
    exppi,     // p, q: exp(i*pi*p/q), normalized to 0 <= p < 2q, gcd(p,q)=1
    root,      // arg = b, value = c: the real b-th root of c
    add,       // children[0] + children[1]
    sub,       // children[0] - children[1]
    mul,       // children[0] * children[1]
    div,       // children[0] / children[1]
    pow,       // children[0] ^ exponent
    tuple      // children... (component list)
};

struct GermExpression {
    ExprKind kind = ExprKind::rational;
    std::string name;                      // variable
    Rational value;                        // rational literal, root radicand
    long arg = 0;                          // zeta conductor, root degree
    long p = 0, q = 1;                     // exppi exponent p/q
    unsigned exponent = 0;                 // pow
    std::vector<GermExpression> children;  // operator and tuple nodes
    std::size_t offset = 0;                // byte position, for diagnostics

    // structural equality; offsets are diagnostics, not structure
    bool operator==(const GermExpression& o) const;
};

GermExpression parse_germ(const std::string& input);

// Canonical text form; parse_germ(render_expression(e)) == e.
std::string render_expression(const GermExpression& e);

// ---------------------------------------------------------------------------
// Lowering an expression to engine inputs.

// Germ or vector-field components. A scalar expression over z (optionally
// zbar) lowers to the 1-variable chart, or to the conjugate-pair chart with
// the second component derived by the conjugation involution when zbar
// occurs. An n-tuple over x1..xn lowers to n explicit components.
struct LoweredComponents {
    std::vector<FormalSeries> components;
    std::vector<std::string> variables;  // display names per slot
    bool conjugate_pair = false;
};

LoweredComponents lower_components(const GermExpression& e, unsigned order);

// The same lowering followed by the germ-map invariants (zero constant
// term is checked by lower_components already; this wraps the result).
GermMap lower_germ(const GermExpression& e, unsigned order);
VectorFieldGerm lower_field(const GermExpression& e, unsigned order);

// Constant expressions: a scalar or flat tuple of scalars with no
// variables, e.g. multiplier lists for resonance checks.
std::vector<Coeff> lower_constants(const GermExpression& e);

// A tuple of n equal-length n-tuples of constants lowers to a matrix,
// e.g. ((1,1/2,0),(0,1,0),(0,0,1)).
SquareMatrix lower_matrix(const GermExpression& e);

}  // namespace germflow
