#include "germflow/render.hpp"

#include <cmath>
#include <sstream>

namespace germflow {

namespace {

std::string bf_str(const BigFloat& x, unsigned digits) {
    return x.str(digits);
}

// decimal significant digits carried by prec_bits binary digits
unsigned full_digits(unsigned prec_bits) {
    return static_cast<unsigned>(prec_bits * 0.30103) + 2;
}

std::string complex_str(const BigComplex& z, unsigned digits) {
    std::string out = bf_str(z.re, digits);
    if (z.im >= 0)
        out += " + " + bf_str(z.im, digits) + "*i";
    else
        out += " - " + bf_str(-z.im, digits) + "*i";
    return out;
}

// polynomial over a named generator ("zeta(8)", "root(2, 1/2)"), exact
// rational coefficients by ascending power
std::string generator_poly(const std::string& gen,
                           const std::vector<Rational>& coeffs) {
    std::string out;
    for (std::size_t p = 0; p < coeffs.size(); ++p) {
        const Rational& c = coeffs[p];
        if (c == 0) continue;
        const bool neg = c < 0;
        const Rational mag = neg ? Rational(-c) : c;
        std::string body;
        if (p == 0) {
            body = mag.str();
        } else {
            std::string power = gen;
            if (p > 1) power += "^" + std::to_string(p);
            body = (mag == 1) ? power : mag.str() + "*" + power;
        }
        if (out.empty())
            out = neg ? "-" + body : body;
        else
            out += (neg ? " - " : " + ") + body;
    }
    return out.empty() ? "0" : out;
}

std::string monomial_text(const MultiIndex& m,
                          const std::vector<std::string>& vars) {
    std::string out;
    for (unsigned i = 0; i < m.size(); ++i) {
        if (m.e[i] == 0) continue;
        if (!out.empty()) out += "*";
        out += vars[i];
        if (m.e[i] > 1) out += "^" + std::to_string(m.e[i]);
    }
    return out;
}

// one series term as (negative?, body) so the series join can place signs
struct TermText {
    bool negative = false;
    std::string body;
};

TermText term_text(const Coeff& c, const std::string& mono) {
    TermText t;
    if (c.is_rational()) {
        const Rational& q = c.rational();
        t.negative = q < 0;
        const Rational mag = t.negative ? Rational(-q) : q;
        if (mono.empty())
            t.body = mag.str();
        else if (mag == 1)
            t.body = mono;
        else
            t.body = mag.str() + "*" + mono;
        return t;
    }
    std::string text = render_coeff(c);
    // composite values (several terms, or a leading sign) need parentheses
    if (text.find(" + ") != std::string::npos ||
        text.find(" - ") != std::string::npos || text[0] == '-')
        text = "(" + text + ")";
    t.body = mono.empty() ? text : text + "*" + mono;
    return t;
}

Json index_json(const MultiIndex& m) {
    Json a = Json::array();
    for (unsigned i = 0; i < m.size(); ++i) a.push_back(m.e[i]);
    return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// text

std::string render_coeff(const Coeff& c) {
    if (c.is_rational()) return c.rational().str();
    if (c.is_cyclotomic()) {
        const Cyclotomic& cy = c.cyclotomic();
        return generator_poly("zeta(" + std::to_string(cy.conductor) + ")",
                              cy.coeffs);
    }
    if (c.is_radical()) {
        const Radical& r = c.radical();
        return generator_poly(
            "root(" + std::to_string(r.degree) + ", " + r.base.str() + ")",
            r.coeffs);
    }
    const BigComplex& z = c.complex();
    return complex_str(z, 20);
}

std::string render_series(const FormalSeries& s,
                          const std::vector<std::string>& vars) {
    std::string out;
    for (const auto& [m, c] : s.terms()) {
        TermText t = term_text(c, monomial_text(m, vars));
        if (out.empty())
            out = t.negative ? "-" + t.body : t.body;
        else
            out += (t.negative ? " - " : " + ") + t.body;
    }
    return out.empty() ? "0" : out;
}

std::string render_components(const std::vector<FormalSeries>& comps,
                              const std::vector<std::string>& vars) {
    if (comps.size() == 1) return render_series(comps[0], vars);
    std::string out = "(";
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (i) out += ", ";
        out += render_series(comps[i], vars);
    }
    return out + ")";
}

std::string render_germ(const GermMap& g, const std::vector<std::string>& vars) {
    return render_components(g.components(), vars);
}

std::string render_field(const VectorFieldGerm& v,
                         const std::vector<std::string>& vars) {
    return render_components(v.components(), vars);
}

std::string render_certificate(const ObstructionCertificate& c,
                               const std::vector<std::string>& vars) {
    std::ostringstream out;
    out << "obstruction at degree " << c.degree << " (branch " << c.branch
        << ")\n";
    out << "alpha = " << render_coeff(c.alpha) << "\n";
    out << "beta = " << render_coeff(c.beta);
    if (!c.forced_prefix.empty()) {
        out << "\nforced prefix:";
        for (const ForcedCoefficient& f : c.forced_prefix)
            out << "\n  component " << f.component + 1 << ", "
                << monomial_text(f.index, vars) << ": "
                << render_coeff(f.value);
    }
    return out.str();
}

std::string render_witnesses(const std::vector<ResonanceWitness>& w) {
    if (w.empty()) return "no resonances";
    std::string out;
    for (const ResonanceWitness& r : w) {
        std::string rhs;
        for (unsigned i = 0; i < r.m.size(); ++i) {
            if (r.m.e[i] == 0) continue;
            if (!rhs.empty()) rhs += "*";
            rhs += "lambda_" + std::to_string(i + 1);
            if (r.m.e[i] > 1) rhs += "^" + std::to_string(r.m.e[i]);
        }
        if (!out.empty()) out += "\n";
        out += "lambda_" + std::to_string(r.s + 1) + " = " + rhs;
    }
    return out;
}

std::string render_matrix(const SquareMatrix& m) {
    std::string out = "(";
    for (unsigned r = 0; r < m.dim(); ++r) {
        if (r) out += ", ";
        out += "(";
        for (unsigned c = 0; c < m.dim(); ++c) {
            if (c) out += ", ";
            out += render_coeff(m.at(r, c));
        }
        out += ")";
    }
    return out + ")";
}

std::string render_flow(const FlowFamily& F,
                        const std::vector<std::string>& vars) {
    std::ostringstream out;
    if (F.is_hyperbolic()) {
        const Hyperbolic& h = F.hyperbolic();
        out << "hyperbolic flow of order " << F.order() << "\n";
        out << "multipliers: ";
        for (std::size_t i = 0; i < h.multipliers.size(); ++i) {
            if (i) out << ", ";
            out << render_coeff(h.multipliers[i]);
        }
        out << "\nconjugacy: " << render_germ(h.f, vars);
    } else {
        out << "parabolic flow of order " << F.order() << "\n";
        out << "generator: " << render_field(F.parabolic().v, vars);
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// json

Json coeff_json(const Coeff& c) {
    Json j;
    if (c.is_rational()) {
        j["type"] = "rational";
        j["value"] = c.rational().str();
    } else if (c.is_cyclotomic()) {
        const Cyclotomic& cy = c.cyclotomic();
        j["type"] = "cyclotomic";
        j["conductor"] = cy.conductor;
        Json terms = Json::array();
        for (std::size_t p = 0; p < cy.coeffs.size(); ++p)
            if (cy.coeffs[p] != 0)
                terms.push_back(
                    {{"power", p}, {"value", cy.coeffs[p].str()}});
        j["terms"] = std::move(terms);
    } else if (c.is_radical()) {
        const Radical& r = c.radical();
        j["type"] = "radical";
        j["degree"] = r.degree;
        j["radicand"] = r.base.str();
        Json terms = Json::array();
        for (std::size_t p = 0; p < r.coeffs.size(); ++p)
            if (r.coeffs[p] != 0)
                terms.push_back({{"power", p}, {"value", r.coeffs[p].str()}});
        j["terms"] = std::move(terms);
    } else {
        const BigComplex& z = c.complex();
        const unsigned digits = full_digits(z.prec_bits());
        j["type"] = "complex";
        j["re"] = bf_str(z.re, digits);
        j["im"] = bf_str(z.im, digits);
        j["precision"] = z.prec_bits();
    }
    return j;
}

Json series_json(const std::vector<FormalSeries>& comps, unsigned order,
                 const std::vector<std::string>& vars) {
    Json j;
    j["variables"] = vars;
    j["order"] = order;
    Json components = Json::array();
    for (const FormalSeries& s : comps) {
        Json terms = Json::array();
        for (const auto& [m, c] : s.terms())
            terms.push_back({{"index", index_json(m)}, {"value", coeff_json(c)}});
        components.push_back({{"terms", std::move(terms)}});
    }
    j["components"] = std::move(components);
    return j;
}

Json germ_json(const GermMap& g, const std::vector<std::string>& vars) {
    return series_json(g.components(), g.order(), vars);
}

Json field_json(const VectorFieldGerm& v, const std::vector<std::string>& vars) {
    unsigned order = v.components().empty() ? 0 : v.components().front().order();
    return series_json(v.components(), order, vars);
}

Json certificate_json(const ObstructionCertificate& c) {
    // alpha, beta and prefix values are grammar-compatible exact text:
    // certificates are only produced in exact mode, so the strings are
    // faithful (and re-parseable as constant expressions)
    Json j;
    j["degree"] = c.degree;
    j["alpha"] = render_coeff(c.alpha);
    j["beta"] = render_coeff(c.beta);
    j["branch"] = c.branch;
    Json prefix = Json::array();
    for (const ForcedCoefficient& f : c.forced_prefix)
        prefix.push_back({{"component", f.component},
                          {"index", index_json(f.index)},
                          {"value", render_coeff(f.value)}});
    j["forced_prefix"] = std::move(prefix);
    return j;
}

Json witnesses_json(const std::vector<ResonanceWitness>& w) {
    Json a = Json::array();
    for (const ResonanceWitness& r : w)
        a.push_back({{"component", r.s}, {"exponents", index_json(r.m)}});
    return a;
}

Json matrix_json(const SquareMatrix& m) {
    Json j;
    j["dim"] = m.dim();
    Json rows = Json::array();
    for (unsigned r = 0; r < m.dim(); ++r) {
        Json row = Json::array();
        for (unsigned c = 0; c < m.dim(); ++c) row.push_back(coeff_json(m.at(r, c)));
        rows.push_back(std::move(row));
    }
    j["entries"] = std::move(rows);
    return j;
}

Json flow_json(const FlowFamily& F, const std::vector<std::string>& vars) {
    Json j;
    if (F.is_hyperbolic()) {
        const Hyperbolic& h = F.hyperbolic();
        j["type"] = "hyperbolic";
        j["order"] = F.order();
        Json mult = Json::array();
        for (const Coeff& c : h.multipliers) mult.push_back(coeff_json(c));
        j["multipliers"] = std::move(mult);
        j["conjugacy"] = germ_json(h.f, vars);
    } else {
        j["type"] = "parabolic";
        j["order"] = F.order();
        j["generator"] = field_json(F.parabolic().v, vars);
    }
    return j;
}

}  // namespace germflow
