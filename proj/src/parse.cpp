#include "germflow/parse.hpp"

#include <boost/integer/common_factor_rt.hpp>

#include <cctype>
#include <map>
#include <optional>
#include <sstream>

namespace germflow {

namespace {

// ---------------------------------------------------------------------------
// Tokens

struct Token {
    enum Type {
        integer,
        ident,
        plus,
        minus,
        star,
        slash,
        caret,
        lparen,
        rparen,
        comma,
        end
    };
    Type type = end;
    std::string text;
    std::size_t offset = 0;
};

std::vector<Token> tokenize(const std::string& in) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < in.size()) {
        const char c = in[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.offset = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < in.size() && std::isdigit(static_cast<unsigned char>(in[j])))
                ++j;
            t.type = Token::integer;
            t.text = in.substr(i, j - i);
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < in.size() &&
                   std::isalnum(static_cast<unsigned char>(in[j])))
                ++j;
            t.type = Token::ident;
            t.text = in.substr(i, j - i);
            i = j;
        } else {
            switch (c) {
                case '+': t.type = Token::plus; break;
                case '-': t.type = Token::minus; break;
                case '*': t.type = Token::star; break;
                case '/': t.type = Token::slash; break;
                case '^': t.type = Token::caret; break;
                case '(': t.type = Token::lparen; break;
                case ')': t.type = Token::rparen; break;
                case ',': t.type = Token::comma; break;
                default:
                    throw ParseError(std::string("unexpected character '") + c +
                                         "'",
                                     i);
            }
            t.text = c;
            ++i;
        }
        out.push_back(std::move(t));
    }
    Token t;
    t.type = Token::end;
    t.offset = in.size();
    out.push_back(std::move(t));
    return out;
}

// ---------------------------------------------------------------------------
// Recursive descent

class Parser {
  public:
    explicit Parser(const std::string& input) : toks_(tokenize(input)) {}

    GermExpression run() {
        GermExpression e = expr();
        if (peek().type != Token::end)
            throw ParseError("unexpected trailing input", peek().offset);
        return e;
    }

  private:
    const Token& peek() const { return toks_[pos_]; }

    Token take() { return toks_[pos_++]; }

    Token expect(Token::Type type, const char* what) {
        if (peek().type != type)
            throw ParseError(std::string("expected ") + what, peek().offset);
        return take();
    }

    long expect_uint(const char* what) {
        Token t = expect(Token::integer, what);
        try {
            std::size_t used = 0;
            long v = std::stol(t.text, &used);
            if (used != t.text.size()) throw std::out_of_range("");
            return v;
        } catch (const std::exception&) {
            throw ParseError("integer out of range", t.offset);
        }
    }

    GermExpression expr() {
        GermExpression lhs = term();
        while (peek().type == Token::plus || peek().type == Token::minus) {
            Token op = take();
            GermExpression rhs = term();
            GermExpression node;
            node.kind =
                op.type == Token::plus ? ExprKind::add : ExprKind::sub;
            node.offset = op.offset;
            node.children = {std::move(lhs), std::move(rhs)};
            lhs = std::move(node);
        }
        return lhs;
    }

    GermExpression term() {
        GermExpression lhs = factor();
        while (peek().type == Token::star || peek().type == Token::slash) {
            Token op = take();
            GermExpression rhs = factor();
            // a '/' between two rational literals is the literal p/q
            if (op.type == Token::slash &&
                lhs.kind == ExprKind::rational &&
                rhs.kind == ExprKind::rational) {
                if (rhs.value == 0)
                    throw ParseError("division by zero in literal", op.offset);
                lhs.value /= rhs.value;
                continue;
            }
            GermExpression node;
            node.kind =
                op.type == Token::star ? ExprKind::mul : ExprKind::div;
            node.offset = op.offset;
            node.children = {std::move(lhs), std::move(rhs)};
            lhs = std::move(node);
        }
        return lhs;
    }

    // factor := ['-'] atom ('^' uint)?; the '-' folds into a bare rational
    // literal and otherwise multiplies by -1
    GermExpression factor() {
        if (peek().type == Token::minus) {
            Token op = take();
            GermExpression inner = factor();
            if (inner.kind == ExprKind::rational) {
                inner.value = -inner.value;
                return inner;
            }
            GermExpression minus_one;
            minus_one.kind = ExprKind::rational;
            minus_one.value = -1;
            minus_one.offset = op.offset;
            GermExpression node;
            node.kind = ExprKind::mul;
            node.offset = op.offset;
            node.children = {std::move(minus_one), std::move(inner)};
            return node;
        }
        GermExpression base = atom();
        if (peek().type == Token::caret) {
            Token op = take();
            long e = expect_uint("integer exponent");
            GermExpression node;
            node.kind = ExprKind::pow;
            node.offset = op.offset;
            node.exponent = static_cast<unsigned>(e);
            node.children = {std::move(base)};
            return node;
        }
        return base;
    }

    GermExpression atom() {
        const Token& t = peek();
        switch (t.type) {
            case Token::integer: {
                Token tok = take();
                GermExpression node;
                node.kind = ExprKind::rational;
                node.value = Rational(tok.text);
                node.offset = tok.offset;
                return node;
            }
            case Token::ident:
                return ident_atom();
            case Token::lparen:
                return paren_or_tuple();
            default:
                throw ParseError("expected a value", t.offset);
        }
    }

    GermExpression paren_or_tuple() {
        Token open = expect(Token::lparen, "'('");
        GermExpression first = expr();
        if (peek().type == Token::comma) {
            GermExpression node;
            node.kind = ExprKind::tuple;
            node.offset = open.offset;
            node.children.push_back(std::move(first));
            while (peek().type == Token::comma) {
                take();
                node.children.push_back(expr());
            }
            expect(Token::rparen, "')'");
            return node;
        }
        expect(Token::rparen, "')'");
        return first;
    }

    // parses an expression and requires it to be a (folded) rational literal
    GermExpression rational_arg(const char* what) {
        GermExpression e = expr();
        if (e.kind != ExprKind::rational)
            throw ParseError(std::string("expected ") + what, e.offset);
        return e;
    }

    GermExpression ident_atom() {
        Token t = take();
        const std::string& w = t.text;

        if (w == "z" || w == "zbar" ||
            (w.size() == 2 && w[0] == 'x' && w[1] >= '1' && w[1] <= '9')) {
            GermExpression node;
            node.kind = ExprKind::variable;
            node.name = w;
            node.offset = t.offset;
            return node;
        }

        if (w == "i") {
            GermExpression node;
            node.kind = ExprKind::zeta;
            node.arg = 4;
            node.offset = t.offset;
            return node;
        }

        if (w == "zeta") {
            expect(Token::lparen, "'(' after zeta");
            GermExpression arg = rational_arg("an integer");
            expect(Token::rparen, "')'");
            if (denominator(arg.value) != 1 || arg.value < 1)
                throw ParseError("zeta needs a positive integer", arg.offset);
            GermExpression node;
            node.kind = ExprKind::zeta;
            node.arg = static_cast<long>(numerator(arg.value));
            node.offset = t.offset;
            return node;
        }

        if (w == "exp") return exp_literal(t.offset);

        if (w == "root") {
            expect(Token::lparen, "'(' after root");
            GermExpression deg = rational_arg("an integer root degree");
            expect(Token::comma, "','");
            GermExpression rad = rational_arg("a rational radicand");
            expect(Token::rparen, "')'");
            if (denominator(deg.value) != 1 || deg.value < 2)
                throw ParseError("root degree must be an integer >= 2",
                                 deg.offset);
            GermExpression node;
            node.kind = ExprKind::root;
            node.arg = static_cast<long>(numerator(deg.value));
            node.value = rad.value;
            node.offset = t.offset;
            return node;
        }

        if (w == "pi")
            throw ParseError("pi is only valid inside exp(i*pi*p/q)",
                             t.offset);
        throw ParseError("unknown identifier: " + w, t.offset);
    }

    // exp(i*pi), exp(i*pi*p), exp(i*pi/q), exp(i*pi*p/q)
    GermExpression exp_literal(std::size_t offset) {
        expect(Token::lparen, "'(' after exp");
        Token im = expect(Token::ident, "i");
        if (im.text != "i") throw ParseError("expected i", im.offset);
        expect(Token::star, "'*'");
        Token pi = expect(Token::ident, "pi");
        if (pi.text != "pi") throw ParseError("expected pi", pi.offset);

        long p = 1, q = 1;
        if (peek().type == Token::star) {
            take();
            p = expect_uint("integer numerator");
        }
        if (peek().type == Token::slash) {
            take();
            q = expect_uint("integer denominator");
            if (q < 1)
                throw ParseError("denominator must be positive", peek().offset);
        }
        expect(Token::rparen, "')'");

        // normalize: angle p/q is 2q-periodic in p, stored in lowest terms
        long g = boost::integer::gcd(p, q);
        p /= g;
        q /= g;
        p %= 2 * q;

        GermExpression node;
        node.kind = ExprKind::exppi;
        node.p = p;
        node.q = q;
        node.offset = offset;
        return node;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Rendering (canonical text; inverse of the parser on ASTs)

int precedence(const GermExpression& e) {
    switch (e.kind) {
        case ExprKind::add:
        case ExprKind::sub: return 1;
        case ExprKind::mul:
        case ExprKind::div: return 2;
        case ExprKind::pow: return 3;
        case ExprKind::rational:
            // "p/q" re-tokenizes as a division and "-p" as a unary minus, so
            // fractional and negative literals bind like the operators their
            // text contains and take parentheses in tighter contexts
            if (denominator(e.value) != 1) return 2;
            if (e.value < 0) return 3;
            return 4;
        default: return 4;
    }
}

void render_node(const GermExpression& e, int context, std::string& out) {
    const int prec = precedence(e);
    const bool parens = prec < context;
    if (parens) out += '(';
    switch (e.kind) {
        case ExprKind::variable:
            out += e.name;
            break;
        case ExprKind::rational:
            out += e.value.str();
            break;
        case ExprKind::zeta:
            out += "zeta(" + std::to_string(e.arg) + ")";
            break;
        case ExprKind::exppi: {
            out += "exp(i*pi";
            if (e.p != 1) out += "*" + std::to_string(e.p);
            if (e.q != 1) out += "/" + std::to_string(e.q);
            out += ")";
            break;
        }
        case ExprKind::root:
            out += "root(" + std::to_string(e.arg) + ", " + e.value.str() + ")";
            break;
        case ExprKind::add:
            render_node(e.children[0], 1, out);
            out += " + ";
            render_node(e.children[1], 2, out);
            break;
        case ExprKind::sub:
            render_node(e.children[0], 1, out);
            out += " - ";
            render_node(e.children[1], 2, out);
            break;
        case ExprKind::mul:
            render_node(e.children[0], 2, out);
            out += "*";
            render_node(e.children[1], 3, out);
            break;
        case ExprKind::div:
            render_node(e.children[0], 2, out);
            out += "/";
            render_node(e.children[1], 3, out);
            break;
        case ExprKind::pow:
            render_node(e.children[0], 4, out);
            out += "^" + std::to_string(e.exponent);
            break;
        case ExprKind::tuple: {
            out += '(';
            bool first = true;
            for (const auto& c : e.children) {
                if (!first) out += ", ";
                render_node(c, 1, out);
                first = false;
            }
            out += ')';
            break;
        }
    }
    if (parens) out += ')';
}

}  // namespace

bool GermExpression::operator==(const GermExpression& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case ExprKind::variable: return name == o.name;
        case ExprKind::rational: return value == o.value;
        case ExprKind::zeta: return arg == o.arg;
        case ExprKind::exppi: return p == o.p && q == o.q;
        case ExprKind::root: return arg == o.arg && value == o.value;
        case ExprKind::pow:
            return exponent == o.exponent && children == o.children;
        default: return children == o.children;
    }
}

GermExpression parse_germ(const std::string& input) {
    return Parser(input).run();
}

std::string render_expression(const GermExpression& e) {
    std::string out;
    render_node(e, 1, out);
    return out;
}

// ---------------------------------------------------------------------------
// Lowering

namespace {

void scan_variables(const GermExpression& e, std::map<std::string, std::size_t>& seen) {
    if (e.kind == ExprKind::variable && !seen.count(e.name))
        seen.emplace(e.name, e.offset);
    for (const auto& c : e.children) scan_variables(c, seen);
}

// evaluates a scalar (tuple-free) expression to a series over nvars slots
FormalSeries eval_series(const GermExpression& e, unsigned nvars,
                         const std::map<std::string, unsigned>& slots,
                         unsigned order) {
    switch (e.kind) {
        case ExprKind::variable:
            return FormalSeries::variable(nvars, order, slots.at(e.name));
        case ExprKind::rational:
            return FormalSeries::constant(nvars, order, Coeff(e.value));
        case ExprKind::zeta:
            return FormalSeries::constant(nvars, order,
                                          root_of_unity(e.arg, 1));
        case ExprKind::exppi:
            return FormalSeries::constant(nvars, order,
                                          root_of_unity(2 * e.q, e.p));
        case ExprKind::root:
            return FormalSeries::constant(
                nvars, order,
                radical_root(e.value, static_cast<unsigned>(e.arg)));
        case ExprKind::add:
            return series_add(eval_series(e.children[0], nvars, slots, order),
                              eval_series(e.children[1], nvars, slots, order));
        case ExprKind::sub:
            return series_sub(eval_series(e.children[0], nvars, slots, order),
                              eval_series(e.children[1], nvars, slots, order));
        case ExprKind::mul:
            return series_mul(eval_series(e.children[0], nvars, slots, order),
                              eval_series(e.children[1], nvars, slots, order));
        case ExprKind::div: {
            FormalSeries num = eval_series(e.children[0], nvars, slots, order);
            FormalSeries den = eval_series(e.children[1], nvars, slots, order);
            Coeff c0 = den.coeff(MultiIndex::zero(nvars));
            if (c0.is_zero())
                throw ParseError(
                    "division needs a divisor with nonzero constant term",
                    e.offset);
            // 1/den = (1/c0) (1 + r + r^2 + ...) with r = 1 - den/c0, a
            // series of valuation >= 1, so the sum stops at the order
            FormalSeries r = series_sub(
                FormalSeries::constant(nvars, order, Coeff(1)),
                scalar_mul(inv(c0), den));
            FormalSeries recip = FormalSeries::constant(nvars, order, Coeff(1));
            FormalSeries power = FormalSeries::constant(nvars, order, Coeff(1));
            for (unsigned j = 1; j <= order; ++j) {
                power = series_mul(power, r);
                if (power.empty()) break;
                recip = series_add(recip, power);
            }
            return series_mul(scalar_mul(inv(c0), recip), num);
        }
        case ExprKind::pow: {
            FormalSeries base = eval_series(e.children[0], nvars, slots, order);
            FormalSeries acc = FormalSeries::constant(nvars, order, Coeff(1));
            for (unsigned j = 0; j < e.exponent; ++j)
                acc = series_mul(acc, base);
            return acc;
        }
        case ExprKind::tuple:
            throw ParseError("tuple is only valid as the component list",
                             e.offset);
    }
    throw ParseError("malformed expression", e.offset);
}

Coeff eval_constant(const GermExpression& e) {
    std::map<std::string, std::size_t> names;
    scan_variables(e, names);
    if (!names.empty())
        throw ParseError("expected a constant, found variable " +
                             names.begin()->first,
                         names.begin()->second);
    FormalSeries s = eval_series(e, 1, {}, 0);
    if (s.empty()) return Coeff(0);
    return s.terms().begin()->second;
}

}  // namespace

LoweredComponents lower_components(const GermExpression& e, unsigned order) {
    LoweredComponents out;

    if (e.kind == ExprKind::tuple) {
        // explicit components over x1..xn
        const unsigned n = static_cast<unsigned>(e.children.size());
        std::map<std::string, std::size_t> names;
        scan_variables(e, names);
        std::map<std::string, unsigned> slots;
        for (unsigned s = 0; s < n; ++s) {
            std::string v = "x" + std::to_string(s + 1);
            slots.emplace(v, s);
            out.variables.push_back(v);
        }
        for (const auto& [name, off] : names)
            if (!slots.count(name))
                throw ParseError(
                    "tuple components use x1..x" + std::to_string(n) +
                        "; found " + name,
                    off);
        for (const auto& c : e.children)
            out.components.push_back(eval_series(c, n, slots, order));
    } else {
        // scalar chart: z alone, or the conjugate pair (z, zbar)
        std::map<std::string, std::size_t> names;
        scan_variables(e, names);
        if (names.empty())
            throw ParseError("expression has no variables; expected a germ",
                             e.offset);
        for (const auto& [name, off] : names)
            if (name != "z" && name != "zbar")
                throw ParseError(
                    "a scalar expression uses z (and zbar); give an n-tuple "
                    "for x1..xn",
                    off);
        if (names.count("zbar")) {
            std::map<std::string, unsigned> slots{{"z", 0u}, {"zbar", 1u}};
            FormalSeries first = eval_series(e, 2, slots, order);
            FormalSeries second = conjugate_involution(first);
            out.components = {std::move(first), std::move(second)};
            out.variables = {"z", "zbar"};
            out.conjugate_pair = true;
        } else {
            std::map<std::string, unsigned> slots{{"z", 0u}};
            out.components = {eval_series(e, 1, slots, order)};
            out.variables = {"z"};
        }
    }

    for (std::size_t s = 0; s < out.components.size(); ++s) {
        const unsigned n = static_cast<unsigned>(out.components.size());
        const Coeff c0 = out.components[s].coeff(MultiIndex::zero(n));
        if (!c0.is_zero())
            throw ParseError("nonzero constant term in component " +
                                 std::to_string(s + 1),
                             e.offset);
    }
    return out;
}

GermMap lower_germ(const GermExpression& e, unsigned order) {
    return GermMap(lower_components(e, order).components);
}

VectorFieldGerm lower_field(const GermExpression& e, unsigned order) {
    return VectorFieldGerm(lower_components(e, order).components);
}

std::vector<Coeff> lower_constants(const GermExpression& e) {
    std::vector<Coeff> out;
    if (e.kind == ExprKind::tuple) {
        for (const auto& c : e.children) out.push_back(eval_constant(c));
    } else {
        out.push_back(eval_constant(e));
    }
    return out;
}

SquareMatrix lower_matrix(const GermExpression& e) {
    if (e.kind != ExprKind::tuple)
        throw ParseError("a matrix is a tuple of row tuples", e.offset);
    const unsigned n = static_cast<unsigned>(e.children.size());
    SquareMatrix m(n);
    for (unsigned r = 0; r < n; ++r) {
        const GermExpression& row = e.children[r];
        if (row.kind != ExprKind::tuple || row.children.size() != n)
            throw ParseError(
                "matrix rows must be tuples of " + std::to_string(n) +
                    " entries",
                row.offset);
        for (unsigned c = 0; c < n; ++c)
            m.at(r, c) = eval_constant(row.children[c]);
    }
    return m;
}

}  // namespace germflow
