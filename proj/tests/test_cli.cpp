// Surface syntax and the command-line binary: expression round trips,
// lowering into engine objects, rendered output, JSON shapes, exit codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/integer/common_factor.hpp>
#include <cstdio>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "germflow/flow.hpp"
#include "germflow/parse.hpp"
#include "germflow/render.hpp"

using namespace germflow;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

// ---------------------------------------------------------------------------
// Random expressions, constrained to the parser's canonical image so that
// parse(render(e)) == e is the honest equality (the parser folds rational
// division and normalizes exp(i*pi*p/q) angles; the generator emits only
// already-folded shapes).

struct ExprGen {
    std::mt19937 rng{20250819};

    long pick(long lo, long hi) {
        return std::uniform_int_distribution<long>(lo, hi)(rng);
    }

    GermExpression variable() {
        static const char* names[] = {"z", "zbar", "x1", "x2", "x3"};
        GermExpression e;
        e.kind = ExprKind::variable;
        e.name = names[pick(0, 4)];
        return e;
    }

    GermExpression rational() {
        GermExpression e;
        e.kind = ExprKind::rational;
        e.value = Rational(pick(-30, 30), pick(1, 12));
        return e;
    }

    GermExpression zeta() {
        GermExpression e;
        e.kind = ExprKind::zeta;
        e.arg = pick(1, 16);
        return e;
    }

    GermExpression exppi() {
        // same normalization the parser applies: lowest terms, p mod 2q
        long p = pick(0, 17), d = pick(1, 9);
        long g = boost::integer::gcd(p, d);
        p /= g;
        d /= g;
        p %= 2 * d;
        GermExpression e;
        e.kind = ExprKind::exppi;
        e.p = p;
        e.q = d;
        return e;
    }

    GermExpression root_lit() {
        GermExpression e;
        e.kind = ExprKind::root;
        e.arg = pick(2, 5);
        e.value = Rational(pick(1, 9), pick(1, 6));
        return e;
    }

    GermExpression node(int depth) {
        const long kinds = depth == 0 ? 4 : 8;
        switch (pick(0, kinds)) {
            case 0: return variable();
            case 1: return rational();
            case 2: return zeta();
            case 3: return exppi();
            case 4: return root_lit();
            case 5:
            case 6: {
                GermExpression e;
                const long op = pick(0, 2);
                e.kind = op == 0   ? ExprKind::add
                         : op == 1 ? ExprKind::sub
                                   : ExprKind::mul;
                e.children = {node(depth - 1), node(depth - 1)};
                return e;
            }
            case 7: {
                GermExpression e;
                e.kind = ExprKind::div;
                GermExpression a = node(depth - 1);
                GermExpression b = node(depth - 1);
                // a rational over a rational is one literal to the parser
                if (a.kind == ExprKind::rational && b.kind == ExprKind::rational)
                    b = variable();
                e.children = {std::move(a), std::move(b)};
                return e;
            }
            default: {
                GermExpression e;
                e.kind = ExprKind::pow;
                e.exponent = static_cast<unsigned>(pick(0, 6));
                e.children = {node(depth - 1)};
                return e;
            }
        }
    }

    GermExpression toplevel() {
        if (pick(0, 5) == 0) {
            GermExpression e;
            e.kind = ExprKind::tuple;
            const long n = pick(2, 3);
            for (long i = 0; i < n; ++i) e.children.push_back(node(2));
            return e;
        }
        return node(3);
    }
};

// ---------------------------------------------------------------------------
// Driving the installed binary.

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(GERMFLOW_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = std::move(out);
    return r;
}

// shell-level helper for stdin and environment cases
CliResult run_shell(const std::string& full_command) {
    FILE* pipe = popen((full_command + " 2>&1").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::move(out)};
}

// ---------------------------------------------------------------------------
// Structural checks mirroring docs/output-schema.md.

void check_coeff_json(const Json& c) {
    REQUIRE(c.is_object());
    const std::string type = c.at("type").get<std::string>();
    if (type == "rational") {
        CHECK(c.at("value").is_string());
    } else if (type == "cyclotomic") {
        CHECK(c.at("conductor").is_number_unsigned());
        for (const Json& t : c.at("terms")) {
            CHECK(t.at("power").is_number_unsigned());
            CHECK(t.at("value").is_string());
        }
    } else if (type == "radical") {
        CHECK(c.at("degree").is_number_unsigned());
        CHECK(c.at("radicand").is_string());
        for (const Json& t : c.at("terms")) {
            CHECK(t.at("power").is_number_unsigned());
            CHECK(t.at("value").is_string());
        }
    } else if (type == "complex") {
        CHECK(c.at("re").is_string());
        CHECK(c.at("im").is_string());
        CHECK(c.at("precision").is_number_unsigned());
    } else {
        FAIL("unknown coefficient type: ", type);
    }
}

void check_series_json(const Json& s) {
    REQUIRE(s.is_object());
    REQUIRE(s.at("variables").is_array());
    CHECK(s.at("order").is_number_unsigned());
    REQUIRE(s.at("components").is_array());
    const std::size_t nvars = s.at("variables").size();
    CHECK(nvars >= 1);
    for (const Json& comp : s.at("components")) {
        for (const Json& t : comp.at("terms")) {
            REQUIRE(t.at("index").is_array());
            CHECK(t.at("index").size() == nvars);
            for (const Json& e : t.at("index")) CHECK(e.is_number_unsigned());
            check_coeff_json(t.at("value"));
        }
    }
}

void check_witnesses_json(const Json& w) {
    REQUIRE(w.is_array());
    for (const Json& r : w) {
        CHECK(r.at("component").is_number_unsigned());
        REQUIRE(r.at("exponents").is_array());
        for (const Json& e : r.at("exponents")) CHECK(e.is_number_unsigned());
    }
}

void check_certificate_json(const Json& c) {
    REQUIRE(c.is_object());
    CHECK(c.at("degree").is_number_unsigned());
    CHECK(c.at("alpha").is_string());
    CHECK(c.at("beta").is_string());
    CHECK(c.at("branch").is_number());
    REQUIRE(c.at("forced_prefix").is_array());
    for (const Json& f : c.at("forced_prefix")) {
        CHECK(f.at("component").is_number_unsigned());
        CHECK(f.at("index").is_array());
        CHECK(f.at("value").is_string());
    }
}

void check_matrix_json(const Json& m) {
    REQUIRE(m.is_object());
    const unsigned dim = m.at("dim").get<unsigned>();
    REQUIRE(m.at("entries").is_array());
    REQUIRE(m.at("entries").size() == dim);
    for (const Json& row : m.at("entries")) {
        REQUIRE(row.size() == dim);
        for (const Json& e : row) check_coeff_json(e);
    }
}

Json envelope(const CliResult& r, const std::string& command,
              const std::string& status) {
    INFO("output: ", r.out);
    Json j = Json::parse(r.out, nullptr, false);
    REQUIRE(!j.is_discarded());
    CHECK(j.at("schema") == "germflow-output/1");
    CHECK(j.at("command") == command);
    CHECK(j.at("status") == status);
    CHECK(j.at("order").is_number_unsigned());
    CHECK(j.at("mode").is_string());
    return j;
}

}  // namespace

// ===========================================================================

TEST_CASE("expressions round trip through render and parse") {
    ExprGen gen;
    for (int i = 0; i < 500; ++i) {
        const GermExpression e = gen.toplevel();
        const std::string text = render_expression(e);
        INFO("rendered: ", text);
        const GermExpression back = parse_germ(text);
        CHECK(back == e);
        // canonical text is a fixed point of another render pass
        CHECK(render_expression(back) == text);
    }
}

TEST_CASE("hand-picked round trips and canonical folds") {
    // '/' between two rational literals is a single literal
    GermExpression e = parse_germ("3/4*z");
    REQUIRE(e.kind == ExprKind::mul);
    CHECK(e.children[0].kind == ExprKind::rational);
    CHECK(e.children[0].value == q(3, 4));

    // leading '-' joins a numeric literal, multiplies anything else
    e = parse_germ("-3/4*z + z^2");
    CHECK(e.children[0].children[0].value == q(-3, 4));
    e = parse_germ("-z + z^2");
    REQUIRE(e.children[0].kind == ExprKind::mul);
    CHECK(e.children[0].children[0].value == q(-1));

    // i is shorthand for zeta(4)
    e = parse_germ("i*z");
    CHECK(e.children[0].kind == ExprKind::zeta);
    CHECK(e.children[0].arg == 4);

    // exp(i*pi*p/q) angles normalize modulo 2*pi and to lowest terms
    CHECK(parse_germ("exp(i*pi*10/4)") == parse_germ("exp(i*pi/2)"));
    CHECK(parse_germ("exp(i*pi*4/2)") == parse_germ("exp(i*pi*0)"));

    for (const char* text : {
             "z/2 + z^2",
             "exp(i*pi/3)*z + z^7",
             "zeta(8)*z - 3/4*z^2 + root(2, 1/2)*z^3",
             "(x1/2 + x2^2, x2/3 + x1*x2)",
             "-1*z + (1/2 + zeta(3))*z^2",
             "z/(1 + z)",
         }) {
        const GermExpression first = parse_germ(text);
        CHECK(parse_germ(render_expression(first)) == first);
    }
}

TEST_CASE("lowering picks the right chart") {
    // scalar over z: the 1-variable chart
    LoweredComponents L = lower_components(parse_germ("z/2 + z^2"), 8);
    REQUIRE(L.components.size() == 1);
    CHECK(L.variables == std::vector<std::string>{"z"});
    CHECK(!L.conjugate_pair);
    CHECK(L.components[0].coeff(MultiIndex({1})) == Coeff(q(1, 2)));

    // the documented model germ: multiplier exp(i*pi/3) = zeta(6)
    L = lower_components(parse_germ("exp(i*pi/3)*z + z^7"), 8);
    CHECK(L.components[0].coeff(MultiIndex({1})) == Coeff(root_of_unity(6, 1)));
    CHECK(L.components[0].coeff(MultiIndex({7})) == Coeff(1));

    // zbar enters the two-component conjugate-pair chart
    L = lower_components(parse_germ("zeta(4)*z + z^2*zbar"), 6);
    REQUIRE(L.components.size() == 2);
    CHECK(L.conjugate_pair);
    CHECK((L.variables == std::vector<std::string>{"z", "zbar"}));
    CHECK(L.components[1] == conjugate_involution(L.components[0]));

    // tuples use explicit slots, in any arrangement (here a swap)
    L = lower_components(parse_germ("(x2, x1)"), 4);
    REQUIRE(L.components.size() == 2);
    CHECK(!L.conjugate_pair);
    CHECK(L.components[0].coeff(MultiIndex({0, 1})) == Coeff(1));
    CHECK(L.components[1].coeff(MultiIndex({1, 0})) == Coeff(1));

    // division by a series with a nonzero constant term expands
    GermMap g = lower_germ(parse_germ("z/(1 + z)"), 4);
    GermMap geo = lower_germ(parse_germ("z - z^2 + z^3 - z^4"), 4);
    CHECK(g == geo);
}

TEST_CASE("lowering rejections carry byte offsets") {
    auto offset_of = [](const std::string& text, unsigned order) {
        try {
            lower_components(parse_germ(text), order);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };

    CHECK(offset_of("z + 1", 4).find("constant term") != std::string::npos);
    CHECK(offset_of("z + 1", 4).find("(at byte") != std::string::npos);
    CHECK(offset_of("q + z^2", 4).find("unknown identifier") !=
          std::string::npos);
    CHECK(offset_of("q + z^2", 4).find("(at byte 0)") != std::string::npos);
    CHECK(offset_of("z + @", 4).find("(at byte 4)") != std::string::npos);
    // mixing charts in one expression
    CHECK(offset_of("z + x1^2", 6) != "no error");
    CHECK(offset_of("(z, x1)", 6) != "no error");
    // division by a series vanishing at the origin
    CHECK(offset_of("z/(z + z^2)", 4) != "no error");

    // constants and matrices have their own shapes
    CHECK_THROWS_AS((void)lower_constants(parse_germ("z")), ParseError);
    CHECK(lower_constants(parse_germ("(1/2, zeta(3), -2)")).size() == 3);
    CHECK_THROWS_AS((void)lower_matrix(parse_germ("((1, 2), (3))")),
                    ParseError);
    CHECK_THROWS_AS((void)lower_matrix(parse_germ("((1, z), (0, 1))")),
                    ParseError);
    CHECK(lower_matrix(parse_germ("((1, 1/2), (0, 1))")).dim() == 2);
}

TEST_CASE("rendered germs re-parse to equal values") {
    for (const char* text : {
             "z/2 + z^2",
             "zeta(8)*z - 3/4*z^2 + root(2, 1/2)*z^3",
             "(-1/2 + zeta(12))*z + 7*z^4",
             "(x1/2 + x2^2, x2/3 + x1*x2)",
         }) {
        LoweredComponents L = lower_components(parse_germ(text), 6);
        GermMap g(std::vector<FormalSeries>(L.components));
        GermMap back = lower_germ(parse_germ(render_germ(g, L.variables)), 6);
        CHECK(back == g);
    }

    // conjugate pairs re-enter their chart through the scalar component
    LoweredComponents L =
        lower_components(parse_germ("zeta(4)*z + z^2*zbar"), 6);
    GermMap g(std::vector<FormalSeries>(L.components));
    GermMap back =
        lower_germ(parse_germ(render_series(g.component(0), L.variables)), 6);
    CHECK(back == g);

    // certificate values render as constant expressions
    RootResult r =
        iterative_root(lower_germ(parse_germ("zeta(2)*z + z^3"), 4), 2, 4, 0);
    const auto& cert = std::get<ObstructionCertificate>(r);
    std::vector<Coeff> beta = lower_constants(parse_germ(render_coeff(cert.beta)));
    CHECK(beta[0] == cert.beta);
}

// ===========================================================================

TEST_CASE("cli: the documented invocations keep their contract") {
    // an obstructed square root: certificate, exit 2, never 0
    CliResult r = run_cli("root --k 2 --order 8 \"exp(i*pi/2)*z + z^5\"");
    CHECK(r.code == 2);
    CHECK(r.out.find("obstruction at degree 5") != std::string::npos);

    Json j = envelope(
        run_cli("root --k 2 --order 8 --output json \"exp(i*pi/2)*z + z^5\""),
        "root", "certificate");
    check_certificate_json(j.at("certificate"));
    CHECK(j.at("certificate").at("degree") == 5);

    // a hyperbolic flow evaluated at t = 1/2
    r = run_cli("flow --order 10 --eval-t 1/2 \"z/2 + z^2\"");
    CHECK(r.code == 0);
    CHECK(r.out.find("hyperbolic flow") != std::string::npos);
    CHECK(r.out.find("root(2, 1/2)") != std::string::npos);

    // the resonance lambda = lambda^7 for lambda = zeta(6)
    r = run_cli("resonance --max-degree 7 \"zeta(6)\"");
    CHECK(r.code == 0);
    CHECK(r.out.find("lambda_1 = lambda_1^7") != std::string::npos);
}

TEST_CASE("cli: certificates exit 2 on the whole model family") {
    for (unsigned m = 1; m <= 4; ++m) {
        for (long branch = 0; branch <= 1; ++branch) {
            const std::string germ = "exp(i*pi/" + std::to_string(m) +
                                     ")*z + z^" + std::to_string(2 * m + 1);
            const std::string args =
                "root --k 2 --branch " + std::to_string(branch) + " --order " +
                std::to_string(2 * m + 2) + " --output json \"" + germ + "\"";
            CliResult r = run_cli(args);
            INFO("germ: ", germ, " branch ", branch);
            CHECK(r.code == 2);
            Json j = envelope(r, "root", "certificate");
            CHECK(j.at("certificate").at("degree") == 2 * m + 1);
            CHECK(j.at("certificate").at("alpha") == "0");
            CHECK(j.at("certificate").at("beta") != "0");
        }
    }
}

TEST_CASE("cli: json output is schema-shaped for every command") {
    Json j = envelope(run_cli("exp --order 5 --output json \"z^2\""), "exp",
                      "ok");
    check_series_json(j.at("series"));

    j = envelope(run_cli("log --order 5 --output json \"z + z^2\""), "log",
                 "ok");
    check_series_json(j.at("series"));

    j = envelope(
        run_cli("flow --order 6 --eval-t 1/2 --output json \"z/2 + z^2\""),
        "flow", "ok");
    REQUIRE(j.at("flow").is_object());
    CHECK(j.at("flow").at("type") == "hyperbolic");
    check_series_json(j.at("flow").at("conjugacy"));
    for (const Json& c : j.at("flow").at("multipliers")) check_coeff_json(c);
    check_series_json(j.at("series"));

    j = envelope(run_cli("flow --order 5 --output json \"z + z^3\""), "flow",
                 "ok");
    CHECK(j.at("flow").at("type") == "parabolic");
    check_series_json(j.at("flow").at("generator"));

    j = envelope(run_cli("eval --order 5 --eval-t 2 --output json \"z/2 + z^2\""),
                 "eval", "ok");
    check_series_json(j.at("series"));

    j = envelope(run_cli("root --k 2 --order 5 --output json \"z/4 + z^2\""),
                 "root", "ok");
    check_series_json(j.at("series"));

    j = envelope(run_cli("linearize --order 5 --output json \"z/2 + z^2\""),
                 "linearize", "ok");
    check_series_json(j.at("series"));
    for (const Json& c : j.at("multipliers")) check_coeff_json(c);

    j = envelope(run_cli("resonance --max-degree 7 --output json \"zeta(6)\""),
                 "resonance", "ok");
    check_witnesses_json(j.at("witnesses"));
    CHECK(j.at("witnesses").size() == 1);

    j = envelope(run_cli("resonance --mode float --max-degree 4 --output json "
                         "\"(1/2, 1/3)\""),
                 "resonance", "ok");
    CHECK(j.at("precision") == 256);
    check_witnesses_json(j.at("witnesses"));
    CHECK(j.at("witnesses").empty());

    j = envelope(run_cli("matlog --output json \"((1, 1), (0, 1))\""),
                 "matlog", "ok");
    check_matrix_json(j.at("matrix"));
    CHECK(j.at("norm").is_string());

    j = envelope(
        run_cli("matpow --eval-t 1/2 --output json \"((1, 1), (0, 1))\""),
        "matpow", "ok");
    check_matrix_json(j.at("matrix"));
    CHECK(j.at("matrix").at("entries")[0][1].at("value") == "1/2");

    // errors keep the envelope and carry a message
    CliResult r = run_cli("flow --output json \"z + 1\"");
    CHECK(r.code == 1);
    j = envelope(r, "flow", "error");
    CHECK(j.at("error").is_string());

    // a resonant linearization attaches its witnesses to the error
    r = run_cli(
        "linearize --order 5 --output json \"(x1/2 + x2^2, x1*x2 + x2/4)\"");
    CHECK(r.code == 1);
    j = envelope(r, "linearize", "error");
    check_witnesses_json(j.at("witnesses"));
}

TEST_CASE("cli: usage, stdin and environment") {
    // exact results agree between the root and eval routes
    CliResult a = run_cli("root --k 2 --order 4 \"z/2 + z^2\"");
    CliResult b = run_cli("eval --eval-t 1/2 --order 4 \"z/2 + z^2\"");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("").code == 1);
    CHECK(run_cli("flow --no-such-flag \"z/2\"").code == 1);
    CHECK(run_cli("eval \"z/2 + z^2\"").code == 1);           // missing t
    CHECK(run_cli("flow --order 1 \"z/2 + z^2\"").code == 1); // order >= 2
    CHECK(run_cli("flow \"z + @\"").code == 1);
    CHECK(run_cli("exp --mode float --precision 32 \"z^2\"").code == 1);
    CHECK(run_cli("resonance --mode float --tolerance -1 \"1/2\"").code == 1);

    CliResult r = run_shell("echo 'z/2 + z^2' | " GERMFLOW_BIN
                            " linearize --order 3 -");
    CHECK(r.code == 0);
    CHECK(r.out.find("multipliers: 1/2") != std::string::npos);

    r = run_shell("GERMFLOW_PRECISION=96 " GERMFLOW_BIN
                  " exp --mode float --order 3 --output json \"z^2\"");
    CHECK(r.code == 0);
    Json j = Json::parse(r.out);
    CHECK(j.at("precision") == 96);

    r = run_shell("GERMFLOW_PRECISION=banana " GERMFLOW_BIN
                  " exp --mode float --order 3 \"z^2\"");
    CHECK(r.code == 1);
}
