// germflow — exact flows, linearizations and iterative roots of
// diffeomorphism germs at a fixed point.
//
// Commands
//   exp        time-t Lie-series flow of a vector field germ
//   log        formal infinitesimal generator of a tangent-to-identity germ
//   flow       the one-parameter flow family through a germ
//   eval       that flow family evaluated at a specific time
//   root       an iterative k-th root, or the obstruction certificate
//              proving none exists
//   linearize  Koenigs / Poincare conjugacy onto the linear part
//   resonance  multiplicative relations among a multiplier tuple
//   matlog     principal matrix logarithm near the identity
//   matpow     fractional matrix power J^t
//
// Exit codes: 0 success, 2 when the mathematical answer is an obstruction
// certificate (a valid, expected outcome), 1 for usage, parse and
// precondition errors.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "germflow/flow.hpp"
#include "germflow/parse.hpp"
#include "germflow/render.hpp"

namespace {

using namespace germflow;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCertificate = 2;

// configuration problems, as opposed to engine errors; both exit with 1
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string command;
    std::string input;
    unsigned order = 16;
    std::string mode = "exact";
    unsigned precision = 0;  // 0 = unset: GERMFLOW_PRECISION env, then 256
    std::string tolerance;   // empty = default 2^-(precision/2)
    long branch = 0;
    unsigned k = 2;
    std::string eval_t;      // empty = unset; exp defaults to t = 1
    unsigned max_degree = 7;
    std::string output = "text";
};

bool float_mode(const Options& o) { return o.mode == "float"; }

unsigned resolve_precision(const Options& o) {
    if (o.precision != 0) return o.precision;
    if (const char* env = std::getenv("GERMFLOW_PRECISION")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (*env == '\0' || *end != '\0' || v == 0 || v > (1ul << 24))
            throw UsageError("GERMFLOW_PRECISION must be a bit count");
        return static_cast<unsigned>(v);
    }
    return 256;
}

BigFloat resolve_tolerance(const Options& o, unsigned prec) {
    BigFloat t = bf_make(prec);
    if (o.tolerance.empty()) {
        t = 1;
        for (unsigned i = 0; i < prec / 2; ++i) t /= 2;  // 2^-(prec/2)
        return t;
    }
    if (mpfr_set_str(t.backend().data(), o.tolerance.c_str(), 10,
                     MPFR_RNDN) != 0)
        throw UsageError("tolerance is not a decimal number: " + o.tolerance);
    if (!(t > 0)) throw UsageError("tolerance must be positive");
    return t;
}

void validate(const Options& o, unsigned prec) {
    if (o.order < 2) throw UsageError("order must be at least 2");
    if (float_mode(o) && prec < 64)
        throw UsageError("float mode needs at least 64 bits of precision");
}

std::string read_input(const std::string& arg) {
    if (arg != "-") return arg;
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
}

std::vector<FormalSeries> to_float(std::vector<FormalSeries> comps,
                                   unsigned prec) {
    for (auto& s : comps) {
        FormalSeries t(s.nvars(), s.order());
        for (const auto& [m, c] : s.terms())
            t.set_coeff(m, to_mode(c, Mode::approx, prec));
        s = std::move(t);
    }
    return comps;
}

Coeff parse_time(const std::string& text) {
    try {
        std::vector<Coeff> c = lower_constants(parse_germ(text));
        if (c.size() != 1)
            throw UsageError("--eval-t must be a single constant");
        return c[0];
    } catch (const ParseError& e) {
        throw UsageError(std::string("invalid --eval-t: ") + e.what());
    }
}

// lowered germ/field input together with its display chart
struct LoweredInput {
    std::vector<FormalSeries> components;
    std::vector<std::string> vars;
    bool pair = false;
};

LoweredInput lower_input(const std::string& source, unsigned order, bool flt,
                         unsigned prec) {
    LoweredComponents L = lower_components(parse_germ(source), order);
    LoweredInput in;
    in.components =
        flt ? to_float(std::move(L.components), prec) : std::move(L.components);
    in.vars = std::move(L.variables);
    in.pair = L.conjugate_pair;
    return in;
}

// Conjugate-pair results whose second component is still the involution
// image of the first render as the scalar z/zbar form, which re-enters the
// pair chart on parsing. Anything else displays all components.
bool involution_pair(const GermMap& g) {
    if (g.nvars() != 2 || g.mode() != Mode::exact) return false;
    return g.component(1) == conjugate_involution(g.component(0));
}

std::string germ_text(const GermMap& g, const LoweredInput& in) {
    if (in.pair && involution_pair(g))
        return render_series(g.component(0), in.vars);
    return render_germ(g, in.vars);
}

// accumulates one invocation's output in both formats, prints one of them
struct Emitter {
    const Options& opt;
    Json j;
    std::string text;

    Emitter(const Options& o, unsigned prec) : opt(o) {
        j["schema"] = "germflow-output/1";
        j["command"] = o.command;
        j["status"] = "ok";
        j["order"] = o.order;
        j["mode"] = o.mode;
        if (float_mode(o)) j["precision"] = prec;
    }

    void line(const std::string& s) {
        if (!text.empty()) text += "\n";
        text += s;
    }

    int finish(int code) {
        if (opt.output == "json")
            std::cout << j.dump(2) << "\n";
        else
            std::cout << text << "\n";
        return code;
    }
};

int emit_error(const Options& opt, const std::string& message,
               const std::vector<ResonanceWitness>* witnesses) {
    if (opt.output == "json") {
        Json j;
        j["schema"] = "germflow-output/1";
        j["command"] = opt.command;
        j["status"] = "error";
        j["order"] = opt.order;
        j["mode"] = opt.mode;
        j["error"] = message;
        if (witnesses) j["witnesses"] = witnesses_json(*witnesses);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cerr << "germflow: " << message << "\n";
        if (witnesses) std::cerr << render_witnesses(*witnesses) << "\n";
    }
    return kExitError;
}

int run(const Options& opt) {
    const unsigned prec = resolve_precision(opt);
    validate(opt, prec);
    const bool flt = float_mode(opt);
    Emitter out(opt, prec);
    const std::string source = read_input(opt.input);

    if (opt.command == "exp") {
        LoweredInput in = lower_input(source, opt.order, flt, prec);
        VectorFieldGerm v(std::move(in.components));
        Coeff t = opt.eval_t.empty() ? Coeff(1) : parse_time(opt.eval_t);
        GermMap g = exp_flow(v, t, opt.order);
        out.j["series"] = germ_json(g, in.vars);
        out.line(germ_text(g, in));
        return out.finish(kExitOk);
    }

    if (opt.command == "log") {
        LoweredInput in = lower_input(source, opt.order, flt, prec);
        GermMap u(std::move(in.components));
        VectorFieldGerm v = formal_log(u, opt.order);
        out.j["series"] = series_json(v.components(), opt.order, in.vars);
        out.line(render_field(v, in.vars));
        return out.finish(kExitOk);
    }

    if (opt.command == "flow" || opt.command == "eval") {
        if (opt.command == "eval" && opt.eval_t.empty())
            throw UsageError("eval needs --eval-t");
        LoweredInput in = lower_input(source, opt.order, flt, prec);
        GermMap u(std::move(in.components));
        FlowFamily F = flow_family(u, opt.order);
        if (opt.command == "flow") {
            out.j["flow"] = flow_json(F, in.vars);
            out.line(render_flow(F, in.vars));
        }
        if (!opt.eval_t.empty()) {
            Coeff t = parse_time(opt.eval_t);
            GermMap g = evaluate_flow(F, t, opt.order);
            out.j["series"] = germ_json(g, in.vars);
            if (opt.command == "flow")
                out.line("at t = " + render_coeff(t) + ": " + germ_text(g, in));
            else
                out.line(germ_text(g, in));
        }
        return out.finish(kExitOk);
    }

    if (opt.command == "root") {
        LoweredInput in = lower_input(source, opt.order, flt, prec);
        GermMap u(std::move(in.components));
        RootResult r = iterative_root(u, opt.k, opt.order, opt.branch);
        if (const GermMap* g = std::get_if<GermMap>(&r)) {
            out.j["series"] = germ_json(*g, in.vars);
            out.line(germ_text(*g, in));
            return out.finish(kExitOk);
        }
        const auto& cert = std::get<ObstructionCertificate>(r);
        out.j["status"] = "certificate";
        out.j["certificate"] = certificate_json(cert);
        out.line("no formal iterative root of index " +
                 std::to_string(opt.k) + ":");
        out.line(render_certificate(cert, in.vars));
        return out.finish(kExitCertificate);
    }

    if (opt.command == "linearize") {
        LoweredInput in = lower_input(source, opt.order, flt, prec);
        GermMap u(std::move(in.components));
        LinearizationResult R = u.nvars() == 1 ? koenigs(u, opt.order)
                                               : poincare_linearize(u, opt.order);
        out.j["series"] = germ_json(R.f, in.vars);
        Json mult = Json::array();
        for (const Coeff& c : R.multipliers) mult.push_back(coeff_json(c));
        out.j["multipliers"] = std::move(mult);
        std::string ms;
        for (std::size_t i = 0; i < R.multipliers.size(); ++i) {
            if (i) ms += ", ";
            ms += render_coeff(R.multipliers[i]);
        }
        out.line("multipliers: " + ms);
        out.line("conjugacy: " + germ_text(R.f, in));
        return out.finish(kExitOk);
    }

    if (opt.command == "resonance") {
        std::vector<Coeff> lam = lower_constants(parse_germ(source));
        if (flt)
            for (Coeff& c : lam) c = to_mode(c, Mode::approx, prec);
        BigFloat tol = resolve_tolerance(opt, prec);
        std::vector<ResonanceWitness> w =
            resonance_check(lam, opt.max_degree, flt ? &tol : nullptr);
        out.j["witnesses"] = witnesses_json(w);
        out.line(render_witnesses(w));
        return out.finish(kExitOk);
    }

    if (opt.command == "matlog" || opt.command == "matpow") {
        SquareMatrix J = lower_matrix(parse_germ(source));
        if (flt) J = mat_to_mode(J, Mode::approx, prec);
        SquareMatrix result(J.dim());
        if (opt.command == "matlog") {
            result = matrix_log(J);
        } else {
            if (opt.eval_t.empty()) throw UsageError("matpow needs --eval-t");
            result = matrix_power_t(J, parse_time(opt.eval_t));
        }
        BigFloat nrm =
            frobenius_norm(mat_sub(J, SquareMatrix::identity(J.dim())), prec);
        out.j["matrix"] = matrix_json(result);
        out.j["norm"] = nrm.str(static_cast<unsigned>(prec * 0.30103) + 2);
        out.line(render_matrix(result));
        out.line("norm: " + nrm.str(20));
        return out.finish(kExitOk);
    }

    throw UsageError("unknown command: " + opt.command);
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{
        "exact flows, linearizations and iterative roots of "
        "diffeomorphism germs"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub, const char* input_help) {
        sub->add_option("input", opt.input, input_help)->required();
        sub->add_option("--order", opt.order, "truncation order (default 16)");
        sub->add_option("--mode", opt.mode, "exact or float (default exact)")
            ->check(CLI::IsMember({"exact", "float"}));
        sub->add_option("--precision", opt.precision,
                        "float precision in bits (default 256, or "
                        "GERMFLOW_PRECISION)");
        sub->add_option("--tolerance", opt.tolerance,
                        "float comparison tolerance (default 2^-(precision/2))");
        sub->add_option("--output", opt.output, "text or json (default text)")
            ->check(CLI::IsMember({"text", "json"}));
        return sub;
    };

    CLI::App* c;
    c = common(app.add_subcommand("exp", "time-t flow of a vector field"),
               "vector field germ, or - for stdin");
    c->add_option("--eval-t", opt.eval_t,
                  "flow time, a constant expression (default 1)");

    common(app.add_subcommand(
               "log", "infinitesimal generator of a tangent-to-identity germ"),
           "germ, or - for stdin");

    c = common(app.add_subcommand("flow", "one-parameter flow family"),
               "germ, or - for stdin");
    c->add_option("--eval-t", opt.eval_t,
                  "also evaluate the family at this time");

    c = common(app.add_subcommand("eval", "evaluate the flow at a time"),
               "germ, or - for stdin");
    c->add_option("--eval-t", opt.eval_t,
                  "flow time, a constant expression")
        ->required();

    c = common(app.add_subcommand("root",
                                  "iterative k-th root or its obstruction"),
               "germ, or - for stdin");
    c->add_option("--k", opt.k, "root index, at least 2")->required();
    c->add_option("--branch", opt.branch,
                  "multiplier root selection, base-k digits (default 0)");

    common(app.add_subcommand("linearize",
                              "conjugacy onto the linear part"),
           "germ, or - for stdin");

    c = common(app.add_subcommand("resonance",
                                  "multiplicative multiplier relations"),
               "multiplier or tuple of multipliers, or - for stdin");
    c->add_option("--max-degree", opt.max_degree,
                  "largest total degree searched (default 7)");

    common(app.add_subcommand("matlog", "matrix logarithm near the identity"),
           "square matrix as a tuple of row tuples, or - for stdin");

    c = common(app.add_subcommand("matpow", "fractional matrix power"),
               "square matrix as a tuple of row tuples, or - for stdin");
    c->add_option("--eval-t", opt.eval_t,
                  "exponent, a constant expression")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitError;
    }
    for (const CLI::App* sub : app.get_subcommands())
        opt.command = sub->get_name();

    try {
        return run(opt);
    } catch (const UsageError& e) {
        return emit_error(opt, e.what(), nullptr);
    } catch (const ResonanceError& e) {
        return emit_error(opt, e.what(), &e.witnesses);
    } catch (const Error& e) {
        return emit_error(opt, e.what(), nullptr);
    }
}
