// rdopt: batch front end for the reverse-derivative optimization library.
//
// Subcommands: laws, optimize, flowcheck, statemap, experiment table1.
// Every run echoes its resolved configuration: CSV output carries a leading
// "# ..." comment line, JSON output a "config" key. Output is assembled in
// memory and written once, to stdout or to the --out path and nowhere else.
//
// Exit codes: 0 success, 1 check failure (law/flow violations, infeasible
// state-map systems), 2 usage error, 3 numeric divergence.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <rdopt/experiment.hpp>
#include <rdopt/flow.hpp>
#include <rdopt/laws.hpp>
#include <rdopt/optim.hpp>
#include <rdopt/statemap.hpp>

namespace {

using nlohmann::ordered_json;
using namespace rdopt;

std::uint64_t seed_from_env() {
    const char* e = std::getenv("RDOPT_SEED");
    if (!e || !*e) return 0;
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(e, &end, 10);
    if (errno != 0 || end == e || *end != '\0')
        throw rdopt::domain_error(std::string("RDOPT_SEED must be an unsigned integer, got '") +
                                  e + "'");
    return static_cast<std::uint64_t>(v);
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw rdopt::domain_error("cannot open output file '" + out_path + "'");
    out << text;
    if (!out) throw rdopt::domain_error("failed writing output file '" + out_path + "'");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open input file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Accepts both decimal text and exact fraction text in the float domain.
double parse_scalar_f64(const std::string& s) {
    if (s.find('/') != std::string::npos) return ring_traits<Rat>::to_double(parse_rat(s));
    return parse_f64(s);
}

// ---------------------------------------------------------------------------
// laws

struct LawsArgs {
    std::string instance;
    std::string law = "all";
    std::uint64_t cases = 200;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
};

template <class Inst>
int run_laws_on(const Inst& inst, const std::vector<Law>& laws, const LawsArgs& a) {
    ordered_json j;
    j["config"] = {{"command", "laws"},
                   {"instance", a.instance},
                   {"law", a.law},
                   {"cases", a.cases},
                   {"seed", a.seed}};
    ordered_json reports = ordered_json::array();
    bool pass = true;
    for (Law law : laws) {
        LawReport rep = check_law(law, inst, a.cases, a.seed);
        pass = pass && rep.pass();
        reports.push_back(law_report_to_json(rep));
    }
    j["reports"] = std::move(reports);
    j["pass"] = pass;
    emit(a.out, j.dump(2) + "\n");
    return pass ? 0 : 1;
}

int run_laws(LawsArgs& a) {
    if (!a.seed_set) a.seed = seed_from_env();
    std::vector<Law> laws;
    if (a.law == "all") {
        laws = all_laws();
    } else {
        auto l = law_from_string(a.law);
        if (!l) {
            std::cerr << "rdopt: unknown law id '" << a.law
                      << "' (use RD.1..RD.7, CDC.1..CDC.7, LA, or all)\n";
            return 2;
        }
        laws = {*l};
    }
    if (a.instance == "poly-int") return run_laws_on(PolyInstance<Int>{}, laws, a);
    if (a.instance == "poly-rat") return run_laws_on(PolyInstance<Rat>{}, laws, a);
    return run_laws_on(SmoothInstance{}, laws, a);
}

// ---------------------------------------------------------------------------
// optimize

struct OptimizeArgs {
    std::string domain;
    std::string objective;
    std::string method;
    std::string start;
    std::string alpha = "1";
    bool alpha_set = false;
    int steps = 10;
    int vars = -1;
    std::string out;
};

std::string optimize_header(const OptimizeArgs& a) {
    std::ostringstream h;
    h << "# optimize domain=" << a.domain << " method=" << a.method << " objective=\""
      << a.objective << "\" start=" << a.start << " alpha=" << a.alpha << " steps=" << a.steps
      << "\n";
    return h.str();
}

// Pads a bare position up to the optimizer's stacked state: momentum adds a
// zero velocity block, adagrad a block of ones for the accumulator.
template <class S>
std::vector<S> pad_start(std::vector<S> x0, int n, int dim, Method m) {
    int width = n * dim;
    if (static_cast<int>(x0.size()) == width) return x0;
    if (static_cast<int>(x0.size()) == n && dim == 2) {
        S fill = (m == Method::Adagrad) ? S(1) : S(0);
        x0.resize(static_cast<std::size_t>(width), fill);
        return x0;
    }
    throw arity_error("start must list " + std::to_string(n) + " or " + std::to_string(width) +
                      " values for this method");
}

int run_integer_gd(const OptimizeArgs& a) {
    if (a.domain != "poly-int") {
        std::cerr << "rdopt: integer-gd runs on --domain poly-int only\n";
        return 2;
    }
    if (a.alpha_set) {
        std::cerr << "rdopt: integer-gd takes unit steps; --alpha does not apply\n";
        return 2;
    }
    MultiPoly<Int> p = parse_poly<Int>(a.objective, a.vars);
    PolyMap<Int> l(p.num_vars(), {p});
    std::vector<Int> x;
    for (const auto& cell : split_commas(a.start)) x.push_back(parse_int(cell));
    if (static_cast<int>(x.size()) != l.domain())
        throw arity_error("start must list " + std::to_string(l.domain()) + " values");

    Trajectory<Int> tr;
    tr.step_size = Int(1);
    for (int t = 0;; ++t) {
        tr.states.push_back(x);
        tr.losses.push_back(l.evaluate(std::span<const Int>(x))[0]);
        if (t == a.steps) break;
        x = integer_gd_step(l, std::span<const Int>(x));
    }
    emit(a.out, optimize_header(a) + trajectory_csv(tr));
    return 0;
}

template <Ring R>
int run_optimize_ring(const OptimizeArgs& a, Method method) {
    MultiPoly<R> p = parse_poly<R>(a.objective, a.vars);
    PolyMap<R> map(p.num_vars(), {p});
    Objective<PolyMap<R>> l{map, std::nullopt};
    GenOptimizer<PolyMap<R>> opt = make_optimizer(method, l);

    R alpha = ring_traits<R>::parse(a.alpha);
    std::vector<R> x0;
    for (const auto& cell : split_commas(a.start)) x0.push_back(ring_traits<R>::parse(cell));
    x0 = pad_start(std::move(x0), opt.state_arity, opt.dimension, method);

    Trajectory<R> tr = iterate(opt, l, std::move(x0), alpha, a.steps);
    emit(a.out, optimize_header(a) + trajectory_csv(tr));
    return tr.status == TrajStatus::Diverged ? 3 : 0;
}

int run_optimize_smooth(const OptimizeArgs& a, Method method) {
    MultiPoly<Rat> p = parse_poly<Rat>(a.objective, a.vars);
    ExprMap map = expr_from_polymap(PolyMap<Rat>(p.num_vars(), {p}));
    Objective<ExprMap> l{map, std::nullopt};
    GenOptimizer<ExprMap> opt = make_optimizer(method, l);

    double alpha = parse_scalar_f64(a.alpha);
    std::vector<double> x0;
    for (const auto& cell : split_commas(a.start)) x0.push_back(parse_scalar_f64(cell));
    x0 = pad_start(std::move(x0), opt.state_arity, opt.dimension, method);

    Trajectory<double> tr = iterate(opt, l, std::move(x0), alpha, a.steps);
    emit(a.out, optimize_header(a) + trajectory_csv(tr));
    return tr.status == TrajStatus::Diverged ? 3 : 0;
}

int run_optimize(const OptimizeArgs& a) {
    if (a.method == "integer-gd") return run_integer_gd(a);
    Method method = *method_from_string(a.method);
    if (method == Method::Adagrad && a.domain != "float") {
        std::cerr << "rdopt: adagrad requires --domain float (square root is not a ring "
                     "operation)\n";
        return 2;
    }
    if (a.domain == "poly-int") return run_optimize_ring<Int>(a, method);
    if (a.domain == "poly-rat") return run_optimize_ring<Rat>(a, method);
    return run_optimize_smooth(a, method);
}

// ---------------------------------------------------------------------------
// flowcheck

struct FlowcheckArgs {
    std::vector<std::string> files;
    int descending = 1;
    double delta = 0.0;
    double tol = 1e-9;
    std::string out;
};

template <class S>
ordered_json convergence_to_json(const ConvergenceReport<S>& r) {
    ordered_json j;
    j["check"] = "convergence";
    j["converged"] = r.converged;
    j["index"] = r.index;
    if (r.t) j["t"] = ring_str(*r.t);
    ordered_json losses = ordered_json::array();
    for (const auto& v : r.losses) losses.push_back(ring_str(v));
    j["losses"] = std::move(losses);
    return j;
}

template <class M>
bool check_one_flow(const Flow<M>& f, const FlowcheckArgs& a, ordered_json& entry) {
    using S = typename M::Scalar;
    ordered_json checks = ordered_json::array();
    bool pass = true;

    CheckReport<S> fc = verify_flow(f, a.tol);
    pass = pass && fc.pass;
    checks.push_back(check_report_to_json(fc));

    CheckReport<S> desc = check_descending(f, a.descending, a.tol);
    pass = pass && desc.pass;
    checks.push_back(check_report_to_json(desc));

    try {
        CheckReport<S> ip = inner_product_identity(f, a.tol);
        pass = pass && ip.pass;
        checks.push_back(check_report_to_json(ip));
    } catch (const rdopt::domain_error& e) {
        ordered_json skipped;
        skipped["check"] = "inner-product";
        skipped["skipped"] = true;
        skipped["note"] = e.what();
        checks.push_back(std::move(skipped));
    }

    if (a.delta > 0) checks.push_back(convergence_to_json(check_convergence(f, S(a.delta))));

    entry["checks"] = std::move(checks);
    entry["pass"] = pass;
    return pass;
}

int run_flowcheck(const FlowcheckArgs& a) {
    ordered_json j;
    j["config"] = {{"command", "flowcheck"},
                   {"flow", a.files},
                   {"descending", a.descending},
                   {"delta", a.delta},
                   {"tol", a.tol}};
    ordered_json files = ordered_json::array();
    bool pass = true;
    for (const auto& path : a.files) {
        nlohmann::json fj;
        try {
            fj = nlohmann::json::parse(slurp(path));
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("bad flow JSON in '" + path + "': " + e.what());
        }
        std::string domain = fj.value("domain", "");
        ordered_json entry;
        entry["file"] = path;
        entry["domain"] = domain;
        bool ok;
        if (domain == "poly-int")
            ok = check_one_flow(flow_from_json<PolyMap<Int>>(fj), a, entry);
        else if (domain == "poly-rat")
            ok = check_one_flow(flow_from_json<PolyMap<Rat>>(fj), a, entry);
        else if (domain == "smooth")
            ok = check_one_flow(flow_from_json<ExprMap>(fj), a, entry);
        else
            throw parse_error("flow file '" + path + "' has unknown domain '" + domain + "'");
        pass = pass && ok;
        files.push_back(std::move(entry));
    }
    j["files"] = std::move(files);
    j["pass"] = pass;
    emit(a.out, j.dump(2) + "\n");
    return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// statemap

struct StatemapArgs {
    std::string a = "1";
    std::string b = "0";
    std::string c = "0";
    int m = 6;
    std::string x0;
    std::string out;
    std::string flow_out;
};

int run_statemap(const StatemapArgs& args) {
    Int a = parse_int(args.a), b = parse_int(args.b), c = parse_int(args.c);
    Int x0 = parse_int(args.x0);

    DioSystem sys = build_system(a, b, c, args.m, x0);
    std::optional<StateMapSolution> sol = solve(sys);
    if (!sol) {
        std::cerr << "rdopt: infeasible: no integer polynomial state map satisfies the " << sys.rows()
                  << "-equation system for a=" << a << " b=" << b << " c=" << c << " m=" << args.m
                  << " x0=" << x0 << "\n";
        return 1;
    }

    MultiPoly<Int> s = solution_poly(std::span<const Int>(sol->particular));
    std::string s_text = poly_str(s);
    for (std::size_t pos = 0; (pos = s_text.find("x1", pos)) != std::string::npos;)
        s_text.replace(pos, 2, "t");

    std::ostringstream text;
    text << "# statemap a=" << a << " b=" << b << " c=" << c << " m=" << args.m << " x0=" << x0
         << "\n";
    text << "# s(t) = " << s_text << "\n";
    text << state_csv(state_trajectory(s, a, b, c, 1, args.m + 1));
    emit(args.out, text.str());

    if (!args.flow_out.empty()) {
        Flow<PolyMap<Int>> f = statemap_flow(a, b, c, s, args.m);
        emit(args.flow_out, flow_to_json(f).dump(2) + "\n");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// experiment table1

struct Table1Args {
    std::uint64_t seed = 0;
    bool seed_set = false;
    int steps = 0; // 0 = the full N in {5, 10, 50, 100} sweep
    int experiments = 100;
    int polys = 10;
    int bound = 10;
    long magnitude = 17;
    int threads = 0;
    std::string out;
};

int run_experiment_table1(Table1Args& a) {
    if (!a.seed_set) a.seed = seed_from_env();
    std::vector<int> sweep = a.steps > 0 ? std::vector<int>{a.steps}
                                         : std::vector<int>{5, 10, 50, 100};
    ordered_json j;
    j["config"] = {{"command", "experiment table1"},
                   {"seed", a.seed},
                   {"steps", sweep},
                   {"experiments", a.experiments},
                   {"polys_per_experiment", a.polys},
                   {"bound", a.bound},
                   {"magnitude", a.magnitude},
                   {"threads", a.threads}};
    ordered_json rows = ordered_json::array();
    for (int n : sweep) {
        ExperimentConfig cfg;
        cfg.steps = n;
        cfg.experiments = a.experiments;
        cfg.polys_per_experiment = a.polys;
        cfg.bound = a.bound;
        cfg.magnitude = a.magnitude;
        cfg.seed = a.seed;
        rows.push_back(table1_report_to_json(run_table1(cfg, a.threads)));
    }
    j["rows"] = std::move(rows);
    emit(a.out, j.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reverse-derivative optimization toolkit"};
    app.require_subcommand(1);

    LawsArgs la;
    CLI::App* laws = app.add_subcommand("laws", "check categorical axioms on an instance");
    laws->add_option("--instance", la.instance, "poly-int | poly-rat | smooth")
        ->required()
        ->check(CLI::IsMember({"poly-int", "poly-rat", "smooth"}));
    laws->add_option("--law", la.law, "law id (RD.1..RD.7, CDC.1..CDC.7, LA) or all");
    laws->add_option("--cases", la.cases, "random cases per law")->check(CLI::PositiveNumber);
    laws->add_option("--seed", la.seed, "base seed (default: RDOPT_SEED or 0)");
    laws->add_option("--out", la.out, "write the JSON report here instead of stdout");

    OptimizeArgs oa;
    CLI::App* optimize = app.add_subcommand("optimize", "iterate an optimizer on an objective");
    optimize->add_option("--domain", oa.domain, "poly-int | poly-rat | float")
        ->required()
        ->check(CLI::IsMember({"poly-int", "poly-rat", "float"}));
    optimize->add_option("--objective", oa.objective, "polynomial text, e.g. 'x1^2 + 2*x2^2'")
        ->required();
    optimize->add_option("--method", oa.method, "gd | momentum | adagrad | newton | integer-gd")
        ->required()
        ->check(CLI::IsMember({"gd", "momentum", "adagrad", "newton", "integer-gd"}));
    optimize->add_option("--start", oa.start, "comma-separated initial state")->required();
    optimize->add_option("--alpha", oa.alpha, "step size (fraction text in ring domains)");
    optimize->add_option("--steps", oa.steps, "number of update steps")
        ->check(CLI::NonNegativeNumber);
    optimize->add_option("--vars", oa.vars, "force the objective arity (default: inferred)")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--out", oa.out, "write the trajectory CSV here instead of stdout");

    FlowcheckArgs fa;
    CLI::App* flowcheck = app.add_subcommand("flowcheck", "verify flow invariants on flow files");
    flowcheck->add_option("--flow", fa.files, "flow JSON file(s)")->required()->expected(-1);
    flowcheck->add_option("--descending", fa.descending, "descent order n to verify")
        ->check(CLI::PositiveNumber);
    flowcheck->add_option("--delta", fa.delta, "convergence threshold (0 skips the scan)")
        ->check(CLI::NonNegativeNumber);
    flowcheck->add_option("--tol", fa.tol, "float comparison tolerance")
        ->check(CLI::PositiveNumber);
    flowcheck->add_option("--out", fa.out, "write the JSON report here instead of stdout");

    StatemapArgs sa;
    CLI::App* statemap =
        app.add_subcommand("statemap", "solve for an integer polynomial state map");
    statemap->add_option("--a", sa.a, "quadratic coefficient of a*x^2 + b*x + c");
    statemap->add_option("--b", sa.b, "linear coefficient");
    statemap->add_option("--c", sa.c, "constant coefficient");
    statemap->add_option("--m", sa.m, "number of discrete steps to interpolate")
        ->check(CLI::PositiveNumber);
    statemap->add_option("--x0", sa.x0, "required initial state s(1)")->required();
    statemap->add_option("--out", sa.out, "write the trajectory CSV here instead of stdout");
    statemap->add_option("--flow-out", sa.flow_out, "also write the induced flow JSON here");

    Table1Args ta;
    CLI::App* experiment = app.add_subcommand("experiment", "randomized comparison experiments");
    experiment->require_subcommand(1);
    CLI::App* table1 =
        experiment->add_subcommand("table1", "integer descent vs random search win rates");
    table1->add_option("--seed", ta.seed, "base seed (default: RDOPT_SEED or 0)");
    table1->add_option("--steps", ta.steps, "single N (default: sweep 5, 10, 50, 100)")
        ->check(CLI::PositiveNumber);
    table1->add_option("--experiments", ta.experiments, "experiments per row")
        ->check(CLI::PositiveNumber);
    table1->add_option("--polys", ta.polys, "polynomials per experiment")
        ->check(CLI::PositiveNumber);
    table1->add_option("--bound", ta.bound, "generator bound for arity, terms, coefficients")
        ->check(CLI::PositiveNumber);
    table1->add_option("--magnitude", ta.magnitude, "log-uniform starting point bound")
        ->check(CLI::PositiveNumber);
    table1->add_option("--threads", ta.threads, "worker threads (0 = hardware)")
        ->check(CLI::NonNegativeNumber);
    table1->add_option("--out", ta.out, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    la.seed_set = laws->count("--seed") > 0;
    oa.alpha_set = optimize->count("--alpha") > 0;
    ta.seed_set = table1->count("--seed") > 0;

    try {
        if (laws->parsed()) return run_laws(la);
        if (optimize->parsed()) return run_optimize(oa);
        if (flowcheck->parsed()) return run_flowcheck(fa);
        if (statemap->parsed()) return run_statemap(sa);
        if (table1->parsed()) return run_experiment_table1(ta);
    } catch (const rdopt::error& e) {
        std::cerr << "rdopt: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
