#include "sqrtreg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>

#include "sqrtreg/io.hpp"

namespace sqrtreg {

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    std::string log_level = "warn";
};

class Log {
public:
    Log(const std::string& level, std::ostream& err) : err_(err) {
        static const std::vector<std::string> names{"error", "warn", "info", "debug"};
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == level) level_ = static_cast<int>(i);
    }
    void info(const std::string& msg) const { write(2, "info", msg); }
    void warn(const std::string& msg) const { write(1, "warn", msg); }

private:
    void write(int at, const char* tag, const std::string& msg) const {
        if (level_ >= at) err_ << "[" << tag << "] " << msg << '\n';
    }
    std::ostream& err_;
    int level_ = 1;
};

struct NormFlags {
    std::string norm;
    std::string groups;
    std::string lambda_seq = "linear:1:0.1";
    double weight = 1.0;
    double l1_weight = 1.0;
    double group_weight = 1.0;
    std::string box_lower = "1";
    std::string box_upper = "2";
};

struct ProblemFlags {
    std::string problem;
    std::string x_csv;
    std::string y_csv;
};

// Numerical failure reported as exit code 2 with a JSON document.
struct NumericalFailure {
    std::string kind;
    std::string message;
    json partial;
};

std::vector<double> parse_numbers(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw InvalidArgument(std::string("--") + what + ": not a number: '" + cell + "'");
        }
    }
    if (out.empty()) throw InvalidArgument(std::string("--") + what + " is empty");
    return out;
}

std::size_t parse_index(const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw InvalidArgument("--set: not an index: '" + s + "'");
    return static_cast<std::size_t>(v);
}

// "0,3,5-8" with inclusive 0-based ranges.
IndexSet parse_index_set(const std::string& text) {
    IndexSet out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto dash = cell.find('-', 1);
        if (dash == std::string::npos) {
            out.push_back(parse_index(cell));
        } else {
            const std::size_t a = parse_index(cell.substr(0, dash));
            const std::size_t b = parse_index(cell.substr(dash + 1));
            if (b < a) throw InvalidArgument("--set: empty range '" + cell + "'");
            for (std::size_t i = a; i <= b; ++i) out.push_back(i);
        }
    }
    return out;
}

VectorXd parse_sequence(const std::string& text, std::size_t p) {
    if (text.rfind("linear:", 0) == 0) {
        std::string body = text.substr(7);
        std::replace(body.begin(), body.end(), ':', ',');
        const auto parts = parse_numbers(body, "lambda-seq");
        if (parts.size() != 2) throw InvalidArgument("--lambda-seq: expected linear:<first>:<last>");
        return linear_sequence(parts[0], parts[1], p);
    }
    const auto v = parse_numbers(text, "lambda-seq");
    if (v.size() != p)
        throw DimensionError("--lambda-seq has " + std::to_string(v.size()) + " values, expected " + std::to_string(p));
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

VectorXd parse_bound(const std::string& text, std::size_t p, const char* what) {
    const auto v = parse_numbers(text, what);
    if (v.size() == 1) return VectorXd::Constant(static_cast<Eigen::Index>(p), v[0]);
    if (v.size() != p)
        throw DimensionError(std::string("--") + what + " has " + std::to_string(v.size()) + " values, expected " +
                             std::to_string(p));
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// A single size k splits {0..p-1} into blocks of k; a list gives the block sizes.
std::vector<IndexSet> parse_groups(const std::string& text, std::size_t p) {
    if (text.empty()) throw InvalidArgument("--groups is required for group norms");
    std::vector<std::size_t> sizes;
    for (double v : parse_numbers(text, "groups")) {
        if (!(v >= 1.0) || v != std::floor(v)) throw InvalidArgument("--groups: sizes must be positive integers");
        sizes.push_back(static_cast<std::size_t>(v));
    }
    if (sizes.size() == 1) {
        if (p % sizes[0] != 0)
            throw InvalidArgument("--groups " + text + " does not divide p = " + std::to_string(p));
        sizes.assign(p / sizes[0], sizes[0]);
    }
    return contiguous_groups(sizes);
}

NormSpec build_norm(const NormFlags& f, std::size_t p) {
    if (!f.norm.empty() && f.norm[0] == '@') {
        NormSpec spec = norm_from(read_json_file(f.norm.substr(1)));
        if (spec.dim() != p)
            throw DimensionError("norm file has dimension " + std::to_string(spec.dim()) + ", expected " +
                                 std::to_string(p));
        return spec;
    }
    if (f.norm == "l1") return NormSpec::l1(p, f.weight);
    if (f.norm == "group") return NormSpec::group(p, parse_groups(f.groups, p));
    if (f.norm == "sorted-l1") return NormSpec::sorted_l1(parse_sequence(f.lambda_seq, p));
    if (f.norm == "sparse-group")
        return NormSpec::sparse_group(p, f.l1_weight, f.group_weight, parse_groups(f.groups, p));
    if (f.norm == "wedge") return NormSpec::wedge(p);
    if (f.norm == "box")
        return NormSpec::box(parse_bound(f.box_lower, p, "box-lower"), parse_bound(f.box_upper, p, "box-upper"));
    throw InvalidArgument("unknown norm '" + f.norm +
                          "' (expected l1, group, sorted-l1, sparse-group, wedge, box or @file)");
}

void add_norm_flags(CLI::App* sub, NormFlags& f) {
    sub->add_option("--norm", f.norm, "l1, group, sorted-l1, sparse-group, wedge, box or @file.json")->required();
    sub->add_option("--groups", f.groups, "Group sizes: one size k (blocks of k) or a comma list of sizes");
    sub->add_option("--lambda-seq", f.lambda_seq, "Sorted-l1 weights: linear:<first>:<last> or a comma list")
        ->capture_default_str();
    sub->add_option("--weight", f.weight, "l1 weight")->capture_default_str();
    sub->add_option("--l1-weight", f.l1_weight, "Sparse-group l1 weight")->capture_default_str();
    sub->add_option("--group-weight", f.group_weight, "Sparse-group group weight")->capture_default_str();
    sub->add_option("--box-lower", f.box_lower, "Box cone lower bound (scalar or comma list)")->capture_default_str();
    sub->add_option("--box-upper", f.box_upper, "Box cone upper bound (scalar or comma list)")->capture_default_str();
}

void add_problem_flags(CLI::App* sub, ProblemFlags& f) {
    auto* json_opt = sub->add_option("--problem", f.problem, "Problem JSON file {n, p, X, Y}");
    auto* x_opt = sub->add_option("--x", f.x_csv, "Design as an n x p CSV file");
    auto* y_opt = sub->add_option("--y", f.y_csv, "Response as a single-column CSV file");
    x_opt->needs(y_opt);
    y_opt->needs(x_opt);
    json_opt->excludes(x_opt)->excludes(y_opt);
}

RegressionProblem load_problem(const ProblemFlags& f) {
    if (!f.problem.empty()) return problem_from(read_json_file(f.problem));
    if (!f.x_csv.empty()) return problem_from_csv(f.x_csv, f.y_csv);
    throw InvalidArgument("a problem is required: --problem <file.json> or --x <X.csv> --y <Y.csv>");
}

json problem_source(const ProblemFlags& f) {
    if (!f.problem.empty()) return {{"problem", f.problem}};
    return {{"x", f.x_csv}, {"y", f.y_csv}};
}

json globals_json(const Globals& g) {
    return {{"seed", g.seed}, {"out", g.out}, {"format", g.format}, {"log_level", g.log_level}};
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "nan";
    if (v.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + scalar_text(v[i]);
        return s;
    }
    return v.dump();
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object())
            flatten(*it, key, rows);
        else
            rows.emplace_back(key, scalar_text(*it));
    }
}

std::string render_pairs(const json& result, bool csv) {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(result, "", rows);
    std::ostringstream os;
    if (csv) {
        os << "key,value\n";
        for (const auto& [k, v] : rows) os << k << ',' << v << '\n';
    } else {
        std::size_t w = 0;
        for (const auto& r : rows) w = std::max(w, r.first.size());
        for (const auto& [k, v] : rows) os << k << std::string(w - k.size() + 2, ' ') << v << '\n';
    }
    return os.str();
}

class Runner {
public:
    Runner(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), log_(g.log_level, err) {}

    // Emits a finished document: the canonical JSON goes to --out, stdout gets the --format rendering.
    void emit(const json& doc, const std::string& csv, const std::string& text) const {
        const std::string canonical = doc.dump(2) + "\n";
        if (!g_.out.empty()) write_text_file(g_.out, canonical);
        if (g_.format == "json")
            out_ << canonical;
        else if (g_.format == "csv")
            out_ << csv;
        else
            out_ << text;
    }

    void emit_result(const std::string& command, const json& config, const json& result) const {
        json doc{{"status", "ok"}, {"command", command}, {"config", config}, {"result", result}};
        emit(doc, render_pairs(result, true), render_pairs(result, false));
    }

    const Log& log() const { return log_; }
    const Globals& globals() const { return g_; }

private:
    const Globals& g_;
    std::ostream& out_;
    Log log_;
};

json solver_json(const SolverConfig& c) {
    return {{"lambda", number_json(c.lambda)}, {"max_outer", c.max_outer}, {"max_inner", c.max_inner},
            {"tol_outer", c.tol_outer},         {"tol_inner", c.tol_inner}, {"kkt_tol", c.kkt_tol},
            {"secant_sigma", c.secant_sigma}};
}

struct FitFlags {
    ProblemFlags problem;
    NormFlags norm;
    double lambda = 0.0;
    SolverConfig solver;
};

void run_fit(const Runner& run, const FitFlags& f) {
    const RegressionProblem problem = load_problem(f.problem);
    const NormSpec spec = build_norm(f.norm, problem.p());
    SolverConfig cfg = f.solver;
    cfg.lambda = f.lambda;
    json config{{"globals", globals_json(run.globals())},
                {"input", problem_source(f.problem)},
                {"norm", norm_json(spec)},
                {"solver", solver_json(cfg)}};
    run.log().info("fitting n=" + std::to_string(problem.n()) + " p=" + std::to_string(problem.p()) + " norm " +
                   spec.tag());
    FitResult r;
    try {
        r = fit(problem, spec, cfg);
    } catch (const InterpolationError& e) {
        throw NumericalFailure{e.kind(), e.what(), {{"config", config}, {"last_beta", vector_json(e.last_beta())}}};
    }
    if (!r.converged)
        throw NumericalFailure{"non_convergence",
                               "fit did not converge (KKT residual " + std::to_string(r.kkt_residual) + ")",
                               {{"config", config}, {"result", fit_json(r)}}};
    run.emit_result("fit", config, fit_json(r));
}

struct KktFlags {
    ProblemFlags problem;
    NormFlags norm;
    double lambda = 0.0;
    std::string beta;
    double tol = 1e-6;
};

VectorXd load_beta(const std::string& path) {
    const json j = read_json_file(path);
    if (j.is_array()) return vector_from(j);
    if (j.contains("beta_hat")) return vector_from(j["beta_hat"]);
    if (j.contains("result") && j["result"].contains("beta_hat")) return vector_from(j["result"]["beta_hat"]);
    throw InvalidArgument("'" + path + "' holds neither an array nor a fit result with beta_hat");
}

void run_kkt(const Runner& run, const KktFlags& f) {
    const RegressionProblem problem = load_problem(f.problem);
    const NormSpec spec = build_norm(f.norm, problem.p());
    const VectorXd beta = load_beta(f.beta);
    require_length(beta, problem.p(), "beta (p)");
    json config{{"globals", globals_json(run.globals())},
                {"input", problem_source(f.problem)},
                {"beta", f.beta},
                {"norm", norm_json(spec)},
                {"lambda", number_json(f.lambda)},
                {"kkt_tol", f.tol}};
    double residual = 0.0;
    try {
        residual = check_kkt(problem, spec, beta, f.lambda);
    } catch (const InterpolationError& e) {
        throw NumericalFailure{e.kind(), e.what(), {{"config", config}}};
    }
    run.emit_result("kkt-check", config,
                    {{"kkt_residual", number_json(residual)},
                     {"objective", number_json(sqrt_objective(problem, spec, beta, f.lambda))},
                     {"ok", residual <= f.tol}});
}

struct LambdaFlags {
    NormFlags norm;
    std::size_t n = 0;
    std::size_t p = 0;
    double alpha = 0.05;
    std::string calibration = "boxed";
    std::optional<double> a_tilde;
    std::optional<double> extreme_points;
};

void run_lambda(const Runner& run, const LambdaFlags& f) {
    const NormSpec spec = build_norm(f.norm, f.p);
    std::optional<StructuredLambdaInputs> structured;
    if (f.a_tilde || f.extreme_points) {
        if (!f.a_tilde || !f.extreme_points)
            throw InvalidArgument("--a-tilde and --extreme-points must be given together");
        structured = StructuredLambdaInputs{*f.a_tilde, *f.extreme_points};
    }
    const Calibration cal = f.calibration == "exact" ? Calibration::Exact : Calibration::Boxed;
    const TheoreticalLambda tl = theoretical_lambda(spec, f.n, f.alpha, structured);
    const ProbabilityBoundParams pb = calibrate(spec, f.n, f.alpha, cal);
    json config{{"globals", globals_json(run.globals())},
                {"norm", norm_json(spec)},
                {"n", f.n},
                {"p", f.p},
                {"alpha", f.alpha},
                {"calibration", f.calibration},
                {"a_tilde", f.a_tilde ? json(*f.a_tilde) : json(nullptr)},
                {"extreme_points", f.extreme_points ? json(*f.extreme_points) : json(nullptr)}};
    json result{{"lambda", number_json(tl.lambda)},
                {"eta", tl.eta ? number_json(*tl.eta) : json(nullptr)},
                {"t", number_json(tl.t)},
                {"Delta", number_json(tl.Delta)},
                {"fallback", tl.fallback},
                {"probability",
                 {{"alpha", number_json(pb.alpha)},
                  {"t", number_json(pb.t)},
                  {"Delta", number_json(pb.Delta)},
                  {"D", number_json(pb.D)},
                  {"EV_bound", number_json(pb.EV_bound)},
                  {"B2", number_json(pb.B2)},
                  {"d", number_json(pb.d)},
                  {"bound", number_json(probability_bound(pb, f.n))}}}};
    if (tl.fallback) run.log().warn("structured norm without --a-tilde/--extreme-points: using the l1 level");
    json doc{{"status", "ok"}, {"command", "lambda"}, {"config", config}, {"result", result}};
    std::ostringstream text;
    text << std::setprecision(17) << tl.lambda << '\n';
    run.emit(doc, render_pairs(result, true), text.str());
}

struct OracleFlags {
    ProblemFlags problem;
    NormFlags norm;
    std::string truth;
    std::string set;
    double delta = 0.5;
    std::optional<double> lambda;
    double alpha = 0.05;
    std::string beta = "restricted";
    int restarts = 25;
    long dense_samples = 1'000'000;
    std::size_t dense_max_dim = 12;
    bool no_dense = false;
};

void run_oracle(const Runner& run, const OracleFlags& f) {
    const RegressionProblem problem = load_problem(f.problem);
    const NormSpec spec = build_norm(f.norm, problem.p());
    const GroundTruth truth = truth_from(read_json_file(f.truth));
    require_length(truth.beta0, problem.p(), "beta0 (p)");
    const VectorXd noise = truth.noise.size() > 0 ? truth.noise : residual(problem, truth.beta0);
    require_length(noise, problem.n(), "noise (n)");
    const IndexSet S = normalize_index_set(f.set.empty() ? truth.active_set : parse_index_set(f.set), problem.p());

    VectorXd beta;
    bool deficient = false;
    if (f.beta == "truth")
        beta = truth.beta0;
    else if (f.beta == "restricted")
        beta = restrict_to(truth.beta0, S);
    else
        std::tie(beta, deficient) = project_onto_support(problem.X(), truth.beta0, S);

    const double lambda = f.lambda ? *f.lambda : theoretical_lambda(spec, problem.n(), f.alpha).lambda;
    EffectiveSparsityOptions opts;
    opts.restarts = f.restarts;
    opts.dense_search = !f.no_dense;
    opts.dense_samples = f.dense_samples;
    opts.dense_max_dim = f.dense_max_dim;
    opts.seed = run.globals().seed;

    json config{{"globals", globals_json(run.globals())},
                {"input", problem_source(f.problem)},
                {"truth", f.truth},
                {"norm", norm_json(spec)},
                {"set", index_set_json(S)},
                {"beta", f.beta},
                {"delta", f.delta},
                {"lambda", number_json(lambda)},
                {"lambda_from", f.lambda ? "flag" : "theoretical"},
                {"alpha", f.alpha},
                {"restarts", opts.restarts},
                {"dense_search", opts.dense_search},
                {"dense_samples", opts.dense_samples},
                {"dense_max_dim", opts.dense_max_dim}};

    SolverConfig cfg;
    cfg.lambda = lambda;
    FitResult fr;
    try {
        fr = fit(problem, spec, cfg);
    } catch (const InterpolationError& e) {
        throw NumericalFailure{e.kind(), e.what(), {{"config", config}}};
    }
    if (!fr.converged)
        throw NumericalFailure{"non_convergence", "fit did not converge", {{"config", config}, {"fit", fit_json(fr)}}};
    OracleCertificate cert;
    try {
        cert = oracle_certificate(problem, spec, S, beta, truth.beta0, noise, lambda, f.delta, fr, opts);
    } catch (const DegenerateDesign& e) {
        throw NumericalFailure{e.kind(), e.what(), {{"config", config}}};
    }
    if (deficient) run.log().warn("X_S is rank deficient; the projection is a least-norm solution");
    json result = certificate_json(cert);
    result["holds"] = cert.lhs <= cert.rhs;
    result["rank_deficient"] = deficient;
    result["beta_hat"] = vector_json(fr.beta_hat);
    json doc{{"status", "ok"}, {"command", "oracle"}, {"config", config}, {"certificate", certificate_json(cert)},
             {"result", result}};
    run.emit(doc, render_pairs(result, true), render_pairs(result, false));
}

struct SimulateFlags {
    std::string scenario = "all";
    std::string profile = "desk";
    std::optional<int> repetitions;
    std::optional<std::size_t> n;
    std::optional<std::size_t> p;
    std::optional<double> rho;
    std::optional<double> sigma;
    std::optional<int> cv_folds;
    std::optional<double> alpha;
    bool no_cv = false;
};

std::string with_extension(const std::string& path, const std::string& ext) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot) + ext;
    return path + ext;
}

void run_simulate(const Runner& run, const SimulateFlags& f) {
    std::vector<Scenario> scenarios;
    if (f.scenario == "all")
        scenarios.assign(all_scenarios().begin(), all_scenarios().end());
    else
        scenarios.push_back(parse_scenario(f.scenario));
    const std::uint64_t seed = run.globals().seed;

    std::vector<SimulationConfig> configs;
    for (Scenario s : scenarios) {
        SimulationConfig c = f.profile == "paper" ? SimulationConfig::paper(s, seed) : SimulationConfig::desk(s, seed);
        if (f.repetitions) c.repetitions = *f.repetitions;
        if (f.n) c.n = *f.n;
        if (f.p) c.p = *f.p;
        if (f.rho) c.rho = *f.rho;
        if (f.sigma) c.sigma = *f.sigma;
        if (f.cv_folds) c.cv_folds = *f.cv_folds;
        if (f.alpha) c.alpha = *f.alpha;
        c.run_cv = !f.no_cv;
        c.validate();
        configs.push_back(c);
    }

    json config{{"globals", globals_json(run.globals())},
                {"scenario", f.scenario},
                {"profile", f.profile}};
    json reports = json::array();
    std::string csv, text;
    for (const auto& c : configs) {
        run.log().info("simulating " + scenario_name(c.scenario) + ": n=" + std::to_string(c.n) +
                       " p=" + std::to_string(c.p) + " repetitions=" + std::to_string(c.repetitions));
        const SimulationReport r = run_study(c);
        for (const auto& cell : r.summary)
            if (cell.flagged > 0)
                run.log().warn(scenario_name(c.scenario) + " " + method_name(cell.method) + "/" +
                               source_name(cell.source) + ": " + std::to_string(cell.flagged) +
                               " flagged repetitions excluded from the means");
        reports.push_back(report_json(r));
        const std::string rows = report_csv(r);
        csv += csv.empty() ? rows : rows.substr(rows.find('\n') + 1);
        text += (text.empty() ? "" : "\n") + report_text(r);
    }
    json doc{{"status", "ok"}, {"command", "simulate"}, {"config", config}, {"reports", reports}};
    run.emit(doc, csv, text);
    if (!run.globals().out.empty()) {
        write_text_file(with_extension(run.globals().out, ".csv"), csv);
        write_text_file(with_extension(run.globals().out, ".txt"), text);
    }
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Square-root regularized regression: fitting, certificates, penalty levels and simulations",
                 "sqrtreg"};
    app.fallthrough();
    app.require_subcommand(1);

    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--out", g.out, "Write the JSON document to this file");
    app.add_option("--format", g.format, "Output format on stdout")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    app.add_option("--log-level", g.log_level, "Diagnostics on stderr")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
        ->capture_default_str();

    FitFlags fit_f;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a square-root regularized estimator");
    add_problem_flags(fit_cmd, fit_f.problem);
    add_norm_flags(fit_cmd, fit_f.norm);
    fit_cmd->add_option("--lambda", fit_f.lambda, "Penalty level")->required();
    fit_cmd->add_option("--kkt-tol", fit_f.solver.kkt_tol, "KKT tolerance for convergence")->capture_default_str();
    fit_cmd->add_option("--max-outer", fit_f.solver.max_outer, "Outer iterations")->capture_default_str();
    fit_cmd->add_option("--max-inner", fit_f.solver.max_inner, "Inner iterations")->capture_default_str();
    fit_cmd->add_option("--tol", fit_f.solver.tol_outer, "Relative change of sigma")->capture_default_str();

    KktFlags kkt_f;
    auto* kkt_cmd = app.add_subcommand("kkt-check", "KKT residual of a given coefficient vector");
    add_problem_flags(kkt_cmd, kkt_f.problem);
    add_norm_flags(kkt_cmd, kkt_f.norm);
    kkt_cmd->add_option("--lambda", kkt_f.lambda, "Penalty level")->required();
    kkt_cmd->add_option("--beta", kkt_f.beta, "JSON array or fit output holding beta_hat")->required();
    kkt_cmd->add_option("--kkt-tol", kkt_f.tol, "Tolerance for ok")->capture_default_str();

    LambdaFlags lam_f;
    auto* lam_cmd = app.add_subcommand("lambda", "Theoretical penalty level");
    add_norm_flags(lam_cmd, lam_f.norm);
    lam_cmd->add_option("--n", lam_f.n, "Sample size")->required();
    lam_cmd->add_option("--p", lam_f.p, "Number of coefficients")->required();
    lam_cmd->add_option("--alpha", lam_f.alpha, "Error probability")->capture_default_str();
    lam_cmd->add_option("--calibration", lam_f.calibration, "Delta calibration")
        ->check(CLI::IsMember({"boxed", "exact"}))
        ->capture_default_str();
    lam_cmd->add_option("--a-tilde", lam_f.a_tilde, "Structured norm: A tilde");
    lam_cmd->add_option("--extreme-points", lam_f.extreme_points, "Structured norm: number of extreme points");

    OracleFlags or_f;
    auto* or_cmd = app.add_subcommand("oracle", "Sharp oracle inequality certificate");
    add_problem_flags(or_cmd, or_f.problem);
    add_norm_flags(or_cmd, or_f.norm);
    or_cmd->add_option("--truth", or_f.truth, "Truth JSON file {beta0, sigma, noise, active_set}")->required();
    or_cmd->add_option("--set", or_f.set, "Allowed set, e.g. 0,3,5-8 (default: the true support)");
    or_cmd->add_option("--delta", or_f.delta, "delta in [0, 1)")->capture_default_str();
    or_cmd->add_option("--lambda", or_f.lambda, "Penalty level (default: theoretical)");
    or_cmd->add_option("--alpha", or_f.alpha, "Error probability for the theoretical level")->capture_default_str();
    or_cmd->add_option("--beta", or_f.beta, "Comparison vector")
        ->check(CLI::IsMember({"truth", "restricted", "projection"}))
        ->capture_default_str();
    or_cmd->add_option("--restarts", or_f.restarts, "Effective sparsity restarts")->capture_default_str();
    or_cmd->add_option("--dense-samples", or_f.dense_samples, "Dense search samples")->capture_default_str();
    or_cmd->add_option("--dense-max-dim", or_f.dense_max_dim, "Largest p with dense search")->capture_default_str();
    or_cmd->add_flag("--no-dense", or_f.no_dense, "Skip the dense search");

    SimulateFlags sim_f;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulation study with Toeplitz designs");
    sim_cmd->add_option("--scenario", sim_f.scenario, "decreasing, decreasing-random, grouped, grouped-random or all")
        ->capture_default_str();
    sim_cmd->add_option("--profile", sim_f.profile, "desk (n=50, p=100, 20 repetitions) or paper (n=100, p=500, 100)")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
    sim_cmd->add_option("--repetitions", sim_f.repetitions, "Override the number of repetitions");
    sim_cmd->add_option("--n", sim_f.n, "Override n");
    sim_cmd->add_option("--p", sim_f.p, "Override p");
    sim_cmd->add_option("--rho", sim_f.rho, "Override the Toeplitz parameter");
    sim_cmd->add_option("--sigma", sim_f.sigma, "Override the noise level");
    sim_cmd->add_option("--cv-folds", sim_f.cv_folds, "Override the number of folds");
    sim_cmd->add_option("--alpha", sim_f.alpha, "Override the error probability");
    sim_cmd->add_flag("--no-cv", sim_f.no_cv, "Skip cross-validation");

    if (argc <= 1) {
        err << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    }

    const Runner run(g, out, err);
    std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "fit") run_fit(run, fit_f);
        else if (command == "kkt-check") run_kkt(run, kkt_f);
        else if (command == "lambda") run_lambda(run, lam_f);
        else if (command == "oracle") run_oracle(run, or_f);
        else run_simulate(run, sim_f);
    } catch (const NumericalFailure& e) {
        json doc{{"status", "error"}, {"command", command}, {"error", {{"kind", e.kind}, {"message", e.message}}}};
        for (auto it = e.partial.begin(); it != e.partial.end(); ++it) doc[it.key()] = *it;
        out << doc.dump(2) << '\n';
        return kExitNumerical;
    } catch (const NumericalError& e) {
        out << json{{"status", "error"}, {"command", command}, {"error", {{"kind", e.kind()}, {"message", e.what()}}}}
                   .dump(2)
            << '\n';
        return kExitNumerical;
    } catch (const DegenerateDesign& e) {
        out << json{{"status", "error"}, {"command", command}, {"error", {{"kind", e.kind()}, {"message", e.what()}}}}
                   .dump(2)
            << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace sqrtreg
