#include "sqrtreg/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sqrtreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const json& field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name))
        throw InvalidArgument(std::string("missing JSON field '") + name + "'");
    return j.at(name);
}

std::vector<IndexSet> groups_from(const json& j) {
    std::vector<IndexSet> out;
    for (const auto& g : j) out.push_back(index_set_from(g));
    return out;
}

json groups_json(const std::vector<IndexSet>& groups) {
    json out = json::array();
    for (const auto& g : groups) out.push_back(index_set_json(g));
    return out;
}

Method method_from(const std::string& s) {
    if (s == method_name(Method::SrLasso)) return Method::SrLasso;
    if (s == method_name(Method::SrSlope)) return Method::SrSlope;
    throw InvalidArgument("unknown method '" + s + "'");
}

LambdaSource source_from(const std::string& s) {
    if (s == source_name(LambdaSource::Theoretical)) return LambdaSource::Theoretical;
    if (s == source_name(LambdaSource::CrossValidated)) return LambdaSource::CrossValidated;
    throw InvalidArgument("unknown lambda source '" + s + "'");
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

}  // namespace

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
    if (j.is_null()) return kNaN;
    if (!j.is_number()) throw InvalidArgument("expected a number, got " + j.dump());
    return j.get<double>();
}

json vector_json(const VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_json(v[i]));
    return out;
}

VectorXd vector_from(const json& j) {
    if (!j.is_array()) throw InvalidArgument("expected an array of numbers");
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from(j[i]);
    return v;
}

json index_set_json(const IndexSet& s) { return json(s); }

IndexSet index_set_from(const json& j) {
    if (!j.is_array()) throw InvalidArgument("expected an array of indices");
    IndexSet out;
    for (const auto& e : j) {
        if (!e.is_number_integer() || e.get<long long>() < 0)
            throw InvalidArgument("index must be a non-negative integer, got " + e.dump());
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

json problem_json(const RegressionProblem& problem) {
    json X = json::array();
    for (Eigen::Index i = 0; i < problem.X().rows(); ++i) X.push_back(vector_json(problem.X().row(i).transpose()));
    return {{"n", problem.n()}, {"p", problem.p()}, {"X", X}, {"Y", vector_json(problem.Y())}};
}

RegressionProblem problem_from(const json& j) {
    const json& rows = field(j, "X");
    VectorXd Y = vector_from(field(j, "Y"));
    if (!rows.is_array()) throw InvalidArgument("'X' must be an array of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        VectorXd r = vector_from(rows[static_cast<std::size_t>(i)]);
        if (r.size() != p) throw DimensionError("row " + std::to_string(i) + " of X has the wrong length");
        X.row(i) = r.transpose();
    }
    if (j.contains("n") && j["n"].get<long long>() != n) throw DimensionError("'n' does not match X");
    if (j.contains("p") && j["p"].get<long long>() != p) throw DimensionError("'p' does not match X");
    return RegressionProblem(std::move(X), std::move(Y));
}

MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw InvalidArgument("'" + path + "': not a number: '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows[0].size())
            throw DimensionError("'" + path + "': ragged row " + std::to_string(rows.size() + 1));
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    MatrixXd M(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < p; ++k) M(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    return M;
}

std::string matrix_csv(const MatrixXd& M) {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index k = 0; k < M.cols(); ++k) os << (k ? "," : "") << fmt(M(i, k));
        os << '\n';
    }
    return os.str();
}

RegressionProblem problem_from_csv(const std::string& x_path, const std::string& y_path) {
    MatrixXd X = read_csv_matrix(x_path);
    MatrixXd Y = read_csv_matrix(y_path);
    if (Y.cols() != 1) throw DimensionError("'" + y_path + "' must have a single column");
    return RegressionProblem(std::move(X), Y.col(0));
}

json truth_json(const GroundTruth& truth) {
    return {{"beta0", vector_json(truth.beta0)},
            {"sigma", number_json(truth.sigma)},
            {"noise", vector_json(truth.noise)},
            {"active_set", index_set_json(truth.active_set)}};
}

GroundTruth truth_from(const json& j) {
    GroundTruth t;
    t.beta0 = vector_from(field(j, "beta0"));
    t.sigma = j.contains("sigma") ? number_from(j["sigma"]) : 1.0;
    t.noise = j.contains("noise") ? vector_from(j["noise"]) : VectorXd();
    t.active_set = j.contains("active_set") ? index_set_from(j["active_set"]) : support(t.beta0);
    return t;
}

json norm_json(const NormSpec& spec) {
    json out{{"dim", spec.dim()}};
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NormSpec::L1>) {
                out["type"] = "l1";
                out["weight"] = v.weight;
            } else if constexpr (std::is_same_v<T, NormSpec::Group>) {
                out["type"] = "group";
                out["groups"] = groups_json(v.groups);
            } else if constexpr (std::is_same_v<T, NormSpec::SortedL1>) {
                out["type"] = "sorted_l1";
                out["lambda"] = vector_json(v.lambda);
            } else if constexpr (std::is_same_v<T, NormSpec::SparseGroup>) {
                out["type"] = "sparse_group";
                out["l1_weight"] = v.l1_weight;
                out["group_weight"] = v.group_weight;
                out["groups"] = groups_json(v.groups);
            } else {
                out["type"] = "structured";
                if (const auto* b = std::get_if<ConeSpec::Box>(&v.cone.shape))
                    out["cone"] = {{"shape", "box"}, {"lower", vector_json(b->lower)}, {"upper", vector_json(b->upper)}};
                else
                    out["cone"] = {{"shape", "wedge"}};
            }
        },
        spec.variant());
    return out;
}

NormSpec norm_from(const json& j) {
    const std::string type = field(j, "type").get<std::string>();
    auto dim = [&] { return field(j, "dim").get<std::size_t>(); };
    if (type == "l1") return NormSpec::l1(dim(), j.value("weight", 1.0));
    if (type == "group") return NormSpec::group(dim(), groups_from(field(j, "groups")));
    if (type == "sorted_l1") {
        VectorXd lambda = vector_from(field(j, "lambda"));
        if (j.contains("dim") && dim() != static_cast<std::size_t>(lambda.size()))
            throw DimensionError("'dim' does not match the length of 'lambda'");
        return NormSpec::sorted_l1(std::move(lambda));
    }
    if (type == "sparse_group")
        return NormSpec::sparse_group(dim(), number_from(field(j, "l1_weight")), number_from(field(j, "group_weight")),
                                      groups_from(field(j, "groups")));
    if (type == "structured") {
        const json& cone = field(j, "cone");
        const std::string shape = field(cone, "shape").get<std::string>();
        if (shape == "wedge") return NormSpec::wedge(dim());
        if (shape == "box") {
            NormSpec spec = NormSpec::box(vector_from(field(cone, "lower")), vector_from(field(cone, "upper")));
            if (j.contains("dim") && dim() != spec.dim()) throw DimensionError("'dim' does not match the box bounds");
            return spec;
        }
        throw InvalidArgument("unknown cone shape '" + shape + "'");
    }
    throw InvalidArgument("unknown norm type '" + type + "'");
}

json fit_json(const FitResult& fit) {
    return {{"beta_hat", vector_json(fit.beta_hat)},
            {"residual", vector_json(fit.residual)},
            {"residual_norm_n", number_json(fit.residual_norm_n)},
            {"outer_iters", fit.outer_iters},
            {"inner_iters", fit.inner_iters},
            {"kkt_residual", number_json(fit.kkt_residual)},
            {"converged", fit.converged},
            {"objective", number_json(fit.objective)},
            {"lambda", number_json(fit.lambda)},
            {"objective_trace", vector_json(Eigen::Map<const VectorXd>(fit.objective_trace.data(),
                                                                       static_cast<Eigen::Index>(fit.objective_trace.size())))}};
}

FitResult fit_from(const json& j) {
    FitResult f;
    f.beta_hat = vector_from(field(j, "beta_hat"));
    f.residual = vector_from(field(j, "residual"));
    f.residual_norm_n = number_from(field(j, "residual_norm_n"));
    f.outer_iters = field(j, "outer_iters").get<int>();
    f.inner_iters = field(j, "inner_iters").get<int>();
    f.kkt_residual = number_from(field(j, "kkt_residual"));
    f.converged = field(j, "converged").get<bool>();
    f.objective = number_from(field(j, "objective"));
    f.lambda = number_from(field(j, "lambda"));
    VectorXd trace = vector_from(field(j, "objective_trace"));
    f.objective_trace.assign(trace.data(), trace.data() + trace.size());
    return f;
}

json levels_json(const EmpiricalLevels& lv) {
    return {{"f", number_json(lv.f)},
            {"lambda0", number_json(lv.lambda0)},
            {"lambdaS", number_json(lv.lambdaS)},
            {"lambdaSc", number_json(lv.lambdaSc)},
            {"lambdaM", number_json(lv.lambdaM)}};
}

EmpiricalLevels levels_from(const json& j) {
    EmpiricalLevels lv;
    lv.f = number_from(field(j, "f"));
    lv.lambda0 = number_from(field(j, "lambda0"));
    lv.lambdaS = number_from(field(j, "lambdaS"));
    lv.lambdaSc = number_from(field(j, "lambdaSc"));
    lv.lambdaM = number_from(field(j, "lambdaM"));
    return lv;
}

json certificate_json(const OracleCertificate& c) {
    const auto& s = c.sparsity;
    return {{"levels", levels_json(c.levels)},
            {"lambda", number_json(c.lambda)},
            {"lambda_star", number_json(c.lambda_star)},
            {"lambda_tilde", number_json(c.lambda_tilde)},
            {"L_S", number_json(c.L_S)},
            {"gamma_sq", number_json(c.gamma_sq)},
            {"sparsity",
             {{"gamma_sq", number_json(s.gamma_sq)},
              {"delta", number_json(s.delta)},
              {"delta_spread", number_json(s.delta_spread)},
              {"restarts", s.restarts},
              {"dense_samples", s.dense_samples},
              {"estimate", s.estimate}}},
            {"delta", number_json(c.delta)},
            {"a_const", number_json(c.a_const)},
            {"noise_norm_n", number_json(c.noise_norm_n)},
            {"approximation", number_json(c.approximation)},
            {"prediction", number_json(c.prediction)},
            {"omega_S_error", number_json(c.omega_S_error)},
            {"omega_Sc_error", number_json(c.omega_Sc_error)},
            {"lhs", number_json(c.lhs)},
            {"rhs", number_json(c.rhs)},
            {"estimation_bound", number_json(c.estimation_bound)},
            {"assumptions_ok", c.assumptions_ok},
            {"assumption_one", c.assumption_one},
            {"C", number_json(c.C)},
            {"C1", number_json(c.C1)},
            {"C2", number_json(c.C2)},
            {"corollary_prediction_bound", number_json(c.corollary_prediction_bound)},
            {"corollary_estimation_bound", number_json(c.corollary_estimation_bound)},
            {"residual_ratio", number_json(c.residual_ratio)}};
}

OracleCertificate certificate_from(const json& j) {
    OracleCertificate c;
    auto num = [&](const char* k) { return number_from(field(j, k)); };
    c.levels = levels_from(field(j, "levels"));
    c.lambda = num("lambda");
    c.lambda_star = num("lambda_star");
    c.lambda_tilde = num("lambda_tilde");
    c.L_S = num("L_S");
    c.gamma_sq = num("gamma_sq");
    const json& s = field(j, "sparsity");
    c.sparsity.gamma_sq = number_from(field(s, "gamma_sq"));
    c.sparsity.delta = number_from(field(s, "delta"));
    c.sparsity.delta_spread = number_from(field(s, "delta_spread"));
    c.sparsity.restarts = field(s, "restarts").get<int>();
    c.sparsity.dense_samples = field(s, "dense_samples").get<long>();
    c.sparsity.estimate = field(s, "estimate").get<bool>();
    c.delta = num("delta");
    c.a_const = num("a_const");
    c.noise_norm_n = num("noise_norm_n");
    c.approximation = num("approximation");
    c.prediction = num("prediction");
    c.omega_S_error = num("omega_S_error");
    c.omega_Sc_error = num("omega_Sc_error");
    c.lhs = num("lhs");
    c.rhs = num("rhs");
    c.estimation_bound = num("estimation_bound");
    c.assumptions_ok = field(j, "assumptions_ok").get<bool>();
    c.assumption_one = field(j, "assumption_one").get<bool>();
    c.C = num("C");
    c.C1 = num("C1");
    c.C2 = num("C2");
    c.corollary_prediction_bound = num("corollary_prediction_bound");
    c.corollary_estimation_bound = num("corollary_estimation_bound");
    c.residual_ratio = num("residual_ratio");
    return c;
}

json simulation_config_json(const SimulationConfig& c) {
    json out{{"n", c.n},
             {"p", c.p},
             {"rho", number_json(c.rho)},
             {"sigma", number_json(c.sigma)},
             {"repetitions", c.repetitions},
             {"scenario", scenario_name(c.scenario)},
             {"seed", c.seed},
             {"cv_folds", c.cv_folds},
             {"alpha", number_json(c.alpha)},
             {"cv_grid_size", c.cv_grid_size},
             {"cv_grid_low", number_json(c.cv_grid_low)},
             {"cv_grid_high", number_json(c.cv_grid_high)},
             {"run_cv", c.run_cv}};
    out["sorted_l1_seq"] = c.sorted_l1_seq ? vector_json(*c.sorted_l1_seq) : json(nullptr);
    return out;
}

SimulationConfig simulation_config_from(const json& j) {
    SimulationConfig c;
    c.n = field(j, "n").get<std::size_t>();
    c.p = field(j, "p").get<std::size_t>();
    c.rho = number_from(field(j, "rho"));
    c.sigma = number_from(field(j, "sigma"));
    c.repetitions = field(j, "repetitions").get<int>();
    c.scenario = parse_scenario(field(j, "scenario").get<std::string>());
    c.seed = field(j, "seed").get<std::uint64_t>();
    c.cv_folds = field(j, "cv_folds").get<int>();
    c.alpha = number_from(field(j, "alpha"));
    c.cv_grid_size = field(j, "cv_grid_size").get<int>();
    c.cv_grid_low = number_from(field(j, "cv_grid_low"));
    c.cv_grid_high = number_from(field(j, "cv_grid_high"));
    c.run_cv = field(j, "run_cv").get<bool>();
    if (j.contains("sorted_l1_seq") && !j["sorted_l1_seq"].is_null()) c.sorted_l1_seq = vector_from(j["sorted_l1_seq"]);
    return c;
}

json report_json(const SimulationReport& r) {
    json records = json::array();
    for (const auto& f : r.records)
        records.push_back({{"method", method_name(f.method)},
                           {"source", source_name(f.source)},
                           {"repetition", f.repetition},
                           {"lambda", number_json(f.lambda)},
                           {"l1_error", number_json(f.l1_error)},
                           {"sorted_l1_error", number_json(f.sorted_l1_error)},
                           {"prediction_l2", number_json(f.prediction_l2)},
                           {"kkt_residual", number_json(f.kkt_residual)},
                           {"converged", f.converged},
                           {"outer_iters", f.outer_iters},
                           {"inner_iters", f.inner_iters},
                           {"error", f.error},
                           {"message", f.message}});
    json summary = json::array();
    for (const auto& s : r.summary)
        summary.push_back({{"method", method_name(s.method)},
                           {"source", source_name(s.source)},
                           {"mean_l1_error", number_json(s.mean_l1_error)},
                           {"mean_sorted_l1_error", number_json(s.mean_sorted_l1_error)},
                           {"mean_prediction_l2", number_json(s.mean_prediction_l2)},
                           {"valid", s.valid},
                           {"flagged", s.flagged}});
    return {{"config", simulation_config_json(r.config)},
            {"theoretical_lambda_lasso", number_json(r.theoretical_lambda_lasso)},
            {"theoretical_lambda_slope", number_json(r.theoretical_lambda_slope)},
            {"summary", summary},
            {"records", records}};
}

SimulationReport report_from(const json& j) {
    SimulationReport r;
    r.config = simulation_config_from(field(j, "config"));
    r.theoretical_lambda_lasso = number_from(field(j, "theoretical_lambda_lasso"));
    r.theoretical_lambda_slope = number_from(field(j, "theoretical_lambda_slope"));
    for (const auto& e : field(j, "records")) {
        FitRecord f;
        f.method = method_from(field(e, "method").get<std::string>());
        f.source = source_from(field(e, "source").get<std::string>());
        f.repetition = field(e, "repetition").get<int>();
        f.lambda = number_from(field(e, "lambda"));
        f.l1_error = number_from(field(e, "l1_error"));
        f.sorted_l1_error = number_from(field(e, "sorted_l1_error"));
        f.prediction_l2 = number_from(field(e, "prediction_l2"));
        f.kkt_residual = number_from(field(e, "kkt_residual"));
        f.converged = field(e, "converged").get<bool>();
        f.outer_iters = field(e, "outer_iters").get<int>();
        f.inner_iters = field(e, "inner_iters").get<int>();
        f.error = field(e, "error").get<std::string>();
        f.message = field(e, "message").get<std::string>();
        r.records.push_back(std::move(f));
    }
    for (const auto& e : field(j, "summary")) {
        SummaryCell s;
        s.method = method_from(field(e, "method").get<std::string>());
        s.source = source_from(field(e, "source").get<std::string>());
        s.mean_l1_error = number_from(field(e, "mean_l1_error"));
        s.mean_sorted_l1_error = number_from(field(e, "mean_sorted_l1_error"));
        s.mean_prediction_l2 = number_from(field(e, "mean_prediction_l2"));
        s.valid = field(e, "valid").get<int>();
        s.flagged = field(e, "flagged").get<int>();
        r.summary.push_back(s);
    }
    return r;
}

std::string report_csv(const SimulationReport& r) {
    std::ostringstream os;
    os << "scenario,method,lambda_source,mean_l1_error,mean_sorted_l1_error,mean_prediction_l2,valid,flagged\n";
    for (const auto& s : r.summary)
        os << scenario_name(r.config.scenario) << ',' << method_name(s.method) << ',' << source_name(s.source) << ','
           << fmt(s.mean_l1_error) << ',' << fmt(s.mean_sorted_l1_error) << ',' << fmt(s.mean_prediction_l2) << ','
           << s.valid << ',' << s.flagged << '\n';
    return os.str();
}

std::string report_text(const SimulationReport& r) {
    std::ostringstream os;
    const auto& c = r.config;
    os << "scenario " << scenario_name(c.scenario) << "  n=" << c.n << " p=" << c.p << " rho=" << c.rho
       << " sigma=" << c.sigma << " repetitions=" << c.repetitions << " seed=" << c.seed << '\n';
    os << "theoretical lambda: srLASSO " << fixed(r.theoretical_lambda_lasso, 4) << ", srSLOPE "
       << fixed(r.theoretical_lambda_slope, 4) << '\n';
    os << std::left << std::setw(9) << "method" << std::setw(13) << "lambda" << std::right << std::setw(12)
       << "l1 error" << std::setw(12) << "J error" << std::setw(14) << "prediction" << std::setw(7) << "valid"
       << std::setw(9) << "flagged" << '\n';
    for (const auto& s : r.summary)
        os << std::left << std::setw(9) << method_name(s.method) << std::setw(13) << source_name(s.source)
           << std::right << std::setw(12) << fixed(s.mean_l1_error, 3) << std::setw(12)
           << fixed(s.mean_sorted_l1_error, 3) << std::setw(14) << fixed(s.mean_prediction_l2, 3) << std::setw(7)
           << s.valid << std::setw(9) << s.flagged << '\n';
    return os.str();
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("'" + path + "': " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << content;
}

}  // namespace sqrtreg
