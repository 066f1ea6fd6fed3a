#include "sqrtreg/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sqrtreg/rng.hpp"
#include "sqrtreg/theory.hpp"

namespace sqrtreg {

namespace {

constexpr std::array<std::size_t, 7> kPaperSupport{153, 128, 275, 28, 232, 239, 401};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_random(Scenario s) { return s == Scenario::DecreasingRandom || s == Scenario::GroupedRandom; }
bool is_grouped(Scenario s) { return s == Scenario::Grouped || s == Scenario::GroupedRandom; }

}  // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Decreasing: return "decreasing";
        case Scenario::DecreasingRandom: return "decreasing-random";
        case Scenario::Grouped: return "grouped";
        case Scenario::GroupedRandom: return "grouped-random";
    }
    return "unknown";
}

Scenario parse_scenario(const std::string& name) {
    for (auto s : all_scenarios())
        if (scenario_name(s) == name) return s;
    throw InvalidArgument("unknown scenario '" + name +
                          "' (expected decreasing, decreasing-random, grouped or grouped-random)");
}

const std::array<Scenario, 4>& all_scenarios() {
    static const std::array<Scenario, 4> all{Scenario::Decreasing, Scenario::DecreasingRandom, Scenario::Grouped,
                                             Scenario::GroupedRandom};
    return all;
}

std::string method_name(Method m) { return m == Method::SrLasso ? "srLASSO" : "srSLOPE"; }
std::string source_name(LambdaSource s) { return s == LambdaSource::Theoretical ? "theoretical" : "cv"; }

SimulationConfig SimulationConfig::desk(Scenario s, std::uint64_t seed) {
    SimulationConfig c;
    c.n = 50;
    c.p = 100;
    c.repetitions = 20;
    c.scenario = s;
    c.seed = seed;
    return c;
}

SimulationConfig SimulationConfig::paper(Scenario s, std::uint64_t seed) {
    SimulationConfig c;
    c.scenario = s;
    c.seed = seed;
    return c;
}

void SimulationConfig::validate() const {
    if (n < 2) throw InvalidArgument("n must be at least 2");
    if (p < 7) throw InvalidArgument("p must be at least 7 (the true support has 7 coefficients)");
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in [0, 1)");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be finite and >= 0");
    if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
    if (cv_folds < 2) throw InvalidArgument("cv_folds must be >= 2");
    if (static_cast<std::size_t>(cv_folds) > n) throw InvalidArgument("cv_folds must not exceed n");
    if (cv_grid_size < 1 || !(cv_grid_low > 0.0) || !(cv_grid_high >= cv_grid_low))
        throw InvalidArgument("invalid cross-validation grid");
    if (sorted_l1_seq && static_cast<std::size_t>(sorted_l1_seq->size()) != p)
        throw DimensionError("sorted_l1_seq must have length p");
}

VectorXd SimulationConfig::slope_sequence() const {
    return sorted_l1_seq ? *sorted_l1_seq : linear_sequence(1.0, 0.1, p);
}

MatrixXd toeplitz_covariance(std::size_t p, double rho) {
    MatrixXd S(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            S(i, j) = std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
    return S;
}

MatrixXd generate_design(const SimulationConfig& config) {
    config.validate();
    Eigen::LLT<MatrixXd> llt(toeplitz_covariance(config.p, config.rho));
    if (llt.info() != Eigen::Success) throw NumericalError("Toeplitz covariance is not positive definite");
    const MatrixXd Lc = llt.matrixL();
    Engine gen = make_engine(config.seed, Stream::Design);
    MatrixXd Z(config.n, config.p);
    for (std::size_t i = 0; i < config.n; ++i) Z.row(i) = standard_normal(gen, config.p).transpose();
    return Z * Lc.transpose();
}

std::pair<VectorXd, IndexSet> true_coefficients(const SimulationConfig& config) {
    config.validate();
    IndexSet S;
    if (!is_random(config.scenario)) {
        for (std::size_t k = 0; k < 7; ++k) S.push_back(k);
    } else if (config.p >= 403) {
        S.assign(kPaperSupport.begin(), kPaperSupport.end());
    } else {
        Engine gen = make_engine(config.seed, Stream::Support);
        const auto perm = random_permutation(gen, config.p);
        S.assign(perm.begin(), perm.begin() + 7);
    }
    static const std::array<double, 7> grouped{4, 4, 4, 3, 3, 2, 2};
    VectorXd beta0 = VectorXd::Zero(config.p);
    for (std::size_t k = 0; k < 7; ++k)
        beta0(S[k]) = is_grouped(config.scenario) ? grouped[k] : 4.0 - static_cast<double>(k) / 3.0;
    return {beta0, S};
}

std::pair<RegressionProblem, GroundTruth> generate_problem(const SimulationConfig& config, const MatrixXd& X,
                                                           int repetition) {
    auto [beta0, S] = true_coefficients(config);
    Engine gen = make_engine(config.seed, Stream::Noise, static_cast<std::uint64_t>(repetition));
    VectorXd noise = config.sigma * standard_normal(gen, config.n);
    VectorXd Y = X * beta0 + noise;
    GroundTruth truth{beta0, config.sigma, noise, normalize_index_set(S, config.p)};
    return {RegressionProblem(X, std::move(Y)), std::move(truth)};
}

std::pair<RegressionProblem, GroundTruth> generate_problem(const SimulationConfig& config, int repetition) {
    return generate_problem(config, generate_design(config), repetition);
}

std::vector<double> log_grid(double low, double high, int count) {
    if (count < 1 || !(low > 0.0) || !(high >= low)) throw InvalidArgument("invalid log grid");
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = low;
        return g;
    }
    const double a = std::log(low), b = std::log(high);
    for (int i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * i / (count - 1));
    return g;
}

CvResult cross_validate(const RegressionProblem& problem, const NormSpec& spec, std::vector<double> grid,
                        int folds, std::uint64_t seed, const SolverConfig& base) {
    if (grid.empty()) throw InvalidArgument("cross-validation grid is empty");
    for (double l : grid)
        if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("grid values must be positive");
    if (folds < 2 || static_cast<std::size_t>(folds) > problem.n())
        throw InvalidArgument("folds must lie in [2, n]");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const std::size_t n = problem.n();
    const std::size_t m = grid.size();
    Engine gen = make_engine(seed, Stream::CvShuffle);
    const auto perm = random_permutation(gen, n);

    std::vector<double> err_sum(m, 0.0);
    std::vector<int> bad(m, 0);
    for (int k = 0; k < folds; ++k) {
        const std::size_t lo = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(folds);
        const std::size_t hi = n * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(folds);
        std::vector<std::size_t> test(perm.begin() + lo, perm.begin() + hi), train;
        train.insert(train.end(), perm.begin(), perm.begin() + lo);
        train.insert(train.end(), perm.begin() + hi, perm.end());
        std::sort(test.begin(), test.end());
        std::sort(train.begin(), train.end());
        const RegressionProblem tr = problem.rows(train);
        const RegressionProblem te = problem.rows(test);

        SolverConfig cfg = base;
        cfg.lipschitz = lipschitz_constant(tr.X());
        VectorXd warm = VectorXd::Zero(problem.p());
        bool collapsed = false;
        for (std::size_t i = m; i-- > 0;) {
            // The residual norm is non-decreasing in lambda, so once a fit
            // interpolates every smaller lambda does too.
            if (collapsed) {
                ++bad[i];
                continue;
            }
            cfg.lambda = grid[i];
            cfg.beta_init = warm;
            try {
                const FitResult fr = fit(tr, spec, cfg);
                warm = fr.beta_hat;
                if (!fr.converged) {
                    ++bad[i];
                    continue;
                }
                err_sum[i] += (te.Y() - te.X() * fr.beta_hat).squaredNorm() / static_cast<double>(te.n());
            } catch (const InterpolationError&) {
                collapsed = true;
                ++bad[i];
            } catch (const NumericalError&) {
                ++bad[i];
            }
        }
    }

    CvResult out;
    out.grid = grid;
    out.cv_error.assign(m, kNaN);
    out.invalid_cells = bad;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        if (bad[i] > 0) continue;
        out.cv_error[i] = err_sum[i] / folds;
        if (out.cv_error[i] < best) {  // strict: ties keep the smaller lambda
            best = out.cv_error[i];
            out.lambda = grid[i];
        }
    }
    if (!std::isfinite(best)) throw NumericalError("cross-validation: every grid value had an invalid fold fit");
    return out;
}

double cross_validate_lambda(const RegressionProblem& problem, const NormSpec& spec,
                             const std::vector<double>& grid, int folds, std::uint64_t seed) {
    return cross_validate(problem, spec, grid, folds, seed).lambda;
}

const SummaryCell& SimulationReport::cell(Method m, LambdaSource s) const {
    for (const auto& c : summary)
        if (c.method == m && c.source == s) return c;
    throw InvalidArgument("no summary cell for " + method_name(m) + "/" + source_name(s));
}

std::vector<SummaryCell> summarize(const std::vector<FitRecord>& records) {
    std::vector<SummaryCell> out;
    for (Method m : {Method::SrLasso, Method::SrSlope}) {
        for (LambdaSource s : {LambdaSource::Theoretical, LambdaSource::CrossValidated}) {
            SummaryCell c{m, s, 0.0, 0.0, 0.0, 0, 0};
            bool any = false;
            for (const auto& r : records) {
                if (r.method != m || r.source != s) continue;
                any = true;
                if (!r.valid()) {
                    ++c.flagged;
                    continue;
                }
                ++c.valid;
                c.mean_l1_error += r.l1_error;
                c.mean_sorted_l1_error += r.sorted_l1_error;
                c.mean_prediction_l2 += r.prediction_l2;
            }
            if (!any) continue;
            if (c.valid > 0) {
                c.mean_l1_error /= c.valid;
                c.mean_sorted_l1_error /= c.valid;
                c.mean_prediction_l2 /= c.valid;
            } else {
                c.mean_l1_error = c.mean_sorted_l1_error = c.mean_prediction_l2 = kNaN;
            }
            out.push_back(c);
        }
    }
    return out;
}

namespace {

FitRecord fit_record(const RegressionProblem& problem, const GroundTruth& truth, const NormSpec& spec,
                     const NormSpec& metric, Method m, LambdaSource s, int rep, double lambda) {
    FitRecord r;
    r.method = m;
    r.source = s;
    r.repetition = rep;
    r.lambda = lambda;
    auto metrics = [&](const VectorXd& beta) {
        const VectorXd diff = truth.beta0 - beta;
        r.l1_error = diff.lpNorm<1>();
        r.sorted_l1_error = norm_value(metric, diff);
        r.prediction_l2 = prediction_error_l2(problem, beta, truth.beta0);
    };
    SolverConfig cfg;
    cfg.lambda = lambda;
    try {
        const FitResult fr = fit(problem, spec, cfg);
        metrics(fr.beta_hat);
        r.kkt_residual = fr.kkt_residual;
        r.converged = fr.converged;
        r.outer_iters = fr.outer_iters;
        r.inner_iters = fr.inner_iters;
        if (!fr.converged) {
            r.error = "not_converged";
            r.message = "KKT residual " + std::to_string(fr.kkt_residual);
        }
    } catch (const InterpolationError& e) {
        if (e.last_beta().size() == static_cast<Eigen::Index>(problem.p())) metrics(e.last_beta());
        r.kkt_residual = kNaN;
        r.error = e.kind();
        r.message = e.what();
    } catch (const Error& e) {
        r.l1_error = r.sorted_l1_error = r.prediction_l2 = r.kkt_residual = kNaN;
        r.error = e.kind();
        r.message = e.what();
    }
    return r;
}

}  // namespace

SimulationReport run_study(const SimulationConfig& config) {
    config.validate();
    SimulationReport rep;
    rep.config = config;
    const NormSpec lasso = NormSpec::l1(config.p);
    const NormSpec slope = NormSpec::sorted_l1(config.slope_sequence());
    rep.theoretical_lambda_lasso = theoretical_lambda(lasso, config.n, config.alpha).lambda;
    rep.theoretical_lambda_slope = theoretical_lambda(slope, config.n, config.alpha).lambda;

    const MatrixXd X = generate_design(config);
    for (int r = 0; r < config.repetitions; ++r) {
        auto [problem, truth] = generate_problem(config, X, r);
        for (Method m : {Method::SrLasso, Method::SrSlope}) {
            const NormSpec& spec = m == Method::SrLasso ? lasso : slope;
            const double lt = m == Method::SrLasso ? rep.theoretical_lambda_lasso : rep.theoretical_lambda_slope;
            rep.records.push_back(fit_record(problem, truth, spec, slope, m, LambdaSource::Theoretical, r, lt));
            if (!config.run_cv) continue;
            double lcv = kNaN;
            std::string cv_error;
            try {
                const auto grid = log_grid(config.cv_grid_low * lt, config.cv_grid_high * lt, config.cv_grid_size);
                const std::uint64_t cv_seed = splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(r)));
                lcv = cross_validate(problem, spec, grid, config.cv_folds, cv_seed).lambda;
            } catch (const Error& e) {
                cv_error = e.what();
            }
            if (cv_error.empty()) {
                rep.records.push_back(
                    fit_record(problem, truth, spec, slope, m, LambdaSource::CrossValidated, r, lcv));
            } else {
                FitRecord fr;
                fr.method = m;
                fr.source = LambdaSource::CrossValidated;
                fr.repetition = r;
                fr.lambda = kNaN;
                fr.l1_error = fr.sorted_l1_error = fr.prediction_l2 = fr.kkt_residual = kNaN;
                fr.error = "cross_validation";
                fr.message = cv_error;
                rep.records.push_back(fr);
            }
        }
    }
    rep.summary = summarize(rep.records);
    return rep;
}

}  // namespace sqrtreg
