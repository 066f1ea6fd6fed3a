#include "sqrtreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sqrtreg {

void SolverConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
    if (max_outer < 1 || max_inner < 1) throw InvalidArgument("iteration limits must be >= 1");
    if (!(tol_outer > 0.0) || !(tol_inner > 0.0) || !(kkt_tol > 0.0))
        throw InvalidArgument("tolerances must be positive");
    if (lipschitz && !(*lipschitz > 0.0)) throw InvalidArgument("lipschitz constant must be positive");
}

double sqrt_objective(const RegressionProblem& problem, const NormSpec& spec, const VectorXd& beta,
                      double lambda) {
    return norm_n(residual(problem, beta)) + lambda * norm_value(spec, beta);
}

double lipschitz_constant(const MatrixXd& X) {
    const double n = static_cast<double>(X.rows());
    MatrixXd gram = X.rows() < X.cols() ? MatrixXd(X * X.transpose()) : MatrixXd(X.transpose() * X);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    return std::max(es.eigenvalues().maxCoeff(), 0.0) / n;
}

InnerResult penalized_least_squares(const RegressionProblem& problem, const NormSpec& spec,
                                    double penalty, const VectorXd& start, double lipschitz,
                                    int max_iter, double tol) {
    const MatrixXd& X = problem.X();
    const VectorXd& Y = problem.Y();
    const double n = static_cast<double>(problem.n());
    require_length(start, problem.p(), "start (p)");

    InnerResult out;
    if (lipschitz <= 0.0) {
        out.beta = VectorXd::Zero(start.size());
        out.converged = true;
        return out;
    }
    const double data_scale = (X.transpose() * Y).norm() / n;
    const double scale =
        std::max(std::clamp(penalty, 1e-8 * data_scale, data_scale), std::numeric_limits<double>::min());
    const double step = 1.0 / lipschitz;

    VectorXd x = start;
    VectorXd Xx = X * x;
    VectorXd y = x, Xy = Xx;
    double t = 1.0;

    for (int k = 0; k < max_iter; ++k) {
        out.iterations = k + 1;
        const VectorXd grad = -X.transpose() * (Y - Xy) / n;
        VectorXd z = prox(spec, y - step * grad, step * penalty);
        const double gmap = lipschitz * (z - y).norm();
        VectorXd Xz = X * z;
        double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        // Gradient-based restart: drop the momentum once it points uphill.
        if ((y - z).dot(z - x) > 0.0) t = 1.0, t_next = 1.0;
        const double m = (t - 1.0) / t_next;
        y = z + m * (z - x);
        Xy = Xz + m * (Xz - Xx);
        x = std::move(z);
        Xx = std::move(Xz);
        t = t_next;
        if (gmap <= tol * scale) {
            out.converged = true;
            break;
        }
    }
    out.beta = std::move(x);
    return out;
}

double check_kkt(const RegressionProblem& problem, const NormSpec& spec, const VectorXd& beta_hat,
                 double lambda) {
    const VectorXd r = residual(problem, beta_hat);
    const double s = norm_n(r);
    if (!(s > 0.0))
        throw InterpolationError("residual norm is zero: KKT conditions are undefined (the fit interpolates)",
                                 beta_hat);
    const VectorXd g = problem.X().transpose() * r / (static_cast<double>(problem.n()) * s);
    const double pen = lambda * norm_value(spec, beta_hat);
    const double dual_gap = std::max(0.0, dual_norm(spec, g) - lambda);
    const double complementarity = std::abs(g.dot(beta_hat) - pen) / (1.0 + pen);
    return std::max(dual_gap, complementarity);
}

FitResult fit(const RegressionProblem& problem, const NormSpec& spec, const SolverConfig& config) {
    config.validate();
    if (spec.dim() != problem.p())
        throw DimensionError("norm dimension " + std::to_string(spec.dim()) +
                             " does not match p=" + std::to_string(problem.p()));
    const double lambda = config.lambda;
    const double n = static_cast<double>(problem.n());
    const double y_norm = norm_n(problem.Y());

    FitResult res;
    res.lambda = lambda;
    auto finish_zero = [&] {
        res.beta_hat = VectorXd::Zero(problem.p());
        res.residual = problem.Y();
        res.residual_norm_n = y_norm;
        res.objective = y_norm;
        res.objective_trace.push_back(y_norm);
        res.kkt_residual = y_norm > 0.0 ? check_kkt(problem, spec, res.beta_hat, lambda) : 0.0;
        res.converged = res.kkt_residual <= config.kkt_tol;
        return res;
    };
    if (y_norm == 0.0) return finish_zero();
    const VectorXd g0 = problem.X().transpose() * problem.Y() / (n * y_norm);
    if (dual_norm(spec, g0) <= lambda) return finish_zero();

    const double L = config.lipschitz ? *config.lipschitz : lipschitz_constant(problem.X());
    VectorXd beta = config.beta_init ? *config.beta_init : VectorXd::Zero(problem.p());
    require_length(beta, problem.p(), "beta_init (p)");

    const double floor = 1e-12 * y_norm;
    auto collapse = [&](const VectorXd& b) {
        return InterpolationError("residual norm collapsed to zero: the estimator interpolates the data", b);
    };

    double sigma = norm_n(residual(problem, beta));
    double h = sigma + lambda * norm_value(spec, beta);
    res.objective_trace.push_back(h);

    // Evaluations (s, phi(s)) of the map s -> ||Y - X beta(s lambda)||_n, where
    // beta(t) solves the inner problem at penalty t.
    struct Eval {
        double s;
        double phi;
        double h;
        VectorXd beta;
    };
    std::vector<std::pair<double, double>> history;
    double change = std::numeric_limits<double>::infinity();
    auto evaluate = [&](double s) {
        const double tol = std::max(config.tol_inner, std::min(1e-6, 1e-3 * change));
        auto inner = penalized_least_squares(problem, spec, s * lambda, beta, L, config.max_inner, tol);
        res.inner_iters += inner.iterations;
        const double phi = norm_n(residual(problem, inner.beta));
        history.emplace_back(s, phi);
        return Eval{s, phi, phi + lambda * norm_value(spec, inner.beta), std::move(inner.beta)};
    };

    bool outer_done = false;
    for (int it = 0; it < config.max_outer; ++it) {
        if (sigma < floor) throw collapse(beta);
        res.outer_iters = it + 1;
        std::optional<Eval> next;
        if (config.secant_sigma && history.size() >= 2) {
            // Secant step on g(s) = phi(s) - s through the last two evaluations.
            const auto [s0, p0] = history[history.size() - 2];
            const auto [s1, p1] = history.back();
            const double g0 = p0 - s0, g1 = p1 - s1;
            double root = g1 != g0 ? s1 - g1 * (s1 - s0) / (g1 - g0) : sigma;
            if (!std::isfinite(root)) root = sigma;
            root = std::clamp(root, 0.1 * sigma, 10.0 * sigma);
            if (std::abs(root - sigma) > 1e-3 * config.tol_outer * sigma) {
                Eval trial = evaluate(root);
                if (trial.h <= h) next = std::move(trial);
            }
        }
        if (!next) next = evaluate(sigma);
        change = std::abs(next->phi - next->s) / std::max(next->s, 1e-300);
        beta = std::move(next->beta);
        sigma = next->phi;
        h = next->h;
        res.objective_trace.push_back(h);
        if (change < config.tol_outer) {
            outer_done = true;
            break;
        }
    }
    if (sigma < floor) throw collapse(beta);

    res.beta_hat = std::move(beta);
    res.residual = residual(problem, res.beta_hat);
    res.residual_norm_n = norm_n(res.residual);
    res.objective = res.residual_norm_n + lambda * norm_value(spec, res.beta_hat);
    res.kkt_residual = check_kkt(problem, spec, res.beta_hat, lambda);
    res.converged = outer_done && res.kkt_residual <= config.kkt_tol;
    return res;
}

VectorXd lasso_coordinate_descent(const RegressionProblem& problem, double penalty, double tol,
                                  int max_sweeps) {
    const MatrixXd& X = problem.X();
    const double n = static_cast<double>(problem.n());
    const Eigen::Index p = X.cols();
    VectorXd col_sq(p);
    for (Eigen::Index j = 0; j < p; ++j) col_sq(j) = X.col(j).squaredNorm() / n;
    VectorXd beta = VectorXd::Zero(p);
    VectorXd r = problem.Y();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_sq(j) == 0.0) continue;
            const double rho = X.col(j).dot(r) / n + col_sq(j) * beta(j);
            double b = 0.0;
            if (rho > penalty) b = (rho - penalty) / col_sq(j);
            else if (rho < -penalty) b = (rho + penalty) / col_sq(j);
            const double d = b - beta(j);
            if (d != 0.0) {
                r -= d * X.col(j);
                beta(j) = b;
                max_change = std::max(max_change, std::abs(d) * std::sqrt(col_sq(j)));
            }
        }
        if (max_change <= tol) break;
    }
    return beta;
}

double fixed_point_check(const RegressionProblem& problem, double lambda, const SolverConfig& config) {
    SolverConfig cfg = config;
    cfg.lambda = lambda;
    const auto spec = NormSpec::l1(problem.p());
    const FitResult fr = fit(problem, spec, cfg);
    if (!fr.converged)
        throw NumericalError("square-root lasso fit did not converge (KKT residual " +
                             std::to_string(fr.kkt_residual) + ")");
    if (fr.residual_norm_n <= 0.0)
        throw InterpolationError("residual norm is zero", fr.beta_hat);
    const VectorXd lasso = lasso_coordinate_descent(problem, lambda * fr.residual_norm_n);
    return (lasso - fr.beta_hat).lpNorm<Eigen::Infinity>();
}

}  // namespace sqrtreg
