#pragma once

#include <optional>
#include <vector>

#include "sqrtreg/model.hpp"
#include "sqrtreg/norms.hpp"

namespace sqrtreg {

struct SolverConfig {
    double lambda = 0.0;
    int max_outer = 100;
    int max_inner = 20000;
    // Relative change of sigma = ||Y - X beta||_n between outer iterations.
    double tol_outer = 1e-10;
    // Inner stop: norm of the proximal-gradient mapping relative to ||X^T Y||_2 / n.
    double tol_inner = 1e-11;
    double kkt_tol = 1e-6;
    // Safeguarded secant steps on sigma; a step is kept only if it lowers the objective.
    bool secant_sigma = true;
    std::optional<VectorXd> beta_init;
    // Largest eigenvalue of X^T X / n, if already known.
    std::optional<double> lipschitz;

    void validate() const;
};

struct FitResult {
    VectorXd beta_hat;
    VectorXd residual;
    double residual_norm_n = 0.0;
    int outer_iters = 0;
    int inner_iters = 0;
    double kkt_residual = 0.0;
    bool converged = false;
    double objective = 0.0;
    double lambda = 0.0;
    // ||Y - X beta_i||_n + lambda Omega(beta_i) after every outer iteration (first entry: start).
    std::vector<double> objective_trace;
};

// ||Y - X beta||_n + lambda Omega(beta).
double sqrt_objective(const RegressionProblem& problem, const NormSpec& spec, const VectorXd& beta,
                      double lambda);

// Square-root regularized fit: alternate sigma <- ||Y - X beta||_n with the
// penalized least-squares problem 1/2 ||Y - X beta||_n^2 + sigma lambda Omega(beta).
FitResult fit(const RegressionProblem& problem, const NormSpec& spec, const SolverConfig& config);

// Largest eigenvalue of X^T X / n.
double lipschitz_constant(const MatrixXd& X);

/// Minimises 1/2 ||Y - X beta||_n^2 + penalty * Omega(beta) by FISTA with
/// monotone restarts, starting from `start`.
struct InnerResult {
    VectorXd beta;
    int iterations = 0;
    bool converged = false;
};
InnerResult penalized_least_squares(const RegressionProblem& problem, const NormSpec& spec,
                                    double penalty, const VectorXd& start, double lipschitz,
                                    int max_iter, double tol);

// KKT residual of the square-root problem at beta_hat:
// max( [Omega^*(g) - lambda]_+, |g^T beta_hat - lambda Omega(beta_hat)| / (1 + lambda Omega(beta_hat)) )
// with g = X^T (Y - X beta_hat) / (n ||Y - X beta_hat||_n).
double check_kkt(const RegressionProblem& problem, const NormSpec& spec, const VectorXd& beta_hat,
                 double lambda);

// Plain lasso 1/2 ||Y - X beta||_n^2 + penalty ||beta||_1 by cyclic coordinate descent.
VectorXd lasso_coordinate_descent(const RegressionProblem& problem, double penalty,
                                  double tol = 1e-14, int max_sweeps = 100000);

// Fits the square-root lasso, then the plain lasso at penalty lambda * ||Y - X beta_hat||_n,
// and returns the sup-norm distance between the two estimates.
double fixed_point_check(const RegressionProblem& problem, double lambda,
                         const SolverConfig& config = {});

}  // namespace sqrtreg
