#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sqrtreg/model.hpp"
#include "sqrtreg/norms.hpp"
#include "sqrtreg/solver.hpp"

namespace sqrtreg {

// Noise-driven quantities normalised by n ||eps||_n.
struct EmpiricalLevels {
    double f = 0.0;         // lambda Omega(beta0) / ||eps||_n
    double lambda0 = 0.0;   // Omega^*(X^T eps) / (n ||eps||_n)
    double lambdaS = 0.0;   // Omega^* of the zero-padded (X^T eps)_S, same scaling
    double lambdaSc = 0.0;  // complement dual of (X^T eps)_{S^c}, same scaling
    double lambdaM = 0.0;   // max(lambdaS, lambdaSc)
};

EmpiricalLevels empirical_levels(const RegressionProblem& problem, const NormSpec& spec,
                                 const IndexSet& S, const VectorXd& beta0, const VectorXd& noise,
                                 double lambda);

struct EffectiveSparsityOptions {
    int restarts = 25;
    int max_iter = 3000;
    bool dense_search = true;
    long dense_samples = 1'000'000;
    // Dense search runs only when p is at most this.
    std::size_t dense_max_dim = 12;
    std::uint64_t seed = 0;
};

/// Estimate of the Omega-eigenvalue
///   delta(L, S) = min { ||X b_S - X b_{S^c}||_n : Omega(b_S) = 1, Omega^{S^c}(b_{S^c}) <= L }
/// and Gamma^2 = 1 / delta^2. The search is non-convex, so delta is an upper
/// bound and gamma_sq a lower estimate.
struct EffectiveSparsity {
    double gamma_sq = 0.0;
    double delta = 0.0;
    double delta_spread = 0.0;  // max - min of delta over restarts
    int restarts = 0;
    long dense_samples = 0;
    bool estimate = true;
};

EffectiveSparsity effective_sparsity(const RegressionProblem& problem, const NormSpec& spec,
                                     const IndexSet& S, double L,
                                     const EffectiveSparsityOptions& opts = {});

struct OracleCertificate {
    EmpiricalLevels levels;
    double lambda = 0.0;
    double lambda_star = 0.0;
    double lambda_tilde = 0.0;
    double L_S = 0.0;  // NaN when lambda_star <= lambdaM
    double gamma_sq = 0.0;
    EffectiveSparsity sparsity;
    double delta = 0.5;
    double a_const = 0.0;
    double noise_norm_n = 0.0;
    double approximation = 0.0;          // ||X (beta - beta0)||_n^2
    double prediction = 0.0;             // ||X (beta_hat - beta0)||_n^2
    double omega_S_error = 0.0;          // Omega(beta_hat_S - beta)
    double omega_Sc_error = 0.0;         // Omega^{S^c}(beta_hat_{S^c})
    double lhs = 0.0;
    double rhs = 0.0;
    // The two halves of lhs <= rhs: prediction <= rhs and
    // omega_S_error + omega_Sc_error <= estimation_bound.
    double estimation_bound = 0.0;
    bool assumptions_ok = false;
    bool assumption_one = false;  // (lambda0/lambda)(1 + 2f) < 1
    double C = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;  // NaN when 1 - 2C(1 + 2f) < 0
    // Bounds of the simplified form with C1, C2.
    double corollary_prediction_bound = 0.0;
    double corollary_estimation_bound = 0.0;
    double residual_ratio = 0.0;  // ||eps_hat||_n / ||eps||_n
};

OracleCertificate oracle_certificate(const RegressionProblem& problem, const NormSpec& spec,
                                     const IndexSet& S, const VectorXd& beta, const VectorXd& beta0,
                                     const VectorXd& noise, double lambda, double delta,
                                     const FitResult& fit,
                                     const EffectiveSparsityOptions& opts = {});

// Same, fitting beta_hat first with default solver settings.
OracleCertificate oracle_certificate(const RegressionProblem& problem, const NormSpec& spec,
                                     const IndexSet& S, const VectorXd& beta, const VectorXd& beta0,
                                     const VectorXd& noise, double lambda, double delta = 0.5,
                                     const EffectiveSparsityOptions& opts = {});

// Right-hand side with ||eps||_n^2 replaced by sigma^2 C.
double substituted_rhs(const OracleCertificate& cert, double sigma, double C);

// ---- Gaussian-noise calibration -------------------------------------------

enum class Calibration {
    Boxed,  // Delta^2 = 1 - t sqrt(2/n)
    Exact,  // Delta^2 = 1 - 2t / sqrt(n), for which the bound below equals 1 - alpha
};

struct ProbabilityBoundParams {
    double alpha = 0.05;
    double t = 0.0;
    double Delta = 0.0;
    double D = 1.0;
    double EV_bound = 0.0;
    double B2 = 1.0;
    double d = 0.0;
};

// Upper bound on E[V] for the given norm: sqrt(2/n)(2 + sqrt(log p)) for l1 and
// the corresponding plug-ins for the other norms.
double expected_dual_bound(const NormSpec& spec, std::size_t n);

ProbabilityBoundParams calibrate(const NormSpec& spec, std::size_t n, double alpha,
                                 Calibration cal = Calibration::Boxed);

// 1 - 2 exp(-(d - EV)^2 Delta^2 / (2 B2 / n)) - 2 exp(-(n/4)(1 - Delta^2)^2), for 0 < Delta.
double probability_bound(const ProbabilityBoundParams& params, std::size_t n);

// The same expression in the regime stated with Delta > 1.
double proposition_bound(const ProbabilityBoundParams& params, std::size_t n);

struct NoiseNormBound {
    double bound = 0.0;        // sigma^2 (1 + 2x + 2x^2)
    double probability = 0.0;  // 1 - exp(-n x^2)
};
NoiseNormBound noise_norm_bound(double sigma, std::size_t n, double x);
// Lower bound on P(||eps||_n^2 <= sigma^2 C): 1 - exp(-(n/2)(C - sqrt(2C - 1))), C >= 1.
double noise_norm_probability_c(std::size_t n, double C);

// ---- theoretical penalty levels -------------------------------------------

struct StructuredLambdaInputs {
    double A_tilde = 0.0;
    double extreme_points = 0.0;  // |E(A)|
};

struct TheoreticalLambda {
    double lambda = 0.0;
    std::optional<double> eta;  // sparse-group: the group-part level
    double t = 0.0;
    double Delta = 0.0;
    bool fallback = false;  // structured norm without A_tilde / |E(A)|: the square-root lasso value
};

TheoreticalLambda theoretical_lambda(const NormSpec& spec, std::size_t n, double alpha,
                                     std::optional<StructuredLambdaInputs> structured = {});

// ---- oracle point ----------------------------------------------------------

struct OraclePoint {
    IndexSet S;
    VectorXd beta;
    OracleCertificate certificate;
    bool rank_deficient = false;
};

// Least-squares projection of X beta0 onto span(X_S) for every candidate S;
// returns the candidate with the smallest right-hand side.
OraclePoint best_oracle_point(const RegressionProblem& problem, const NormSpec& spec,
                              const std::vector<IndexSet>& candidate_sets, const VectorXd& beta0,
                              const VectorXd& noise, double lambda, double delta,
                              const FitResult& fit, const EffectiveSparsityOptions& opts = {});

// beta_star(S) and whether X_S is rank deficient.
std::pair<VectorXd, bool> project_onto_support(const MatrixXd& X, const VectorXd& beta0,
                                               const IndexSet& S);

}  // namespace sqrtreg
