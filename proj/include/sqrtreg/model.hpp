#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "sqrtreg/errors.hpp"

namespace sqrtreg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Sorted, duplicate-free, 0-based coordinate indices.
using IndexSet = std::vector<std::size_t>;

/// Linear model data: response Y (length n) and design X (n x p).
///
/// Immutable after construction. Non-finite entries and mismatched shapes are
/// rejected by the constructor.
class RegressionProblem {
public:
    RegressionProblem(MatrixXd X, VectorXd Y);

    const MatrixXd& X() const noexcept { return X_; }
    const VectorXd& Y() const noexcept { return Y_; }
    std::size_t n() const noexcept { return static_cast<std::size_t>(X_.rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(X_.cols()); }

    // Sub-problem on a subset of rows (used by cross-validation).
    RegressionProblem rows(const std::vector<std::size_t>& idx) const;

private:
    MatrixXd X_;
    VectorXd Y_;
};

/// Simulation-side truth: beta0, noise level, the realised noise and the support.
/// Fitting never reads it.
struct GroundTruth {
    VectorXd beta0;
    double sigma = 1.0;
    VectorXd noise;
    IndexSet active_set;
};

// Support of a vector (indices of non-zero entries).
IndexSet support(const VectorXd& v);

// ||v||_n = sqrt(sum v_j^2 / n).
double norm_n(const VectorXd& v);

// <u, v>_n = sum u_j v_j / n.
double inner_n(const VectorXd& u, const VectorXd& v);

// Y - X beta.
VectorXd residual(const RegressionProblem& problem, const VectorXd& beta);

// Unscaled Euclidean prediction error ||X (beta0 - beta_hat)||_2.
double prediction_error_l2(const RegressionProblem& problem, const VectorXd& beta_hat,
                           const VectorXd& beta0);

// Throws DimensionError unless v has the expected length.
void require_length(const VectorXd& v, std::size_t expected, const char* name);

// Index-set helpers. All take/return sorted 0-based sets.
IndexSet normalize_index_set(IndexSet s, std::size_t p);
IndexSet complement(const IndexSet& s, std::size_t p);
VectorXd gather(const VectorXd& v, const IndexSet& idx);
// Zero vector of length p with v placed at idx.
VectorXd scatter(const VectorXd& v, const IndexSet& idx, std::size_t p);
// v with entries outside idx set to zero.
VectorXd restrict_to(const VectorXd& v, const IndexSet& idx);
MatrixXd columns(const MatrixXd& X, const IndexSet& idx);

}  // namespace sqrtreg
