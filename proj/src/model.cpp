#include "sqrtreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sqrtreg {

RegressionProblem::RegressionProblem(MatrixXd X, VectorXd Y) : X_(std::move(X)), Y_(std::move(Y)) {
    if (X_.rows() == 0 || X_.cols() == 0)
        throw DimensionError("design matrix must have n >= 1 rows and p >= 1 columns");
    if (Y_.size() != X_.rows())
        throw DimensionError("response length " + std::to_string(Y_.size()) +
                             " does not match design rows n=" + std::to_string(X_.rows()));
    if (!X_.allFinite()) throw InvalidArgument("design matrix contains NaN or Inf");
    if (!Y_.allFinite()) throw InvalidArgument("response contains NaN or Inf");
}

RegressionProblem RegressionProblem::rows(const std::vector<std::size_t>& idx) const {
    MatrixXd Xs(idx.size(), X_.cols());
    VectorXd Ys(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= n()) throw DimensionError("row index out of range");
        Xs.row(i) = X_.row(idx[i]);
        Ys(i) = Y_(idx[i]);
    }
    return RegressionProblem(std::move(Xs), std::move(Ys));
}

IndexSet support(const VectorXd& v) {
    IndexSet s;
    for (Eigen::Index j = 0; j < v.size(); ++j)
        if (v(j) != 0.0) s.push_back(static_cast<std::size_t>(j));
    return s;
}

double norm_n(const VectorXd& v) {
    if (v.size() == 0) return 0.0;
    return std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

double inner_n(const VectorXd& u, const VectorXd& v) {
    if (u.size() != v.size()) throw DimensionError("inner_n: length mismatch");
    if (u.size() == 0) return 0.0;
    return u.dot(v) / static_cast<double>(u.size());
}

void require_length(const VectorXd& v, std::size_t expected, const char* name) {
    if (static_cast<std::size_t>(v.size()) != expected)
        throw DimensionError(std::string(name) + " has length " + std::to_string(v.size()) +
                             ", expected " + std::to_string(expected));
}

VectorXd residual(const RegressionProblem& problem, const VectorXd& beta) {
    require_length(beta, problem.p(), "beta (p)");
    return problem.Y() - problem.X() * beta;
}

double prediction_error_l2(const RegressionProblem& problem, const VectorXd& beta_hat,
                           const VectorXd& beta0) {
    require_length(beta_hat, problem.p(), "beta_hat (p)");
    require_length(beta0, problem.p(), "beta0 (p)");
    return (problem.X() * (beta0 - beta_hat)).norm();
}

IndexSet normalize_index_set(IndexSet s, std::size_t p) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (!s.empty() && s.back() >= p)
        throw DimensionError("index " + std::to_string(s.back()) + " out of range for p=" +
                             std::to_string(p));
    return s;
}

IndexSet complement(const IndexSet& s, std::size_t p) {
    IndexSet out;
    out.reserve(p - std::min(p, s.size()));
    std::size_t k = 0;
    for (std::size_t j = 0; j < p; ++j) {
        if (k < s.size() && s[k] == j) {
            ++k;
            continue;
        }
        out.push_back(j);
    }
    return out;
}

VectorXd gather(const VectorXd& v, const IndexSet& idx) {
    VectorXd out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
    return out;
}

VectorXd scatter(const VectorXd& v, const IndexSet& idx, std::size_t p) {
    VectorXd out = VectorXd::Zero(p);
    for (std::size_t i = 0; i < idx.size(); ++i) out(idx[i]) = v(i);
    return out;
}

VectorXd restrict_to(const VectorXd& v, const IndexSet& idx) {
    VectorXd out = VectorXd::Zero(v.size());
    for (auto j : idx) out(j) = v(j);
    return out;
}

MatrixXd columns(const MatrixXd& X, const IndexSet& idx) {
    MatrixXd out(X.rows(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out.col(i) = X.col(idx[i]);
    return out;
}

}  // namespace sqrtreg
