#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "sqrtreg/model.hpp"

using namespace sqrtreg;

TEST(RegressionProblem, RejectsBadShapes) {
    EXPECT_THROW(RegressionProblem(MatrixXd::Zero(3, 2), VectorXd::Zero(4)), DimensionError);
    MatrixXd X = MatrixXd::Ones(2, 2);
    X(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(RegressionProblem(X, VectorXd::Zero(2)), InvalidArgument);
    VectorXd Y = VectorXd::Zero(2);
    Y[1] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(RegressionProblem(MatrixXd::Ones(2, 2), Y), InvalidArgument);
}

TEST(RegressionProblem, RowSubset) {
    MatrixXd X(3, 2);
    X << 1, 2, 3, 4, 5, 6;
    const RegressionProblem pr(X, Eigen::Vector3d(7, 8, 9));
    const auto sub = pr.rows({2, 0});
    EXPECT_EQ(sub.n(), 2u);
    EXPECT_EQ(sub.p(), 2u);
    EXPECT_DOUBLE_EQ(sub.X()(0, 0), 5.0);
    EXPECT_DOUBLE_EQ(sub.Y()[1], 7.0);
    EXPECT_THROW(pr.rows({3}), DimensionError);
}

TEST(Residual, ZeroBetaGivesResponse) {
    std::mt19937_64 rng(1);
    const RegressionProblem pr(oracle::gaussian_matrix(6, 3, rng), oracle::gaussian_vector(6, rng));
    EXPECT_EQ(residual(pr, VectorXd::Zero(3)), pr.Y());
}

TEST(Residual, TrueBetaGivesNoise) {
    std::mt19937_64 rng(2);
    const MatrixXd X = oracle::gaussian_matrix(8, 4, rng);
    const VectorXd b0 = oracle::gaussian_vector(4, rng), eps = oracle::gaussian_vector(8, rng);
    const RegressionProblem pr(X, X * b0 + eps);
    EXPECT_LT((residual(pr, b0) - eps).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Residual, IdentityDesign) {
    const RegressionProblem pr(MatrixXd::Identity(2, 2), Eigen::Vector2d(3, 1));
    const VectorXd r = residual(pr, Eigen::Vector2d(1, 1));
    EXPECT_DOUBLE_EQ(r[0], 2.0);
    EXPECT_DOUBLE_EQ(r[1], 0.0);
    EXPECT_THROW(residual(pr, Eigen::Vector3d(1, 1, 1)), DimensionError);
}

TEST(Residual, AffineInBeta) {
    std::mt19937_64 rng(3);
    const RegressionProblem pr(oracle::gaussian_matrix(10, 5, rng), oracle::gaussian_vector(10, rng));
    for (int k = 0; k < 100; ++k) {
        const VectorXd a = oracle::gaussian_vector(5, rng), b = oracle::gaussian_vector(5, rng);
        EXPECT_LT((residual(pr, a) - residual(pr, b) + pr.X() * (a - b)).lpNorm<Eigen::Infinity>(), 1e-12);
    }
}

TEST(PredictionError, Examples) {
    const RegressionProblem pr(MatrixXd::Identity(2, 2), Eigen::Vector2d(0, 0));
    EXPECT_DOUBLE_EQ(prediction_error_l2(pr, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)), 1.0);
    EXPECT_DOUBLE_EQ(prediction_error_l2(pr, Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)), 0.0);
}

TEST(PredictionError, UnscaledEuclidean) {
    std::mt19937_64 rng(4);
    const MatrixXd X = oracle::gaussian_matrix(5, 3, rng);
    const RegressionProblem pr(X, oracle::gaussian_vector(5, rng));
    const VectorXd b0 = oracle::gaussian_vector(3, rng), bh = oracle::gaussian_vector(3, rng);
    double s = 0.0;
    for (int i = 0; i < 5; ++i) {
        double r = 0.0;
        for (int j = 0; j < 3; ++j) r += X(i, j) * (b0[j] - bh[j]);
        s += r * r;
    }
    EXPECT_NEAR(prediction_error_l2(pr, bh, b0), std::sqrt(s), 1e-12);
}

TEST(NormN, SquaredTimesNIsSumOfSquares) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 1 + static_cast<std::size_t>(k % 17);
        const VectorXd v = oracle::gaussian_vector(n, rng) * std::pow(10.0, k % 7 - 3);
        const double ss = v.squaredNorm();
        EXPECT_NEAR(norm_n(v) * norm_n(v) * static_cast<double>(n), ss, 1e-12 * ss);
    }
    EXPECT_NEAR(inner_n(Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)), 5.5, 1e-15);
}

TEST(IndexSets, Helpers) {
    EXPECT_EQ(normalize_index_set({3, 1, 3}, 4), (IndexSet{1, 3}));
    EXPECT_THROW(normalize_index_set({4}, 4), DimensionError);
    EXPECT_EQ(complement({1, 3}, 5), (IndexSet{0, 2, 4}));
    const VectorXd v = Eigen::Vector4d(1, 2, 3, 4);
    EXPECT_EQ(gather(v, {1, 3}), Eigen::Vector2d(2, 4));
    EXPECT_EQ(scatter(Eigen::Vector2d(2, 4), {1, 3}, 4), Eigen::Vector4d(0, 2, 0, 4));
    EXPECT_EQ(restrict_to(v, {0, 2}), Eigen::Vector4d(1, 0, 3, 0));
    EXPECT_EQ(support(Eigen::Vector4d(0, -1, 0, 2)), (IndexSet{1, 3}));
    const MatrixXd X = MatrixXd::Identity(3, 3);
    EXPECT_EQ(columns(X, {2}), X.col(2));
}
