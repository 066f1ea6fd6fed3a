#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sqrtreg/theory.hpp"

using namespace sqrtreg;

namespace {

struct Instance {
    RegressionProblem problem;
    VectorXd beta0;
    VectorXd noise;
    IndexSet S0;
};

Instance make_instance(std::size_t n, std::size_t p, std::size_t k, double scale, std::mt19937_64& rng) {
    const MatrixXd X = oracle::gaussian_matrix(n, p, rng);
    VectorXd b0 = VectorXd::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < k; ++j) b0[static_cast<Eigen::Index>(j)] = scale * (1.0 + 0.5 * static_cast<double>(j));
    const VectorXd eps = oracle::gaussian_vector(n, rng);
    IndexSet S0(k);
    std::iota(S0.begin(), S0.end(), 0);
    return {RegressionProblem(X, X * b0 + eps), b0, eps, S0};
}

EffectiveSparsityOptions quick_opts() {
    EffectiveSparsityOptions o;
    o.restarts = 10;
    o.dense_samples = 20000;
    return o;
}

}  // namespace

TEST(EmpiricalLevels, ZeroTruthGivesZeroF) {
    std::mt19937_64 rng(1);
    const auto inst = make_instance(20, 6, 2, 1.0, rng);
    const auto lv = empirical_levels(inst.problem, NormSpec::l1(6), {0, 1}, VectorXd::Zero(6), inst.noise, 0.5);
    EXPECT_EQ(lv.f, 0.0);
}

TEST(EmpiricalLevels, NoiseOrthogonalToDesign) {
    std::mt19937_64 rng(2);
    const VectorXd eps = oracle::gaussian_vector(12, rng);
    const MatrixXd P = MatrixXd::Identity(12, 12) - eps * eps.transpose() / eps.squaredNorm();
    const MatrixXd X = P * oracle::gaussian_matrix(12, 5, rng);
    const RegressionProblem pr(X, eps);
    const auto lv = empirical_levels(pr, NormSpec::l1(5), {1, 2}, VectorXd::Zero(5), eps, 0.5);
    EXPECT_NEAR(lv.lambda0, 0.0, 1e-14);
    EXPECT_NEAR(lv.lambdaS, 0.0, 1e-14);
    EXPECT_NEAR(lv.lambdaSc, 0.0, 1e-14);
}

TEST(EmpiricalLevels, L1RecomputedDirectly) {
    std::mt19937_64 rng(3);
    const auto inst = make_instance(30, 10, 3, 1.0, rng);
    const double lambda = 0.4;
    const auto lv = empirical_levels(inst.problem, NormSpec::l1(10), inst.S0, inst.beta0, inst.noise, lambda);
    const VectorXd w = inst.problem.X().transpose() * inst.noise;
    const double scale = 30.0 * std::sqrt(inst.noise.squaredNorm() / 30.0);
    double inS = 0.0, outS = 0.0;
    for (int j = 0; j < 10; ++j) (j < 3 ? inS : outS) = std::max(j < 3 ? inS : outS, std::abs(w[j]) / scale);
    EXPECT_NEAR(lv.lambda0, w.cwiseAbs().maxCoeff() / scale, 1e-14);
    EXPECT_NEAR(lv.lambdaS, inS, 1e-14);
    EXPECT_NEAR(lv.lambdaSc, outS, 1e-14);
    EXPECT_NEAR(lv.f, lambda * inst.beta0.lpNorm<1>() / (scale / 30.0), 1e-12);
}

TEST(EmpiricalLevels, ZeroNoiseIsAnError) {
    std::mt19937_64 rng(4);
    const auto inst = make_instance(10, 4, 1, 1.0, rng);
    EXPECT_THROW(empirical_levels(inst.problem, NormSpec::l1(4), {0}, inst.beta0, VectorXd::Zero(10), 0.5),
                 InvalidArgument);
    EXPECT_THROW(empirical_levels(inst.problem, NormSpec::group(4, {{0, 1}, {2, 3}}), {0}, inst.beta0, inst.noise, 0.5),
                 DisallowedSet);
}

TEST(EmpiricalLevels, SupNormIsDominatedByMaxLevel) {
    std::mt19937_64 rng(5);
    for (int v = 0; v < 5; ++v)
        for (int rep = 0; rep < 20; ++rep) {
            const auto inst = make_instance(25, 9, 2, 0.3, rng);
            const auto spec = oracle::random_spec(v, 9, rng);
            const IndexSet S = oracle::random_allowed_set(spec, rng);
            const double lambda = 0.5;
            const auto lv = empirical_levels(inst.problem, spec, S, inst.beta0, inst.noise, lambda);
            EXPECT_LE(lv.lambda0, lv.lambdaM * (1.0 + 1e-10) + 1e-14) << spec.tag();
            const double a = 3.0 * (1.0 + lv.f);
            if (lv.lambdaM / lambda < 1.0 / a) {
                const double lower = (1.0 - lv.lambdaM / lambda * (1.0 + 2.0 * lv.f)) / (lv.f + 2.0);
                const double star = (1.0 - lv.lambda0 / lambda * (1.0 + 2.0 * lv.f)) / (lv.f + 2.0);
                EXPECT_GE(star, lower - 1e-14);
                EXPECT_GT(lower, lv.lambdaM / lambda);
            }
        }
}

TEST(EffectiveSparsity, OrthonormalDesign) {
    std::mt19937_64 rng(6);
    const MatrixXd G = oracle::gaussian_matrix(20, 6, rng);
    const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(G).householderQ() * MatrixXd::Identity(20, 6);
    const RegressionProblem pr(Q * std::sqrt(20.0), VectorXd::Zero(20));
    for (double L : {0.5, 2.0, 10.0}) {
        const auto es = effective_sparsity(pr, NormSpec::l1(6), {1, 4}, L, quick_opts());
        EXPECT_NEAR(es.delta, 1.0 / std::sqrt(2.0), 1e-6) << "L=" << L;
        EXPECT_NEAR(es.gamma_sq, 2.0, 1e-5) << "L=" << L;
    }
}

TEST(EffectiveSparsity, EmptySetIsAnError) {
    std::mt19937_64 rng(7);
    const RegressionProblem pr(oracle::gaussian_matrix(10, 4, rng), VectorXd::Zero(10));
    EXPECT_THROW(effective_sparsity(pr, NormSpec::l1(4), {}, 1.0), InvalidArgument);
}

TEST(EffectiveSparsity, DuplicatedColumnsAreDegenerate) {
    std::mt19937_64 rng(8);
    MatrixXd X = oracle::gaussian_matrix(10, 4, rng);
    X.col(3) = X.col(0);
    const RegressionProblem pr(X, VectorXd::Zero(10));
    EXPECT_THROW(effective_sparsity(pr, NormSpec::l1(4), {0}, 2.0, quick_opts()), DegenerateDesign);
}

TEST(EffectiveSparsity, MonotoneInL) {
    std::mt19937_64 rng(9);
    for (int v = 0; v < 3; ++v) {
        const auto inst = make_instance(20, 8, 2, 1.0, rng);
        const auto spec = oracle::random_spec(v == 1 ? 2 : v, 8, rng);
        double prev = 0.0;
        for (double L : {0.2, 0.5, 1.0, 2.0, 4.0}) {
            const double g = effective_sparsity(inst.problem, spec, {0, 1}, L, quick_opts()).gamma_sq;
            EXPECT_GE(g, prev * (1.0 - 1e-4)) << spec.tag() << " L=" << L;
            prev = g;
        }
    }
}

TEST(Certificate, FieldsRecomputeFromInputs) {
    std::mt19937_64 rng(10);
    for (int v = 0; v < 3; ++v) {
        const auto inst = make_instance(50, 12, 2, 0.1, rng);
        const auto spec = v == 0 ? NormSpec::l1(12) : v == 1 ? NormSpec::sorted_l1(linear_sequence(1.0, 0.5, 12))
                                                              : NormSpec::wedge(12);
        const double lambda = theoretical_lambda(NormSpec::l1(12), 50, 0.05).lambda;
        const double delta = 0.5;
        SolverConfig sc;
        sc.lambda = lambda;
        const FitResult fr = fit(inst.problem, spec, sc);
        ASSERT_TRUE(fr.converged);
        const auto c = oracle_certificate(inst.problem, spec, inst.S0, inst.beta0, inst.beta0, inst.noise, lambda,
                                          delta, fr, quick_opts());
        const double en = norm_n(inst.noise);
        const auto& lv = c.levels;
        const ComplementNorm cn(spec, inst.S0);
        const double pred = (inst.problem.X() * (fr.beta_hat - inst.beta0)).squaredNorm() / 50.0;
        const double oS = norm_value(spec, restrict_to(fr.beta_hat, inst.S0) - inst.beta0);
        const double oSc = cn.value(gather(fr.beta_hat, cn.complement_set()));
        const double star = lambda * (1.0 - lv.lambda0 / lambda * (1.0 + 2.0 * lv.f)) / (lv.f + 2.0);
        const double lhs = pred + 2.0 * delta * en * ((star + lv.lambdaM) * oS + (star - lv.lambdaM) * oSc);
        EXPECT_NEAR(c.lhs, lhs, 1e-10 * (1.0 + lhs));
        EXPECT_NEAR(c.approximation, 0.0, 1e-15);
        if (c.lambda_star > lv.lambdaM) {
            const double k = (1.0 + delta) * (lambda * (1.0 + lv.f) + lv.lambdaM);
            EXPECT_NEAR(c.rhs, en * en * k * k * c.gamma_sq, 1e-10 * c.rhs);
            EXPECT_NEAR(substituted_rhs(c, 1.0, en * en), c.rhs, 1e-10 * c.rhs);
            EXPECT_NEAR(c.L_S,
                        (lambda * (1.0 + lv.f) + lv.lambdaM) / (star - lv.lambdaM) * (1.0 + delta) / (1.0 - delta),
                        1e-10 * c.L_S);
        } else {
            EXPECT_TRUE(std::isnan(c.L_S));
            EXPECT_FALSE(c.assumptions_ok);
        }
        EXPECT_NEAR(c.residual_ratio, fr.residual_norm_n / en, 1e-14);
        const double q = lv.lambdaM / lambda + lv.f + 1.0;
        EXPECT_NEAR(c.C1, (1.0 + delta) * (1.0 + delta) * en * en * q * q, 1e-10 * c.C1);
    }
}

TEST(Certificate, OracleInequalityOnSimulatedData) {
    std::mt19937_64 rng(11);
    int checked = 0;
    for (int rep = 0; rep < 25; ++rep) {
        const auto inst = make_instance(50, 10, 2, 0.05, rng);
        const auto spec = NormSpec::l1(10);
        const double lambda = theoretical_lambda(spec, 50, 0.05).lambda;
        const auto c = oracle_certificate(inst.problem, spec, inst.S0, inst.beta0, inst.beta0, inst.noise, lambda, 0.5,
                                          quick_opts());
        if (!c.assumptions_ok) continue;
        ++checked;
        EXPECT_LE(c.lhs, c.rhs);
        EXPECT_LE(c.prediction, c.rhs);
        EXPECT_LE(c.omega_S_error + c.omega_Sc_error, c.estimation_bound);
    }
    EXPECT_GT(checked, 10);
}

TEST(Certificate, RejectsBetaOutsideSet) {
    std::mt19937_64 rng(12);
    const auto inst = make_instance(20, 5, 2, 1.0, rng);
    EXPECT_THROW(oracle_certificate(inst.problem, NormSpec::l1(5), {0}, inst.beta0, inst.beta0, inst.noise, 0.5),
                 InvalidArgument);
    EXPECT_THROW(oracle_certificate(inst.problem, NormSpec::l1(5), {0, 1}, inst.beta0, inst.beta0, inst.noise, 0.5,
                                    1.0),
                 InvalidArgument);
}

TEST(Calibration, ExactGivesOneMinusAlpha) {
    for (double alpha : {0.01, 0.05, 0.1})
        for (std::size_t n : {50u, 100u, 1000u}) {
            const auto pb = calibrate(NormSpec::l1(20), n, alpha, Calibration::Exact);
            EXPECT_NEAR(probability_bound(pb, n), 1.0 - alpha, 1e-12);
        }
}

TEST(Calibration, BoxedGivesClosedForm) {
    for (double alpha : {0.01, 0.05, 0.1}) {
        const auto pb = calibrate(NormSpec::sorted_l1(linear_sequence(1.0, 0.1, 30)), 200, alpha);
        EXPECT_NEAR(pb.t, std::sqrt(std::log(4.0 / alpha)), 1e-15);
        EXPECT_NEAR(pb.Delta * pb.Delta, 1.0 - pb.t * std::sqrt(2.0 / 200.0), 1e-14);
        EXPECT_NEAR(probability_bound(pb, 200), 1.0 - alpha / 2.0 - std::sqrt(alpha), 1e-12);
    }
}

TEST(Calibration, LargeDLimitAndMonotonicity) {
    auto pb = calibrate(NormSpec::l1(20), 50, 0.1);
    const double limit = 1.0 - 2.0 * std::exp(-50.0 / 4.0 * std::pow(1.0 - pb.Delta * pb.Delta, 2));
    double prev = -1e300;
    for (double extra : {0.01, 0.1, 0.5, 1.0, 5.0, 50.0}) {
        pb.d = pb.EV_bound + extra;
        const double b = probability_bound(pb, 50);
        EXPECT_GE(b, prev);
        prev = b;
    }
    EXPECT_NEAR(prev, limit, 1e-12);
}

TEST(Calibration, RegimeViolations) {
    EXPECT_THROW(calibrate(NormSpec::l1(5), 2, 0.01), InvalidArgument);
    EXPECT_THROW(theoretical_lambda(NormSpec::l1(5), 2, 0.01), InvalidArgument);
    auto pb = calibrate(NormSpec::l1(5), 100, 0.05);
    EXPECT_THROW(proposition_bound(pb, 100), InvalidArgument);
    pb.d = pb.EV_bound * 0.5;
    EXPECT_THROW(probability_bound(pb, 100), InvalidArgument);
    EXPECT_THROW(calibrate(NormSpec::l1(5), 100, 1.5), InvalidArgument);
}

TEST(Calibration, MonteCarloCoverage) {
    std::mt19937_64 rng(13);
    const std::size_t n = 50, p = 20;
    const MatrixXd G = oracle::gaussian_matrix(n, p, rng);
    MatrixXd X = G;
    for (Eigen::Index j = 0; j < X.cols(); ++j) X.col(j) *= std::sqrt(double(n)) / X.col(j).norm();
    const auto pb = calibrate(NormSpec::l1(p), n, 0.1);
    int hits = 0;
    for (int k = 0; k < 500; ++k) {
        const VectorXd eps = oracle::gaussian_vector(n, rng);
        const double z = (X.transpose() * eps).cwiseAbs().maxCoeff() / (double(n) * norm_n(eps));
        hits += z <= pb.d;
    }
    EXPECT_GE(hits / 500.0, probability_bound(pb, n));
}

TEST(NoiseNorm, Limits) {
    const auto b = noise_norm_bound(2.0, 100, 0.0);
    EXPECT_DOUBLE_EQ(b.bound, 4.0);
    EXPECT_DOUBLE_EQ(b.probability, 0.0);
    EXPECT_DOUBLE_EQ(noise_norm_probability_c(100, 1.0), 0.0);
    EXPECT_THROW(noise_norm_probability_c(100, 0.5), InvalidArgument);
    EXPECT_GT(noise_norm_probability_c(100, 2.0), 0.9);
}

TEST(NoiseNorm, MonteCarloFloor) {
    std::mt19937_64 rng(14);
    const std::size_t n = 100;
    std::vector<double> norms;
    for (int k = 0; k < 10000; ++k) {
        const VectorXd e = oracle::gaussian_vector(n, rng);
        norms.push_back(e.squaredNorm() / double(n));
    }
    for (double x : {0.1, 0.3, 0.5}) {
        const auto b = noise_norm_bound(1.0, n, x);
        const double freq = std::count_if(norms.begin(), norms.end(), [&](double v) { return v <= b.bound; }) / 1e4;
        EXPECT_GE(freq, b.probability) << "x=" << x;
    }
    for (double C : {1.2, 1.5, 2.0}) {
        const double freq = std::count_if(norms.begin(), norms.end(), [&](double v) { return v <= C; }) / 1e4;
        EXPECT_GE(freq, noise_norm_probability_c(n, C)) << "C=" << C;
    }
}

TEST(TheoreticalLambda, SquareRootLassoArithmetic) {
    const double t = std::sqrt(std::log(80.0));
    const double Delta = std::sqrt(1.0 - t * std::sqrt(0.02));
    const double expect = std::sqrt(0.02) * (t / Delta + 2.0 + std::sqrt(std::log(500.0)));
    const auto tl = theoretical_lambda(NormSpec::l1(500), 100, 0.05);
    EXPECT_NEAR(tl.lambda, expect, 1e-14);
    EXPECT_NEAR(tl.t, t, 1e-15);
    EXPECT_NEAR(tl.Delta, Delta, 1e-15);
}

TEST(TheoreticalLambda, SingletonGroupsMatchLasso) {
    std::vector<IndexSet> groups;
    for (std::size_t j = 0; j < 40; ++j) groups.push_back({j});
    EXPECT_NEAR(theoretical_lambda(NormSpec::group(40, groups), 60, 0.05).lambda,
                theoretical_lambda(NormSpec::l1(40), 60, 0.05).lambda, 1e-14);
}

TEST(TheoreticalLambda, ConstantSortedSequence) {
    const std::size_t n = 80, p = 30;
    const auto tl = theoretical_lambda(NormSpec::sorted_l1(VectorXd::Ones(p)), n, 0.05);
    const double expect = std::sqrt(2.0 / n) * (tl.t / tl.Delta + (2.0 * std::sqrt(2.0) + 1.0) / std::sqrt(2.0) +
                                                std::sqrt(std::log(double(p))));
    EXPECT_NEAR(tl.lambda, expect, 1e-14);
}

TEST(TheoreticalLambda, SparseGroupAndStructured) {
    const auto sg = theoretical_lambda(NormSpec::sparse_group(12, 1.0, 1.0, contiguous_groups({4, 4, 4})), 100, 0.05);
    ASSERT_TRUE(sg.eta.has_value());
    EXPECT_NEAR(sg.lambda, theoretical_lambda(NormSpec::l1(12), 100, 0.05).lambda, 1e-14);
    EXPECT_NEAR(*sg.eta, std::sqrt(0.02) * (sg.t / sg.Delta + 2.0 + std::sqrt(std::log(3.0))), 1e-14);
    const auto w = theoretical_lambda(NormSpec::wedge(12), 100, 0.05);
    EXPECT_TRUE(w.fallback);
    const auto ws = theoretical_lambda(NormSpec::wedge(12), 100, 0.05, StructuredLambdaInputs{2.0, 12.0});
    EXPECT_FALSE(ws.fallback);
    EXPECT_NEAR(ws.lambda, std::sqrt(0.02) * (ws.t / ws.Delta + 2.0 * (2.0 + std::sqrt(std::log(12.0)))), 1e-14);
}

TEST(OraclePoint, ProjectionOfTruth) {
    std::mt19937_64 rng(15);
    const auto inst = make_instance(20, 8, 3, 1.0, rng);
    const auto [beta, deficient] = project_onto_support(inst.problem.X(), inst.beta0, inst.S0);
    EXPECT_FALSE(deficient);
    EXPECT_LT((beta - inst.beta0).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(OraclePoint, NestedCandidates) {
    std::mt19937_64 rng(16);
    const auto inst = make_instance(40, 8, 3, 1.0, rng);
    const auto spec = NormSpec::l1(8);
    SolverConfig sc;
    sc.lambda = 0.3;
    const FitResult fr = fit(inst.problem, spec, sc);
    const IndexSet S1{0, 1}, S2{0, 1, 2, 5};
    const auto c2 = oracle_certificate(inst.problem, spec, S2, project_onto_support(inst.problem.X(), inst.beta0, S2).first,
                                       inst.beta0, inst.noise, 0.3, 0.5, fr, quick_opts());
    const auto c1 = oracle_certificate(inst.problem, spec, S1, project_onto_support(inst.problem.X(), inst.beta0, S1).first,
                                       inst.beta0, inst.noise, 0.3, 0.5, fr, quick_opts());
    EXPECT_NEAR(c2.approximation, 0.0, 1e-20);
    EXPECT_GE(c1.approximation, 0.0);
    EXPECT_GT(c1.approximation, c2.approximation);
}

TEST(OraclePoint, ExhaustiveRecomputation) {
    std::mt19937_64 rng(17);
    const auto inst = make_instance(20, 8, 2, 0.05, rng);
    const auto spec = NormSpec::l1(8);
    const double lambda = theoretical_lambda(spec, 20, 0.1).lambda;
    SolverConfig sc;
    sc.lambda = lambda;
    const FitResult fr = fit(inst.problem, spec, sc);
    ASSERT_TRUE(fr.converged);
    const std::vector<IndexSet> cands{{0}, {0, 1}, {0, 1, 2}, {1, 3, 4}, {0, 1, 6, 7}};
    const auto best = best_oracle_point(inst.problem, spec, cands, inst.beta0, inst.noise, lambda, 0.5, fr, quick_opts());
    double min_rhs = std::numeric_limits<double>::infinity();
    IndexSet arg;
    for (const auto& S : cands) {
        const VectorXd b = project_onto_support(inst.problem.X(), inst.beta0, S).first;
        const auto c = oracle_certificate(inst.problem, spec, S, b, inst.beta0, inst.noise, lambda, 0.5, fr, quick_opts());
        if (!std::isnan(c.rhs) && c.rhs < min_rhs) {
            min_rhs = c.rhs;
            arg = S;
        }
    }
    ASSERT_TRUE(std::isfinite(min_rhs));
    EXPECT_EQ(best.S, arg);
    EXPECT_DOUBLE_EQ(best.certificate.rhs, min_rhs);
}
