#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "sqrtreg/cli.hpp"
#include "sqrtreg/io.hpp"
#include "sqrtreg/simbench.hpp"
#include "sqrtreg/solver.hpp"
#include "sqrtreg/theory.hpp"

using namespace sqrtreg;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

struct Instance {
    RegressionProblem problem;
    VectorXd beta0;
    VectorXd noise;
    IndexSet S0;
};

// Gaussian design, k-sparse truth on the first k coordinates, standard normal noise.
Instance make_instance(std::size_t n, std::size_t p, std::size_t k, double scale, std::mt19937_64& rng) {
    const MatrixXd X = oracle::gaussian_matrix(n, p, rng);
    VectorXd b0 = VectorXd::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < k; ++j) b0[static_cast<Eigen::Index>(j)] = scale * (1.0 + 0.5 * static_cast<double>(j));
    const VectorXd eps = oracle::gaussian_vector(n, rng);
    IndexSet S0(k);
    std::iota(S0.begin(), S0.end(), 0);
    return {RegressionProblem(X, X * b0 + eps), b0, eps, S0};
}

Outcome kkt_certification() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> frac(0.4, 0.9);
    const std::size_t ns[] = {20, 50};
    const std::size_t ps[] = {10, 40, 100};
    int converged = 0, failed = 0, bad = 0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = ns[i % 2], p = ps[(i / 2) % 3];
        const int variant = i % 5;
        const NormSpec spec = oracle::random_spec(variant, p, rng);
        const MatrixXd X = oracle::gaussian_matrix(n, p, rng);
        const VectorXd b = oracle::sparse_vector(p, 3, 1.0, rng);
        const RegressionProblem pr(X, X * b + oracle::gaussian_vector(n, rng));
        SolverConfig sc;
        sc.lambda = frac(rng) * oracle::lambda_max(pr, spec);
        try {
            const FitResult fr = fit(pr, spec, sc);
            if (!fr.converged) {
                ++failed;
                continue;
            }
            ++converged;
            const double r = check_kkt(pr, spec, fr.beta_hat, sc.lambda);
            worst = std::max(worst, r);
            if (!(r <= 1e-6)) ++bad;
        } catch (const Error&) {
            ++failed;
        }
    }
    return {bad == 0 && converged > 0, "100 instances, " + std::to_string(converged) + " converged, " +
                                            std::to_string(failed) + " not converged, max KKT residual " + fmt(worst)};
}

Outcome prox_oracle() {
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> step(0.05, 2.0);
    double worst = 0.0;
    int bad = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t p = 1 + static_cast<std::size_t>(i % 6);
        const NormSpec spec = oracle::random_spec(i % 4, p, rng);
        const VectorXd x = 2.0 * oracle::gaussian_vector(p, rng);
        const double s = step(rng);
        const double ours = oracle::prox_objective(spec, x, s, prox(spec, x, s));
        const double ref = oracle::numeric_prox(spec, x, s).value;
        worst = std::max(worst, std::abs(ours - ref));
        if (!(std::abs(ours - ref) <= 1e-5)) ++bad;
    }
    return {bad == 0, "200 cases, max objective gap " + fmt(worst)};
}

Outcome slope_dual() {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> U(0.1, 2.0);
    double worst_gap = 0.0, worst_violation = -1e300;
    for (int i = 0; i < 50; ++i) {
        const std::size_t p = 1 + static_cast<std::size_t>(i % 4);
        VectorXd lam(static_cast<Eigen::Index>(p));
        for (Eigen::Index k = 0; k < lam.size(); ++k) lam[k] = U(rng);
        std::sort(lam.data(), lam.data() + lam.size(), std::greater<>());
        const NormSpec spec = NormSpec::sorted_l1(lam);
        const VectorXd z = oracle::gaussian_vector(p, rng);
        const double d = dual_norm(spec, z);
        for (int k = 0; k < 10000 / 50; ++k) {
            VectorXd b = oracle::gaussian_vector(p, rng);
            b /= norm_value(spec, b);
            worst_violation = std::max(worst_violation, z.dot(b) - d);
        }
        worst_gap = std::max(worst_gap, std::abs(d - oracle::numeric_dual(spec, z)));
    }
    return {worst_violation <= 1e-12 && worst_gap <= 1e-4,
            "10000 unit-ball points, max z'b - dual " + fmt(worst_violation) + "; 50 z, max gap to numeric max " +
                fmt(worst_gap)};
}

Outcome decomposability() {
    std::mt19937_64 rng(104);
    double worst = 0.0;
    for (int variant = 0; variant < 6; ++variant) {
        for (int rep = 0; rep < 1000; ++rep) {
            const std::size_t p = 2 + static_cast<std::size_t>(rep % 7);
            NormSpec spec = oracle::random_spec(std::min(variant, 4), p, rng);
            if (variant == 4) spec = NormSpec::wedge(p);
            if (variant == 5) {
                const VectorXd lo = VectorXd::Constant(static_cast<Eigen::Index>(p), 0.5) +
                                    0.5 * oracle::gaussian_vector(p, rng).cwiseAbs().cwiseMin(1.0);
                spec = NormSpec::box(lo, lo * 2.0);
            }
            const IndexSet S = oracle::random_allowed_set(spec, rng);
            const ComplementNorm cn(spec, S);
            const VectorXd b = oracle::gaussian_vector(p, rng);
            worst = std::min(worst, norm_value(spec, b) - norm_value(spec, restrict_to(b, S)) -
                                        cn.value(gather(b, cn.complement_set())));
        }
    }
    double rearr = 0.0;
    for (std::size_t p = 1; p <= 7; ++p)
        for (int rep = 0; rep < 10; ++rep) {
            VectorXd lam = oracle::gaussian_vector(p, rng).cwiseAbs().array() + 0.01;
            std::sort(lam.data(), lam.data() + lam.size(), std::greater<>());
            const VectorXd b = oracle::gaussian_vector(p, rng);
            rearr = std::max(rearr, std::abs(norm_value(NormSpec::sorted_l1(lam), b) -
                                             oracle::max_over_permutations(lam, b)));
        }
    return {worst >= -1e-10 && rearr <= 1e-12,
            "6 norms x 1000 cases, min slack " + fmt(worst) + "; permutations p<=7, max gap " + fmt(rearr)};
}

Outcome fixed_point() {
    std::mt19937_64 rng(105);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 30 + static_cast<std::size_t>(i % 3) * 10;
        const std::size_t p = 10 + static_cast<std::size_t>(i % 5) * 10;
        const auto inst = make_instance(n, p, 3, 1.0, rng);
        const double lambda = (0.3 + 0.1 * (i % 6)) * oracle::lambda_max(inst.problem, NormSpec::l1(p));
        worst = std::max(worst, fixed_point_check(inst.problem, lambda));
    }
    return {worst <= 1e-6, "50 instances, max discrepancy " + fmt(worst)};
}

Outcome residual_sandwich() {
    std::mt19937_64 rng(106);
    int cases = 0, bad = 0, attempts = 0;
    double min_low = 1e300, min_high = 1e300;
    while (cases < 200 && attempts < 2000) {
        ++attempts;
        const std::size_t p = attempts % 2 ? 20 : 40;
        const auto inst = make_instance(50, p, 3, 0.2, rng);
        const NormSpec spec = attempts % 3 == 0 ? NormSpec::sorted_l1(linear_sequence(1.0, 0.5, p))
                                                : NormSpec::l1(p);
        const double lambda = theoretical_lambda(spec, 50, 0.05).lambda * (0.5 + 0.1 * (attempts % 6));
        const auto lv = empirical_levels(inst.problem, spec, inst.S0, inst.beta0, inst.noise, lambda);
        if (!(lv.lambda0 / lambda * (1.0 + 2.0 * lv.f) < 1.0)) continue;
        SolverConfig sc;
        sc.lambda = lambda;
        const FitResult fr = fit(inst.problem, spec, sc);
        if (!fr.converged) continue;
        ++cases;
        const double ratio = fr.residual_norm_n / norm_n(inst.noise);
        const double low = (1.0 - lv.lambda0 / lambda * (1.0 + 2.0 * lv.f)) / (lv.f + 2.0);
        const double high = 1.0 + lv.f;
        min_low = std::min(min_low, ratio - low);
        min_high = std::min(min_high, high - ratio);
        if (!(low <= ratio && ratio <= high)) ++bad;
    }
    return {cases >= 200 && bad == 0, std::to_string(cases) + " cases with Assumption I, " + std::to_string(bad) +
                                          " outside; min margins " + fmt(min_low) + " (lower), " + fmt(min_high) +
                                          " (upper)"};
}

Outcome oracle_inequality() {
    std::mt19937_64 rng(107);
    EffectiveSparsityOptions opts;
    opts.restarts = 10;
    opts.dense_search = true;
    opts.dense_max_dim = 40;
    opts.dense_samples = 20000;
    int ok = 0, bad = 0, attempts = 0;
    double worst = -1e300;
    while (ok < 200 && attempts < 1000) {
        ++attempts;
        const std::size_t p = attempts % 2 ? 20 : 40;
        const auto inst = make_instance(50, p, 2, 0.05, rng);
        const NormSpec spec = NormSpec::l1(p);
        const double lambda = theoretical_lambda(spec, 50, 0.05).lambda;
        const auto c = oracle_certificate(inst.problem, spec, inst.S0, inst.beta0, inst.beta0, inst.noise, lambda,
                                          0.5, opts);
        if (!c.assumptions_ok) continue;
        ++ok;
        worst = std::max(worst, c.lhs - c.rhs);
        if (!(c.lhs <= c.rhs)) ++bad;
    }
    return {ok >= 200 && bad == 0, std::to_string(ok) + " instances with assumptions met (" +
                                       std::to_string(attempts) + " drawn), " + std::to_string(bad) +
                                       " violations, max lhs - rhs " + fmt(worst)};
}

Outcome coverage() {
    std::mt19937_64 rng(108);
    const std::size_t n = 50, p = 20;
    MatrixXd X = oracle::gaussian_matrix(n, p, rng);
    for (Eigen::Index j = 0; j < X.cols(); ++j) X.col(j) *= std::sqrt(double(n)) / X.col(j).norm();
    const double alpha = 0.1;
    const auto pb = calibrate(NormSpec::l1(p), n, alpha);
    int hits = 0;
    for (int k = 0; k < 500; ++k) {
        const VectorXd eps = oracle::gaussian_vector(n, rng);
        hits += (X.transpose() * eps).cwiseAbs().maxCoeff() / (double(n) * norm_n(eps)) <= pb.d;
    }
    const double freq = hits / 500.0;
    return {freq >= 1.0 - alpha, "frequency " + fmt(freq) + " over 500 draws, d = " + fmt(pb.d)};
}

Outcome directional() {
    bool pass = true;
    std::string detail;
    for (Scenario s : {Scenario::Grouped, Scenario::GroupedRandom}) {
        const auto rep = run_study(SimulationConfig::desk(s, 2024));
        for (LambdaSource src : {LambdaSource::Theoretical, LambdaSource::CrossValidated}) {
            const double lasso = rep.cell(Method::SrLasso, src).mean_prediction_l2;
            const double slope = rep.cell(Method::SrSlope, src).mean_prediction_l2;
            const bool ok = slope < lasso;
            pass = pass && ok;
            detail += (detail.empty() ? "" : "; ") + scenario_name(s) + "/" + source_name(src) + " srSLOPE " +
                      fmt(slope) + (ok ? " < " : " >= ") + "srLASSO " + fmt(lasso);
        }
    }
    return {pass, detail};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string out = (dir / "sqrtreg_acceptance_sim.json").string();
    std::string first[3];
    bool same = true;
    for (int round = 0; round < 2; ++round) {
        std::ostringstream o, e;
        const std::vector<std::string> args{"sqrtreg", "--seed", "7", "--out", out, "simulate", "--scenario",
                                            "all", "--repetitions", "1"};
        if (dispatch(args, o, e) != kExitOk) return {false, "simulate failed: " + e.str()};
        int k = 0;
        for (const auto* ext : {".json", ".csv", ".txt"}) {
            const std::string body = slurp((dir / (std::string("sqrtreg_acceptance_sim") + ext)).string());
            if (round == 0)
                first[k] = body;
            else
                same = same && body == first[k] && !body.empty();
            ++k;
        }
    }
    for (const auto* ext : {".json", ".csv", ".txt"})
        std::remove((dir / (std::string("sqrtreg_acceptance_sim") + ext)).string().c_str());
    return {same, "two runs of simulate (all scenarios, 1 repetition): JSON, CSV and text reports " +
                      std::string(same ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"KKT certification", kkt_certification},
        {"prox matches numeric minimization", prox_oracle},
        {"sorted-l1 dual norm", slope_dual},
        {"weak decomposability and rearrangement", decomposability},
        {"fixed-point relation", fixed_point},
        {"residual sandwich", residual_sandwich},
        {"sharp oracle inequality", oracle_inequality},
        {"noise event coverage", coverage},
        {"srSLOPE beats srLASSO in grouped scenarios", directional},
        {"simulate determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail
                  << " [" << fmt(secs) << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
