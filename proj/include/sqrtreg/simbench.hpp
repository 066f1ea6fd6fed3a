#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqrtreg/model.hpp"
#include "sqrtreg/norms.hpp"
#include "sqrtreg/solver.hpp"

namespace sqrtreg {

enum class Scenario { Decreasing, DecreasingRandom, Grouped, GroupedRandom };

// "decreasing", "decreasing-random", "grouped", "grouped-random".
std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);
const std::array<Scenario, 4>& all_scenarios();

struct SimulationConfig {
    std::size_t n = 100;
    std::size_t p = 500;
    double rho = 0.9;
    double sigma = 1.0;
    int repetitions = 100;
    Scenario scenario = Scenario::Decreasing;
    std::uint64_t seed = 0;
    int cv_folds = 8;
    // Sorted-l1 weights for the srSLOPE penalty and the J_lambda metric; default linear 1 -> 0.1.
    std::optional<VectorXd> sorted_l1_seq;
    double alpha = 0.05;
    int cv_grid_size = 30;
    double cv_grid_low = 0.01;   // grid spans [low, high] x theoretical lambda
    double cv_grid_high = 2.0;
    bool run_cv = true;

    static SimulationConfig desk(Scenario s, std::uint64_t seed = 0);
    static SimulationConfig paper(Scenario s, std::uint64_t seed = 0);

    void validate() const;
    VectorXd slope_sequence() const;
};

// Toeplitz covariance rho^{|i-j|}.
MatrixXd toeplitz_covariance(std::size_t p, double rho);

// Design with i.i.d. N(0, Sigma) rows, drawn from the design stream of the seed.
MatrixXd generate_design(const SimulationConfig& config);

// beta0 and its support (in the order the values are assigned).
std::pair<VectorXd, IndexSet> true_coefficients(const SimulationConfig& config);

// Problem and truth for one repetition: the shared design plus fresh noise.
std::pair<RegressionProblem, GroundTruth> generate_problem(const SimulationConfig& config, int repetition = 0);
std::pair<RegressionProblem, GroundTruth> generate_problem(const SimulationConfig& config, const MatrixXd& X,
                                                           int repetition);

struct CvResult {
    double lambda = 0.0;
    std::vector<double> grid;      // deduplicated, ascending
    std::vector<double> cv_error;  // mean held-out squared error; NaN where excluded
    std::vector<int> invalid_cells;
};

CvResult cross_validate(const RegressionProblem& problem, const NormSpec& spec, std::vector<double> grid,
                        int folds, std::uint64_t seed, const SolverConfig& base = {});
double cross_validate_lambda(const RegressionProblem& problem, const NormSpec& spec,
                             const std::vector<double>& grid, int folds, std::uint64_t seed);

// count values spaced logarithmically over [low, high].
std::vector<double> log_grid(double low, double high, int count);

enum class Method { SrLasso, SrSlope };
enum class LambdaSource { Theoretical, CrossValidated };
std::string method_name(Method m);
std::string source_name(LambdaSource s);

struct FitRecord {
    Method method = Method::SrLasso;
    LambdaSource source = LambdaSource::Theoretical;
    int repetition = 0;
    double lambda = 0.0;
    double l1_error = 0.0;
    double sorted_l1_error = 0.0;
    double prediction_l2 = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
    int outer_iters = 0;
    int inner_iters = 0;
    std::string error;  // empty unless the fit failed; kind of the failure otherwise
    std::string message;
    bool valid() const { return error.empty() && converged; }
};

struct SummaryCell {
    Method method = Method::SrLasso;
    LambdaSource source = LambdaSource::Theoretical;
    double mean_l1_error = 0.0;
    double mean_sorted_l1_error = 0.0;
    double mean_prediction_l2 = 0.0;
    int valid = 0;
    int flagged = 0;
};

struct SimulationReport {
    SimulationConfig config;
    double theoretical_lambda_lasso = 0.0;
    double theoretical_lambda_slope = 0.0;
    std::vector<FitRecord> records;
    std::vector<SummaryCell> summary;

    const SummaryCell& cell(Method m, LambdaSource s) const;
};

std::vector<SummaryCell> summarize(const std::vector<FitRecord>& records);

SimulationReport run_study(const SimulationConfig& config);

}  // namespace sqrtreg
