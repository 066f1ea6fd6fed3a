#pragma once

#include <string>

#include <json.hpp>

#include "sqrtreg/model.hpp"
#include "sqrtreg/norms.hpp"
#include "sqrtreg/simbench.hpp"
#include "sqrtreg/solver.hpp"
#include "sqrtreg/theory.hpp"

namespace sqrtreg {

using nlohmann::json;

// Non-finite numbers are written as null and read back as NaN.
json number_json(double v);
double number_from(const json& j);

json vector_json(const VectorXd& v);
VectorXd vector_from(const json& j);
json index_set_json(const IndexSet& s);
IndexSet index_set_from(const json& j);

// {"n", "p", "X": [[row], ...], "Y": [...]}
json problem_json(const RegressionProblem& problem);
RegressionProblem problem_from(const json& j);
// X as an n x p CSV file without header, Y as a single-column CSV file.
RegressionProblem problem_from_csv(const std::string& x_path, const std::string& y_path);
MatrixXd read_csv_matrix(const std::string& path);
std::string matrix_csv(const MatrixXd& M);

// {"beta0", "sigma", "noise", "active_set"}
json truth_json(const GroundTruth& truth);
GroundTruth truth_from(const json& j);

// {"type": "l1" | "group" | "sorted_l1" | "sparse_group" | "structured", "dim", ...}
json norm_json(const NormSpec& spec);
NormSpec norm_from(const json& j);

json fit_json(const FitResult& fit);
FitResult fit_from(const json& j);

json levels_json(const EmpiricalLevels& lv);
EmpiricalLevels levels_from(const json& j);
json certificate_json(const OracleCertificate& cert);
OracleCertificate certificate_from(const json& j);

json simulation_config_json(const SimulationConfig& config);
SimulationConfig simulation_config_from(const json& j);
json report_json(const SimulationReport& report);
SimulationReport report_from(const json& j);
// Summary table as CSV (one row per method and lambda source) and as aligned text.
std::string report_csv(const SimulationReport& report);
std::string report_text(const SimulationReport& report);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sqrtreg
