#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "kyp/barrier_ipm.hpp"
#include "kyp/core_model.hpp"
#include "kyp/errors.hpp"

namespace kyp {

/// Malformed input file. `location()` is "line:col" for syntax errors and a
/// JSON path such as "Q.coeffs[1]" for schema errors.
class LoadError : public KypError {
 public:
  LoadError(const std::string& source, const std::string& location, const std::string& what);
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

inline constexpr const char* kSchemaVersion = "1";

struct ProblemFile {
  KypProblem problem;
  std::optional<Vector> initial_lambda;
  nlohmann::json metadata = nlohmann::json::object();
};

ProblemFile parse_problem(const std::string& text, const std::string& source = "<string>");
ProblemFile load_problem(const std::string& path);
nlohmann::json problem_to_json(const ProblemFile& file);
void save_problem(const std::string& path, const ProblemFile& file);

struct ReportFile {
  std::string status;
  Vector lambda_opt;
  double objective = 0.0;
  Matrix P_plus;
  long newton_iters = 0;
  long riccati_solves = 0;
  long lyapunov_solves = 0;
  double seconds = 0.0;
  std::vector<StageRecord> stages;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();  // margins, certificates
};

ReportFile make_report(const SolveReport& rep, const SolverConfig& cfg);
nlohmann::json report_to_json(const ReportFile& rep);
ReportFile report_from_json(const nlohmann::json& j, const std::string& source = "<report>");
ReportFile load_report(const std::string& path);
void save_report(const std::string& path, const ReportFile& rep);

/// Plant file: {"schema_version": "1", "A": [[...]], "B1": [[...]]}.
struct PlantFile {
  Matrix A;
  Matrix B1;
};

PlantFile load_plant(const std::string& path);

nlohmann::json matrix_to_json(const Matrix& M);
nlohmann::json vector_to_json(const Vector& v);

}  // namespace kyp
