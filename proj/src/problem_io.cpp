#include "kyp/problem_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace kyp {

using nlohmann::json;

LoadError::LoadError(const std::string& source, const std::string& location,
                     const std::string& what)
    : KypError(source + ":" + location + ": " + what), location_(location) {}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path, "0:0", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw KypError("cannot write " + path);
  out << text << '\n';
  if (!out) throw KypError("write failed: " + path);
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is one past the offending character
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    if (pos != std::string::npos) msg = msg.substr(pos);
    throw LoadError(source, line_col(text, at), msg);
  }
}

// Schema reader that remembers the JSON path for error messages.
struct Reader {
  std::string source;

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw LoadError(source, path, what);
  }

  const json& field(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing field");
    return *it;
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  // Reports may carry non-finite values, which the JSON writer stores as null.
  double number_or_nan(const json& j, const std::string& path) const {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return number(j, path);
  }

  int integer(const json& j, const std::string& path) const {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
    return j.get<int>();
  }

  Matrix matrix(const json& j, const std::string& path, int rows, int cols) const {
    if (!j.is_array()) fail(path, "expected a row-major nested array");
    if (static_cast<int>(j.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
    }
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i) {
      const json& row = j[static_cast<std::size_t>(i)];
      const std::string rp = path + "[" + std::to_string(i) + "]";
      if (!row.is_array() || static_cast<int>(row.size()) != cols) {
        fail(rp, "expected a row of " + std::to_string(cols) + " numbers");
      }
      for (int k = 0; k < cols; ++k) {
        M(i, k) = number(row[static_cast<std::size_t>(k)], rp + "[" + std::to_string(k) + "]");
      }
    }
    return M;
  }

  Vector vector(const json& j, const std::string& path, int size) const {
    if (!j.is_array() || static_cast<int>(j.size()) != size) {
      fail(path, "expected an array of " + std::to_string(size) + " numbers");
    }
    Vector v(size);
    for (int i = 0; i < size; ++i) {
      v(i) = number(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
    }
    return v;
  }

  AffineMatrixFamily family(const json& root, const std::string& name, int rows, int cols, int p,
                            bool symmetric) const {
    const json& f = field(root, name, "");
    const Matrix base = matrix(field(f, "base", name), name + ".base", rows, cols);
    const json& cs = field(f, "coeffs", name);
    if (!cs.is_array() || static_cast<int>(cs.size()) != p) {
      fail(name + ".coeffs", "expected " + std::to_string(p) + " coefficient matrices");
    }
    std::vector<Matrix> coeffs;
    coeffs.reserve(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) {
      coeffs.push_back(matrix(cs[static_cast<std::size_t>(i)],
                              name + ".coeffs[" + std::to_string(i) + "]", rows, cols));
    }
    return AffineMatrixFamily(base, std::move(coeffs), symmetric);
  }
};

void check_version(const Reader& rd, const json& root) {
  const json& v = rd.field(root, "schema_version", "");
  if (!v.is_string() || v.get<std::string>() != kSchemaVersion) {
    rd.fail("schema_version", std::string("unsupported schema version, expected \"") +
                                  kSchemaVersion + "\"");
  }
}

json family_to_json(const AffineMatrixFamily& f) {
  json coeffs = json::array();
  for (const Matrix& C : f.coeffs()) coeffs.push_back(matrix_to_json(C));
  return {{"base", matrix_to_json(f.base())}, {"coeffs", coeffs}};
}

}  // namespace

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ProblemFile parse_problem(const std::string& text, const std::string& source) {
  const json root = parse_json(text, source);
  const Reader rd{source};
  if (!root.is_object()) rd.fail("$", "expected a JSON object");
  check_version(rd, root);

  const json& dims = rd.field(root, "dims", "");
  const int n = rd.integer(rd.field(dims, "n", "dims"), "dims.n");
  const int m = rd.integer(rd.field(dims, "m", "dims"), "dims.m");
  const int p = rd.integer(rd.field(dims, "p", "dims"), "dims.p");
  const int r = rd.integer(rd.field(dims, "r", "dims"), "dims.r");

  ProblemFile out;
  KypProblem& prob = out.problem;
  prob.A = rd.matrix(rd.field(root, "A", ""), "A", n, n);
  prob.B = rd.matrix(rd.field(root, "B", ""), "B", n, m);
  prob.c = rd.vector(rd.field(root, "c", ""), "c", p);
  prob.Sigma = rd.matrix(rd.field(root, "Sigma", ""), "Sigma", n, n);
  prob.Q = rd.family(root, "Q", n, n, p, true);
  prob.S = rd.family(root, "S", n, m, p, false);
  prob.R = rd.family(root, "R", m, m, p, true);
  prob.N = rd.family(root, "N", r, r, p, true);

  if (auto it = root.find("initial_lambda"); it != root.end() && !it->is_null()) {
    out.initial_lambda = rd.vector(*it, "initial_lambda", p);
  }
  if (auto it = root.find("metadata"); it != root.end()) out.metadata = *it;
  return out;
}

ProblemFile load_problem(const std::string& path) { return parse_problem(read_file(path), path); }

json problem_to_json(const ProblemFile& file) {
  const KypProblem& prob = file.problem;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["dims"] = {{"n", prob.n()}, {"m", prob.m()}, {"p", prob.p()}, {"r", prob.r()}};
  j["A"] = matrix_to_json(prob.A);
  j["B"] = matrix_to_json(prob.B);
  j["c"] = vector_to_json(prob.c);
  j["Sigma"] = matrix_to_json(prob.Sigma);
  j["Q"] = family_to_json(prob.Q);
  j["S"] = family_to_json(prob.S);
  j["R"] = family_to_json(prob.R);
  j["N"] = family_to_json(prob.N);
  if (file.initial_lambda) j["initial_lambda"] = vector_to_json(*file.initial_lambda);
  if (!file.metadata.empty()) j["metadata"] = file.metadata;
  return j;
}

void save_problem(const std::string& path, const ProblemFile& file) {
  write_file(path, problem_to_json(file).dump(2));
}

ReportFile make_report(const SolveReport& rep, const SolverConfig& cfg) {
  ReportFile out;
  out.status = to_string(rep.status);
  out.lambda_opt = rep.lambda_opt;
  out.objective = rep.objective;
  out.P_plus = rep.P_plus_opt;
  out.newton_iters = rep.newton_iters_total;
  out.riccati_solves = rep.riccati_solves;
  out.lyapunov_solves = rep.lyapunov_solves;
  out.seconds = rep.seconds;
  out.stages = rep.history;
  out.config = {{"t0", cfg.t0 ? json(*cfg.t0) : json(nullptr)},
                {"t_max", cfg.t_max},
                {"t_factor", cfg.t_factor},
                {"newton_tol", cfg.newton_tol},
                {"max_newton_iters", cfg.max_newton_iters},
                {"hessian", cfg.hessian == HessianForm::exact ? "exact" : "doubled_quadratic"},
                {"exec", to_string(cfg.exec)}};
  if (!rep.message.empty()) out.extra["message"] = rep.message;
  return out;
}

json report_to_json(const ReportFile& rep) {
  json stages = json::array();
  for (const StageRecord& s : rep.stages) {
    stages.push_back({{"t", s.t},
                      {"newton_iters", s.newton_iters},
                      {"decrement", s.decrement},
                      {"objective", s.objective},
                      {"seconds", s.seconds},
                      {"roundoff_stall", s.roundoff_stall}});
  }
  json j;
  j["schema_version"] = kSchemaVersion;
  j["status"] = rep.status;
  j["lambda_opt"] = vector_to_json(rep.lambda_opt);
  j["objective"] = rep.objective;
  j["P_plus"] = matrix_to_json(rep.P_plus);
  j["counters"] = {{"newton_iters", rep.newton_iters},
                   {"riccati_solves", rep.riccati_solves},
                   {"lyapunov_solves", rep.lyapunov_solves}};
  j["timings"] = {{"total_seconds", rep.seconds}, {"stages", stages}};
  j["config"] = rep.config;
  if (!rep.extra.empty()) j["extra"] = rep.extra;
  return j;
}

ReportFile report_from_json(const json& j, const std::string& source) {
  const Reader rd{source};
  check_version(rd, j);
  ReportFile out;
  const json& st = rd.field(j, "status", "");
  if (!st.is_string()) rd.fail("status", "expected a string");
  out.status = st.get<std::string>();

  const json& lam = rd.field(j, "lambda_opt", "");
  out.lambda_opt = rd.vector(lam, "lambda_opt", lam.is_array() ? static_cast<int>(lam.size()) : 0);
  out.objective = rd.number_or_nan(rd.field(j, "objective", ""), "objective");
  const json& P = rd.field(j, "P_plus", "");
  const int n = P.is_array() ? static_cast<int>(P.size()) : 0;
  out.P_plus = rd.matrix(P, "P_plus", n, n);

  const json& cnt = rd.field(j, "counters", "");
  out.newton_iters = rd.integer(rd.field(cnt, "newton_iters", "counters"), "counters.newton_iters");
  out.riccati_solves =
      rd.integer(rd.field(cnt, "riccati_solves", "counters"), "counters.riccati_solves");
  out.lyapunov_solves =
      rd.integer(rd.field(cnt, "lyapunov_solves", "counters"), "counters.lyapunov_solves");

  const json& tm = rd.field(j, "timings", "");
  out.seconds = rd.number(rd.field(tm, "total_seconds", "timings"), "timings.total_seconds");
  const json& stages = rd.field(tm, "stages", "timings");
  if (!stages.is_array()) rd.fail("timings.stages", "expected an array");
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const std::string sp = "timings.stages[" + std::to_string(k) + "]";
    const json& s = stages[k];
    StageRecord rec;
    rec.t = rd.number(rd.field(s, "t", sp), sp + ".t");
    rec.newton_iters = rd.integer(rd.field(s, "newton_iters", sp), sp + ".newton_iters");
    rec.decrement = rd.number_or_nan(rd.field(s, "decrement", sp), sp + ".decrement");
    rec.objective = rd.number_or_nan(rd.field(s, "objective", sp), sp + ".objective");
    rec.seconds = rd.number(rd.field(s, "seconds", sp), sp + ".seconds");
    rec.roundoff_stall = s.value("roundoff_stall", false);
    out.stages.push_back(rec);
  }
  out.config = j.value("config", json::object());
  out.extra = j.value("extra", json::object());
  return out;
}

ReportFile load_report(const std::string& path) {
  const std::string text = read_file(path);
  return report_from_json(parse_json(text, path), path);
}

void save_report(const std::string& path, const ReportFile& rep) {
  write_file(path, report_to_json(rep).dump(2));
}

PlantFile load_plant(const std::string& path) {
  const std::string text = read_file(path);
  const json root = parse_json(text, path);
  const Reader rd{path};
  if (!root.is_object()) rd.fail("$", "expected a JSON object");
  check_version(rd, root);
  const json& A = rd.field(root, "A", "");
  const int n = A.is_array() ? static_cast<int>(A.size()) : 0;
  PlantFile out;
  out.A = rd.matrix(A, "A", n, n);
  const json& B1 = rd.field(root, "B1", "");
  const int m = (B1.is_array() && !B1.empty() && B1[0].is_array()) ? static_cast<int>(B1[0].size()) : 0;
  out.B1 = rd.matrix(B1, "B1", n, m);
  return out;
}

}  // namespace kyp
