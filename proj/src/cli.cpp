#include "kyp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kyp/problem_io.hpp"
#include "kyp/synthesis.hpp"
#include "kyp/verification.hpp"

namespace kyp::cli {

namespace {

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::setprecision(10) << x;
  return ss.str();
}

std::string fmt(const Vector& v) {
  std::ostringstream ss;
  ss << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) ss << (i ? ", " : "") << fmt(v(i));
  ss << ']';
  return ss.str();
}

void print_findings(const ValidationReport& rep, std::ostream& out) {
  for (const Finding& f : rep.findings) {
    out << to_string(f.severity) << " [" << f.code << "] " << f.message << '\n';
  }
}

// Margins at the solution, printed after solve and synth and stored in the
// report's "extra" block.
nlohmann::json solution_margins(const KypProblem& prob, const SolveReport& rep, std::ostream& out) {
  nlohmann::json j;
  try {
    const FeasibilityMargins fm = feasibility_margins(prob, rep.lambda_opt);
    const double lmi = check_kyp_lmi(prob, rep.lambda_opt, rep.P_plus_opt);
    out << "margins: -R " << fmt(fm.neg_R) << ", N " << fmt(fm.N) << ", P+ " << fmt(fm.P_plus)
        << ", Delta " << fmt(fm.Delta) << ", lmi(P+) " << fmt(lmi) << '\n';
    j = {{"neg_R", fm.neg_R}, {"N", fm.N}, {"P_plus", fm.P_plus}, {"Delta", fm.Delta},
         {"lmi_at_P_plus", lmi}};
  } catch (const KypError& e) {
    out << "margins unavailable: " << e.what() << '\n';
  }
  return j;
}

void apply_flags(SolverConfig& cfg, const std::optional<double>& t0, double t_max, double t_factor,
                 double newton_tol) {
  cfg.t0 = t0;
  cfg.t_max = t_max;
  cfg.t_factor = t_factor;
  cfg.newton_tol = newton_tol;
}

int report_pipeline(const KypProblem& prob, const Pipeline& pl, const SolverConfig& cfg,
                    const std::string& report_path, std::ostream& out, std::ostream& err,
                    nlohmann::json extra = nlohmann::json::object()) {
  ReportFile rf;
  if (pl.exit_code == kInfeasible) {
    rf = make_report(pl.phase1.report, cfg);
    rf.status = to_string(SolveStatus::infeasible);
    extra["lambda0"] = pl.phase1.lambda0;
    out << "status: infeasible\n";
    out << "certificate: lambda0 = " << fmt(pl.phase1.lambda0) << " (>= 0)\n";
  } else if (pl.ran_phase1 && !pl.phase1.feasible) {
    rf = make_report(pl.phase1.report, cfg);
    err << "error: phase I failed: " << pl.phase1.report.message << '\n';
  } else {
    rf = make_report(pl.report, cfg);
    out << "status: " << to_string(pl.report.status) << '\n';
    if (pl.report.status == SolveStatus::optimal) {
      out << "objective: " << fmt(pl.report.objective) << '\n';
      out << "lambda: " << fmt(pl.report.lambda_opt) << '\n';
      out << "newton iterations: " << pl.report.newton_iters_total
          << ", riccati solves: " << pl.report.riccati_solves
          << ", lyapunov solves: " << pl.report.lyapunov_solves << '\n';
      extra["margins"] = solution_margins(prob, pl.report, out);
    } else {
      err << "error: " << pl.report.message << '\n';
    }
  }
  if (pl.ran_phase1) extra["phase1_lambda0"] = pl.phase1.lambda0;
  rf.extra.update(extra);
  if (!report_path.empty()) {
    save_report(report_path, rf);
    out << "report: " << report_path << '\n';
  }
  return pl.exit_code;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  ProblemFile file;
  try {
    file = load_problem(path);
  } catch (const KypError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
  const ValidationReport rep = validate_problem(file.problem);
  print_findings(rep, out);
  const KypProblem& p = file.problem;
  out << (rep.ok() ? "ok" : "invalid") << ": n=" << p.n() << " m=" << p.m() << " p=" << p.p()
      << " r=" << p.r() << '\n';
  return rep.ok() ? kOk : kInvalid;
}

int cmd_solve(const std::string& path, const SolverConfig& cfg, const std::string& report_path,
              std::ostream& out, std::ostream& err) {
  ProblemFile file;
  try {
    file = load_problem(path);
  } catch (const KypError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
  const ValidationReport vr = validate_problem(file.problem);
  if (!vr.ok()) {
    print_findings(vr, err);
    return kInvalid;
  }
  try {
    const Pipeline pl = solve_pipeline(file.problem, file.initial_lambda, cfg);
    return report_pipeline(file.problem, pl, cfg, report_path, out, err);
  } catch (const KypError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

int cmd_synth(std::optional<int> chain, const std::string& plant_path, double gamma,
              const std::string& prefix, const SolverConfig& cfg, std::ostream& out,
              std::ostream& err) {
  Matrix A, B1;
  nlohmann::json meta;
  try {
    if (chain) {
      const ChainPlant cp = generate_mass_spring_chain(*chain);
      A = cp.A;
      B1 = cp.B1;
      meta["plant"] = "mass_spring_chain";
      meta["masses"] = *chain;
    } else {
      const PlantFile pf = load_plant(plant_path);
      A = pf.A;
      B1 = pf.B1;
      meta["plant"] = plant_path;
    }
  } catch (const KypError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
  meta["gamma"] = gamma;
  meta["uncertainty"] = "multiplicative_actuator";

  SynthesisSpec spec;
  ProblemFile file;
  try {
    spec = build_actuator_uncertainty(A, B1, gamma);
    file.problem = assemble_kyp_sdp(spec);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
  file.metadata = meta;
  const ValidationReport vr = validate_problem(file.problem);
  if (!vr.ok()) {
    print_findings(vr, err);
    return kInvalid;
  }
  const std::string problem_path = prefix + ".problem.json";
  const std::string report_path = prefix + ".report.json";
  try {
    save_problem(problem_path, file);
  } catch (const KypError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
  out << "problem: " << problem_path << " (n=" << file.problem.n() << ", p=" << file.problem.p()
      << ")\n";

  try {
    Pipeline pl = solve_pipeline(file.problem, std::nullopt, cfg);
    nlohmann::json extra;
    if (pl.exit_code == kOk) {
      const Vector& lam = pl.report.lambda_opt;
      const FrequencyReport fr = check_frequency_domain(file.problem, lam, log_frequency_grid(),
                                                        true, cfg.exec);
      const MultiplierCheck mc = check_multiplier_conditions(spec, lam);
      out << "frequency margin: " << fmt(fr.margin) << " over " << fr.evaluated << " points ("
          << fr.skipped << " skipped)\n";
      out << "multiplier margins: outer " << fmt(mc.outer_margin) << ", M22 " << fmt(mc.m22_margin)
          << '\n';
      extra["frequency_margin"] = fr.margin;
      extra["frequency_points"] = fr.evaluated;
      extra["frequency_skipped"] = fr.skipped;
      extra["multiplier_outer_margin"] = mc.outer_margin;
      extra["multiplier_m22_margin"] = mc.m22_margin;
      if (!(fr.margin > 0.0)) {
        err << "error: solution fails the sampled frequency-domain check\n";
        pl.exit_code = kNumerical;
      }
    }
    return report_pipeline(file.problem, pl, cfg, report_path, out, err, extra);
  } catch (const KypError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

int cmd_bench(const BenchOptions& opts, const std::string& csv_path, std::ostream& out,
              std::ostream& err) {
  for (int n : opts.sizes) {
    if (n < 2 || n % 2 != 0) {
      err << "error: bench sizes must be even state dimensions >= 2, got " << n << '\n';
      return kInvalid;
    }
  }
  std::vector<BenchRow> rows;
  try {
    rows = run_bench(opts, &out);
  } catch (const KypError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
  const std::string csv = bench_csv(rows);
  out << csv;
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    f << csv;
    if (!f) {
      err << "error: cannot write " << csv_path << '\n';
      return kInvalid;
    }
  }
  if (const auto slope = fit_loglog_slope(rows)) {
    out << "slope: " << fmt(*slope) << '\n';
  } else {
    out << "slope: n/a (fewer than two sizes)\n";
  }
  return kOk;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

Pipeline solve_pipeline(const KypProblem& prob, const std::optional<Vector>& initial,
                        const SolverConfig& cfg) {
  Pipeline pl;
  Vector start;
  if (initial && feasibility_margins(prob, *initial, cfg.pair).strictly_feasible()) {
    start = *initial;
  } else {
    pl.ran_phase1 = true;
    pl.phase1 = phase1(prob, cfg);
    if (!pl.phase1.feasible) {
      pl.exit_code =
          pl.phase1.report.status == SolveStatus::infeasible ? kInfeasible : kNumerical;
      return pl;
    }
    start = pl.phase1.lambda;
  }
  pl.report = solve(prob, start, cfg);
  pl.exit_code = pl.report.status == SolveStatus::optimal ? kOk : kNumerical;
  return pl;
}

std::vector<BenchRow> run_bench(const BenchOptions& opts, std::ostream* log) {
  std::vector<BenchRow> rows;
  for (int n : opts.sizes) {
    const ChainPlant cp = generate_mass_spring_chain(n / 2);
    const KypProblem prob = assemble_kyp_sdp(build_actuator_uncertainty(cp.A, cp.B1, opts.gamma));
    SolverConfig cfg;
    const Phase1Result ph = phase1(prob, cfg);
    if (!ph.feasible) throw NoFeasiblePoint("bench instance n=" + std::to_string(n) + " infeasible");
    cfg.max_total_iters = opts.max_iters;

    std::vector<BenchRow> runs;
    for (int r = 0; r < std::max(1, opts.repeats); ++r) {
      const SolveReport rep = solve(prob, ph.lambda, cfg);
      BenchRow row;
      row.n = n;
      row.p = prob.p();
      row.newton_iters = rep.newton_iters_total;
      row.riccati_solves = rep.riccati_solves;
      row.lyapunov_solves = rep.lyapunov_solves;
      row.secs_per_iter = rep.newton_iters_total > 0
                              ? rep.newton_seconds / static_cast<double>(rep.newton_iters_total)
                              : 0.0;
      runs.push_back(row);
    }
    std::vector<double> times;
    for (const BenchRow& r : runs) times.push_back(r.secs_per_iter);
    const double med = median_of(times);
    const auto it = std::find_if(runs.begin(), runs.end(),
                                 [&](const BenchRow& r) { return r.secs_per_iter == med; });
    rows.push_back(*it);
    if (log) {
      *log << "n=" << n << " iters=" << it->newton_iters << " secs/iter=" << fmt(med) << '\n';
    }
  }
  return rows;
}

std::optional<double> fit_loglog_slope(const std::vector<BenchRow>& rows) {
  std::vector<double> x, y;
  for (const BenchRow& r : rows) {
    if (r.secs_per_iter <= 0.0) continue;
    x.push_back(std::log(static_cast<double>(r.n)));
    y.push_back(std::log(r.secs_per_iter));
  }
  if (x.size() < 2) return std::nullopt;
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / k;
    my += y[i] / k;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream ss;
  ss << "n,p,newton_iters,riccati_solves,lyapunov_solves,secs_per_iter\n";
  ss << std::setprecision(17);
  for (const BenchRow& r : rows) {
    ss << r.n << ',' << r.p << ',' << r.newton_iters << ',' << r.riccati_solves << ','
       << r.lyapunov_solves << ',' << r.secs_per_iter << '\n';
  }
  return ss.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structure-exploiting KYP semidefinite program solver", "kypsdp"};
  app.require_subcommand(1);

  std::string path;
  auto* validate = app.add_subcommand("validate", "Check a problem file");
  validate->add_option("file", path, "Problem file (JSON)")->required();

  std::optional<double> t0;
  double t_max = 1e6, t_factor = 10.0, newton_tol = 1e-6;
  std::string report_path;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file");
  solve_cmd->add_option("file", path, "Problem file (JSON)")->required();
  solve_cmd->add_option("--t0", t0, "Initial barrier weight");
  solve_cmd->add_option("--t-max", t_max, "Final barrier weight")->capture_default_str();
  solve_cmd->add_option("--t-factor", t_factor, "Barrier weight growth per stage")
      ->capture_default_str();
  solve_cmd->add_option("--newton-tol", newton_tol, "Newton decrement stopping threshold")
      ->capture_default_str();
  solve_cmd->add_option("--out", report_path, "Write the JSON report here");

  std::optional<int> chain;
  std::string plant_path;
  double gamma = 0.25;
  std::string prefix = "synth";
  auto* synth = app.add_subcommand("synth", "Robust LQR synthesis under actuator uncertainty");
  auto* chain_opt = synth->add_option("--chain", chain, "Mass-spring chain with k masses")
                        ->check(CLI::PositiveNumber);
  auto* plant_opt = synth->add_option("--plant", plant_path, "Plant file with A and B1");
  chain_opt->excludes(plant_opt);
  synth->add_option("--gamma", gamma, "Relative actuator uncertainty")->capture_default_str();
  synth->add_option("--out", prefix, "Output prefix for problem and report files")
      ->capture_default_str();
  for (auto* sub : {synth}) {
    sub->add_option("--t0", t0, "Initial barrier weight");
    sub->add_option("--t-max", t_max, "Final barrier weight");
    sub->add_option("--t-factor", t_factor, "Barrier weight growth per stage");
    sub->add_option("--newton-tol", newton_tol, "Newton decrement stopping threshold");
  }

  BenchOptions bopts;
  std::string csv_path;
  auto* bench = app.add_subcommand("bench", "Per-iteration timing on mass-spring chains");
  bench->add_option("--sizes", bopts.sizes, "State dimensions (even)")
      ->required()
      ->delimiter(',');
  bench->add_option("--repeats", bopts.repeats, "Runs per size; the median is kept")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--csv", csv_path, "Write the CSV here");
  bench->add_option("--gamma", bopts.gamma, "Actuator uncertainty of the chains")
      ->capture_default_str();
  bench->add_option("--max-iters", bopts.max_iters, "Newton iterations timed per run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  if (*synth && !chain && plant_path.empty()) {
    err << "error: synth needs --chain or --plant\n";
    return kInvalid;
  }

  SolverConfig cfg;
  apply_flags(cfg, t0, t_max, t_factor, newton_tol);
  if (*solve_cmd || *synth) {
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << '\n';
      return kInvalid;
    }
  }

  if (*validate) return cmd_validate(path, out, err);
  if (*solve_cmd) return cmd_solve(path, cfg, report_path, out, err);
  if (*synth) return cmd_synth(chain, plant_path, gamma, prefix, cfg, out, err);
  return cmd_bench(bopts, csv_path, out, err);
}

}  // namespace kyp::cli
