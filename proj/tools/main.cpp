#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cboc/bounds.hpp"
#include "cboc/io.hpp"
#include "cboc/knotting.hpp"
#include "cboc/solver.hpp"
#include "cboc/studies.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

struct ProblemFlags {
  std::string name = "bangbang";
  double separation = 500.0;
  std::vector<double> intruder_p0;
  std::vector<double> intruder_v;
  bool conventional = false;
  double tf_guess = 0.0;  // 0 = keep the problem default
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& pf) {
  cmd->add_option("--problem", pf.name, "registry problem name")->capture_default_str();
  cmd->add_option("--separation", pf.separation, "intruder separation (ft)")
      ->capture_default_str();
  cmd->add_option("--intruder-p0", pf.intruder_p0, "intruder position at t=0 (ft, 3 values)")
      ->expected(3);
  cmd->add_option("--intruder-v", pf.intruder_v, "intruder velocity (ft/s, 3 values)")
      ->expected(3);
  cmd->add_flag("--conventional-kinematics", pf.conventional,
                "use cos*cos/sin*cos velocity kinematics instead of the published form");
  cmd->add_option("--tf-guess", pf.tf_guess, "override the free final-time guess (s)");
}

void add_solver_flags(CLI::App* cmd, cboc::SolverConfig& cfg) {
  cmd->add_option("--feas-tol", cfg.feas_tol, "feasibility tolerance")->capture_default_str();
  cmd->add_option("--opt-tol", cfg.opt_tol, "optimality tolerance")->capture_default_str();
  cmd->add_option("--outer", cfg.outer_max_iter, "outer iteration cap")->capture_default_str();
  cmd->add_option("--inner", cfg.inner_max_iter, "inner iteration cap")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "seed for randomized restarts")->capture_default_str();
  cmd->add_option("--restarts", cfg.restarts, "extra perturbed starts")->capture_default_str();
  cmd->add_option("--threads", cfg.threads, "finite-difference workers, 0 = auto")
      ->capture_default_str();
}

cboc::OcProblem make_problem(const ProblemFlags& pf) {
  cboc::OcProblem p;
  if (pf.name == "traffic_pattern") {
    cboc::IntruderSpec spec;
    spec.separation = pf.separation;
    if (pf.intruder_p0.size() == 3) {
      spec.p0 = Eigen::Vector3d(pf.intruder_p0[0], pf.intruder_p0[1], pf.intruder_p0[2]);
    }
    if (pf.intruder_v.size() == 3) {
      spec.v = Eigen::Vector3d(pf.intruder_v[0], pf.intruder_v[1], pf.intruder_v[2]);
    }
    cboc::MotionPlanningOptions opts;
    opts.conventional_kinematics = pf.conventional;
    p = cboc::motion_planning_problem(spec, opts);
  } else {
    p = cboc::registry_get(pf.name);
  }
  if (pf.tf_guess > 0.0 && p.final_time.mode == cboc::FinalTime::Mode::Free) {
    p.final_time =
        cboc::FinalTime::free_time(pf.tf_guess, p.final_time.lo, p.final_time.hi);
  }
  return p;
}

void print_stats(const cboc::SolveStats& s) {
  std::printf("  iterations: %d outer / %d inner, wall %.2f s\n", s.outer_iters, s.inner_iters,
              s.wall_time);
  std::printf("  feasibility %.3e, stationarity %.3e, converged: %s\n", s.final_feas,
              s.final_kkt, s.converged ? "yes" : "no");
  for (const auto& w : s.warnings) std::printf("  warning: %s\n", w.c_str());
}

void print_solution(const cboc::Solution& sol) {
  std::printf("cost %.6f, final time %.6f s\n", sol.cost, sol.final_time);
  std::printf("knots:");
  for (double t : sol.knots().times) std::printf(" %.6f", t);
  std::printf("\n");
  print_stats(sol.stats);
}

int cmd_solve(const ProblemFlags& pf, const cboc::SolverConfig& scfg, int K, int N,
              bool fixed_knots, double delta, bool delta_scaled, int samples,
              const std::string& out) {
  cboc::OcProblem p;
  try {
    p = make_problem(pf);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  }
  cboc::TranscribeOptions topts;
  topts.free_interior_knots = !fixed_knots;
  topts.delta = delta;
  topts.delta_per_resolution = delta_scaled;
  const cboc::TranscribedNlp nlp = cboc::transcribe(p, K, N, topts);
  const Eigen::VectorXd z0 = cboc::initial_guess(p, nlp.layout());
  auto [z, stats] = cboc::solve(nlp, z0, scfg);
  const cboc::Solution sol = cboc::extract_solution(nlp, z, stats);

  cboc::write_file(out + ".json", cboc::solution_to_json(sol, p.name));
  cboc::write_file(out + ".csv", cboc::solution_csv(sol, samples));
  print_solution(sol);
  std::printf("wrote %s.json and %s.csv\n", out.c_str(), out.c_str());
  return stats.converged ? kExitOk : kExitNotConverged;
}

int cmd_knot_detect(const ProblemFlags& pf, const cboc::SolverConfig& scfg, double d_th, int N,
                    double cluster_width, int max_rounds, int samples, const std::string& out) {
  cboc::OcProblem p;
  try {
    p = make_problem(pf);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  }
  cboc::KnotDetectConfig kcfg;
  kcfg.d_th = d_th;
  kcfg.N = N;
  kcfg.cluster_width = cluster_width;
  kcfg.max_rounds = max_rounds;
  kcfg.solver = scfg;
  const cboc::KnotReport rep = cboc::detect_and_solve(p, kcfg, scfg);

  std::printf("detected K = %d\n", rep.detected_K);
  if (!rep.knot_guesses.empty()) {
    std::printf("knot guesses:");
    for (double t : rep.knot_guesses) std::printf(" %.4f", t);
    std::printf("\n");
  }
  if (!rep.optimized_knots.empty()) {
    std::printf("optimized knots:");
    for (double t : rep.optimized_knots) std::printf(" %.6f", t);
    std::printf("\n");
  }
  cboc::write_file(out + ".json", cboc::knot_report_json(rep, p.name));
  std::printf("wrote %s.json\n", out.c_str());
  if (rep.final_solution) {
    cboc::write_file(out + ".csv", cboc::solution_csv(*rep.final_solution, samples));
    print_solution(*rep.final_solution);
    return rep.final_solution->stats.converged ? kExitOk : kExitNotConverged;
  }
  return kExitOk;
}

int cmd_converge(const std::string& fn_name, const std::string& vary, std::vector<int> Ks,
                 std::vector<int> Ns, int fixed_K, int fixed_N, int grid,
                 const std::string& out) {
  cboc::SmoothTestFunction fn;
  try {
    fn = cboc::test_function(fn_name);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  }
  const bool vary_k = vary == "K" || vary == "k";
  if (!vary_k && vary != "N" && vary != "n") {
    std::fprintf(stderr, "converge: --vary must be K or N\n");
    return kExitUsage;
  }
  if (vary_k && Ks.empty()) Ks = {1, 2, 4, 8, 16};
  if (!vary_k && Ns.empty()) Ns = {4, 8, 16, 32, 64};
  const std::vector<int> k_list = vary_k ? Ks : std::vector<int>{fixed_K};
  const std::vector<int> n_list = vary_k ? std::vector<int>{fixed_N} : Ns;

  const cboc::ConvergenceReport rep = cboc::rate_study(
      fn, k_list, n_list, vary_k ? cboc::RateMode::VaryK : cboc::RateMode::VaryN, grid);
  cboc::write_file(out, cboc::convergence_csv(rep));

  bool sound = true;
  for (const auto& row : rep.rows) {
    std::printf("K=%-3d N=%-3d supError %.4e  bound %.4e\n", row.K, row.N, row.supError,
                row.bound);
    sound = sound && row.supError <= cboc::kBoundSafety * row.bound;
  }
  bool slope_ok = true;
  if (rep.exactlyRepresentable) {
    std::printf("all errors below 1e-12: '%s' is exactly representable, slope undefined\n",
                fn.label.c_str());
  } else if (vary_k) {
    std::printf("fitted slope vs K: %.3f (expect -2 +- 0.3)\n", rep.fittedSlopeK);
    slope_ok = std::abs(rep.fittedSlopeK + 2.0) <= 0.3;
  } else {
    std::printf("fitted slope vs N: %.3f (expect -1 +- 0.2)\n", rep.fittedSlopeN);
    slope_ok = std::abs(rep.fittedSlopeN + 1.0) <= 0.2;
  }
  std::printf("wrote %s\n", out.c_str());
  return (sound && slope_ok) ? kExitOk : kExitNotConverged;
}

int cmd_table1(const cboc::SolverConfig& scfg, const std::vector<std::string>& only,
               bool sequential, const std::string& out) {
  std::vector<cboc::Table1Row> rows;
  try {
    rows = cboc::run_table1(scfg, only, !sequential);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  }
  std::printf("%-8s %-4s %-4s %-12s %-12s %s\n", "label", "K", "N", "cost", "paper", "status");
  bool all_ok = true;
  bool all_converged = true;
  for (const auto& r : rows) {
    const bool ok = r.matches_paper();
    std::printf("%-8s %-4d %-4d %-12.4f %-12.2f %s\n", r.scenario.label.c_str(), r.scenario.K,
                r.scenario.N, r.cost, r.scenario.paper_cost,
                !r.converged ? "NOT CONVERGED" : (ok ? "ok" : "MISMATCH"));
    if (!r.interior_knots.empty()) {
      std::printf("         interior knots:");
      for (double t : r.interior_knots) std::printf(" %.4f", t);
      std::printf("\n");
    }
    all_ok = all_ok && ok;
    all_converged = all_converged && r.converged;
  }
  if (!out.empty()) {
    cboc::write_file(out, cboc::table1_csv(rows));
    std::printf("wrote %s\n", out.c_str());
  }
  if (!all_converged) return kExitNotConverged;
  return all_ok ? kExitOk : kExitNotConverged;
}

int cmd_eval(const std::string& path, int samples, const std::string& out) {
  const cboc::Solution sol = cboc::solution_from_json(cboc::read_file(path));
  const std::string csv = cboc::solution_csv(sol, samples);
  if (out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    cboc::write_file(out, csv);
    std::printf("wrote %s\n", out.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"composite Bernstein optimal control toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value config file; command-line flags override");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "transcribe and solve a registry problem");
  ProblemFlags solve_pf;
  cboc::SolverConfig solve_scfg;
  int K = 1, N = 10, samples = 201;
  bool fixed_knots = false;
  bool free_knots = false;
  double delta = 1e-6;
  bool delta_scaled = false;
  std::string solve_out = "solution";
  add_problem_flags(solve_cmd, solve_pf);
  add_solver_flags(solve_cmd, solve_scfg);
  solve_cmd->add_option("--K", K, "number of segments")->capture_default_str();
  solve_cmd->add_option("--N", N, "polynomial order")->capture_default_str();
  solve_cmd->add_flag("--free-knots", free_knots, "optimize interior knots (default)");
  solve_cmd->add_flag("--fixed-knots", fixed_knots, "freeze interior knots to uniform");
  solve_cmd->add_option("--delta", delta, "dynamics relaxation bound")->capture_default_str();
  solve_cmd->add_flag("--delta-scaled", delta_scaled, "use delta / (K^2 N)");
  solve_cmd->add_option("--samples", samples, "CSV sample count")->capture_default_str();
  solve_cmd->add_option("--out", solve_out, "output path prefix")->capture_default_str();

  // knot-detect
  auto* knot_cmd = app.add_subcommand("knot-detect", "detect control discontinuities, then re-solve");
  ProblemFlags knot_pf;
  cboc::SolverConfig knot_scfg;
  double d_th = 10.0, cluster_width = 0.05;
  int knot_N = 10, max_rounds = 3, knot_samples = 201;
  std::string knot_out = "knot_report";
  add_problem_flags(knot_cmd, knot_pf);
  add_solver_flags(knot_cmd, knot_scfg);
  knot_cmd->add_option("--dth", d_th, "derivative threshold")->capture_default_str();
  knot_cmd->add_option("--N", knot_N, "probe order")->capture_default_str();
  knot_cmd->add_option("--cluster-width", cluster_width, "cluster width, fraction of horizon")
      ->capture_default_str();
  knot_cmd->add_option("--max-rounds", max_rounds, "detect/solve round cap")
      ->capture_default_str();
  knot_cmd->add_option("--samples", knot_samples, "CSV sample count")->capture_default_str();
  knot_cmd->add_option("--out", knot_out, "output path prefix")->capture_default_str();

  // converge
  auto* conv_cmd = app.add_subcommand("converge", "approximation-rate study for a test function");
  std::string fn_name = "sin2pi", vary = "K", conv_out = "convergence.csv";
  std::vector<int> Ks, Ns;
  int fixed_K = 1, fixed_N = 5, grid = 2000;
  conv_cmd->add_option("--fn", fn_name, "test function: sin2pi, poly2, exp, linear")
      ->capture_default_str();
  conv_cmd->add_option("--vary", vary, "axis to sweep: K or N")->capture_default_str();
  conv_cmd->add_option("--Ks", Ks, "segment counts to sweep")->delimiter(',');
  conv_cmd->add_option("--Ns", Ns, "orders to sweep")->delimiter(',');
  conv_cmd->add_option("--K", fixed_K, "fixed K for --vary N")->capture_default_str();
  conv_cmd->add_option("--N", fixed_N, "fixed N for --vary K")->capture_default_str();
  conv_cmd->add_option("--grid", grid, "sup-error grid size")->capture_default_str();
  conv_cmd->add_option("--out", conv_out, "CSV output path")->capture_default_str();

  // table1
  auto* table_cmd = app.add_subcommand("table1", "reproduce the bang-bang benchmark table");
  cboc::SolverConfig table_scfg;
  std::vector<std::string> only;
  bool sequential = false;
  std::string table_out = "table1.csv";
  add_solver_flags(table_cmd, table_scfg);
  table_cmd->add_option("--only", only, "run only the named scenarios (e.g. K1N10)");
  table_cmd->add_flag("--sequential", sequential, "disable scenario-level parallelism");
  table_cmd->add_option("--out", table_out, "CSV output path")->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "re-sample a stored solution to CSV");
  std::string eval_path, eval_out;
  int eval_samples = 201;
  eval_cmd->add_option("solution", eval_path, "solution JSON file")->required();
  eval_cmd->add_option("--samples", eval_samples, "sample count")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) {
      return cmd_solve(solve_pf, solve_scfg, K, N, fixed_knots && !free_knots, delta,
                       delta_scaled, samples, solve_out);
    }
    if (knot_cmd->parsed()) {
      return cmd_knot_detect(knot_pf, knot_scfg, d_th, knot_N, cluster_width, max_rounds,
                             knot_samples, knot_out);
    }
    if (conv_cmd->parsed()) {
      return cmd_converge(fn_name, vary, Ks, Ns, fixed_K, fixed_N, grid, conv_out);
    }
    if (table_cmd->parsed()) {
      return cmd_table1(table_scfg, only, sequential, table_out);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_path, eval_samples, eval_out);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNotConverged;
  }
  return kExitUsage;
}
