#include "cboc/studies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>
#include <stdexcept>

namespace cboc {

std::vector<Table1Scenario> table1_scenarios() {
  return {
      {"K1N10", 1, 10, -59.35, 0.30},
      {"K1N15", 1, 15, -59.50, 0.30},
      {"K1N30", 1, 30, -59.67, 0.30},
      {"K1N55", 1, 55, -59.74, 0.30},
      {"K2N10", 2, 10, -59.83, 0.05},
  };
}

Table1Row run_table1_scenario(const Table1Scenario& sc, const SolverConfig& cfg) {
  Table1Row row;
  row.scenario = sc;
  const OcProblem p = bangbang_problem();

  if (sc.K == 1) {
    TranscribedNlp nlp = transcribe(p, 1, sc.N);
    const Eigen::VectorXd z0 = initial_guess(p, nlp.layout());
    auto [z, stats] = solve(nlp, z0, cfg);
    row.cost = nlp.objective(z);
    row.converged = stats.converged;
    row.wall_time = stats.wall_time;
    return row;
  }

  // the two-segment entry reproduces the knotting pipeline end to end
  KnotDetectConfig kcfg;
  kcfg.N = sc.N;
  kcfg.solver = cfg;
  const KnotReport rep = detect_and_solve(p, kcfg, cfg);
  if (!rep.final_solution) {
    throw std::runtime_error("table1: knotting pipeline produced no solution");
  }
  row.cost = rep.final_solution->cost;
  row.converged = rep.final_solution->stats.converged && rep.detected_K == sc.K;
  row.interior_knots = rep.optimized_knots;
  row.wall_time = rep.final_solution->stats.wall_time + rep.probe_stats.wall_time;
  return row;
}

std::vector<Table1Row> run_table1(const SolverConfig& cfg, const std::vector<std::string>& only,
                                  bool parallel) {
  std::vector<Table1Scenario> selected;
  for (const auto& sc : table1_scenarios()) {
    if (only.empty() || std::find(only.begin(), only.end(), sc.label) != only.end()) {
      selected.push_back(sc);
    }
  }
  if (selected.empty()) {
    std::string known;
    for (const auto& sc : table1_scenarios()) known += (known.empty() ? "" : ", ") + sc.label;
    throw std::invalid_argument("table1: no scenario matches; known: " + known);
  }

  std::vector<Table1Row> rows(selected.size(), Table1Row{});
  if (parallel && selected.size() > 1) {
    SolverConfig per = cfg;
    per.threads = 1;  // scenario-level parallelism replaces probe workers
    std::vector<std::future<Table1Row>> futs;
    futs.reserve(selected.size());
    for (const auto& sc : selected) {
      futs.push_back(std::async(std::launch::async,
                                [sc, per] { return run_table1_scenario(sc, per); }));
    }
    for (std::size_t i = 0; i < futs.size(); ++i) rows[i] = futs[i].get();
  } else {
    for (std::size_t i = 0; i < selected.size(); ++i) {
      rows[i] = run_table1_scenario(selected[i], cfg);
    }
  }
  return rows;
}

std::string table1_csv(const std::vector<Table1Row>& rows) {
  std::ostringstream out;
  out << "label,K,N,cost,paper_cost,converged,knot\n";
  for (const auto& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.cost);
    out << r.scenario.label << "," << r.scenario.K << "," << r.scenario.N << "," << buf << ","
        << r.scenario.paper_cost << "," << (r.converged ? 1 : 0) << ",";
    if (!r.interior_knots.empty()) {
      std::snprintf(buf, sizeof buf, "%.6f", r.interior_knots.front());
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace cboc
