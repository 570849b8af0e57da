#pragma once

#include <string>
#include <vector>

#include "cboc/knotting.hpp"

namespace cboc {

/// Bang-bang benchmark sweep: four single-segment solves of increasing order
/// plus the two-segment free-knot solve via the knotting pipeline.
struct Table1Scenario {
  std::string label;
  int K;
  int N;
  double paper_cost;
  double tolerance;
};

struct Table1Row {
  Table1Scenario scenario;
  double cost = 0.0;
  bool converged = false;
  std::vector<double> interior_knots;
  double wall_time = 0.0;

  bool matches_paper() const {
    return converged && std::abs(cost - scenario.paper_cost) <= scenario.tolerance;
  }
};

std::vector<Table1Scenario> table1_scenarios();

Table1Row run_table1_scenario(const Table1Scenario& sc, const SolverConfig& cfg);

/// Runs the requested scenarios (all when `only` is empty), optionally in
/// parallel; rows come back in scenario order either way.
std::vector<Table1Row> run_table1(const SolverConfig& cfg,
                                  const std::vector<std::string>& only = {},
                                  bool parallel = true);

std::string table1_csv(const std::vector<Table1Row>& rows);

}  // namespace cboc
