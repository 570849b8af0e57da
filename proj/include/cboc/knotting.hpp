#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "cboc/solver.hpp"

namespace cboc {

/// Discontinuity detection settings. The threshold applies to the control
/// points of the control derivative and is a design variable of the user.
struct KnotDetectConfig {
  double d_th = 10.0;         // control-units per second
  int N = 10;                 // probe solve order, >= 2
  int max_rounds = 3;         // cap on detect -> solve cycles; one usually suffices
  double cluster_width = 0.05;  // fraction of the horizon
  SolverConfig solver;
};

struct KnotViolation {
  double time;
  double magnitude;
};

struct KnotReport {
  int detected_K = 1;
  std::vector<double> knot_guesses;          // strictly increasing, interior
  std::vector<KnotViolation> violating_nodes;
  std::vector<double> optimized_knots;       // interior knots after the re-solve
  std::optional<Solution> final_solution;
  SolveStats probe_stats;
};

struct ProbeSolveError : std::runtime_error {
  SolveStats stats;
  ProbeSolveError(const std::string& msg, SolveStats s)
      : std::runtime_error(msg), stats(std::move(s)) {}
};

/// Control-derivative coefficients exceeding d_th, with the node time of
/// each offending control point.
std::vector<KnotViolation> derivative_violations(const CompositeCurve& control, double d_th);

/// Merges violations closer than `width` into one discontinuity estimate at
/// their magnitude-weighted mean time.
std::vector<double> cluster_violations(const std::vector<KnotViolation>& violations,
                                       double width);

/// Steps (1)-(3): solve with K = 1, differentiate the control, threshold the
/// derivative control points. Violations within cluster_width of each other
/// count as one discontinuity. Throws ProbeSolveError if the probe solve
/// does not converge.
KnotReport detect(const OcProblem& p, const KnotDetectConfig& cfg);

/// Step (4) and the re-solve: place a free interior knot at each detected
/// discontinuity, warm start from the probe solution, and solve again.
/// Repeats detection on the result up to max_rounds times; stops as soon as
/// no new discontinuities appear.
KnotReport detect_and_solve(const OcProblem& p, const KnotDetectConfig& cfg,
                            const SolverConfig& scfg);

}  // namespace cboc
