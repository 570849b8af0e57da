#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cboc/solve_stats.hpp"
#include "cboc/transcribe.hpp"

namespace cboc {

struct SolverConfig {
  int outer_max_iter = 50;
  int inner_max_iter = 500;
  double feas_tol = 1e-6;
  double opt_tol = 1e-6;
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e10;
  double fd_step = 1e-7;   // relative central-difference step
  std::uint64_t seed = 0;  // randomized restarts only
  int restarts = 0;        // extra perturbed starts, best result wins
  int threads = 0;         // finite-difference workers, 0 = auto
};

/// What a backend has to minimize: objective, scaled equality and inequality
/// residuals (feasible means eq = 0 and ineq <= 0), and box bounds.
struct NlpFunctions {
  int n = 0;
  int n_eq = 0;
  int n_ineq = 0;
  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eq;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> ineq;
  Eigen::VectorXd lo, hi;
};

/// NLP solver interface. The built-in "reference" backend is an augmented
/// Lagrangian outer loop around a bound-constrained projected quasi-Newton
/// inner solver, driven entirely by function values and central differences.
/// External wrappers can be registered by name; callers re-verify
/// feasibility themselves and never rely on backend-reported numbers.
class NlpBackend {
 public:
  virtual ~NlpBackend() = default;
  virtual std::string name() const = 0;
  virtual std::pair<Eigen::VectorXd, SolveStats> minimize(const NlpFunctions& fns,
                                                          const Eigen::VectorXd& z0,
                                                          const SolverConfig& cfg) const = 0;
};

void register_backend(std::shared_ptr<const NlpBackend> backend);
std::shared_ptr<const NlpBackend> backend(const std::string& name);
std::vector<std::string> backend_names();

/// Solves a transcription from z0 (clipped into the variable bounds with a
/// warning if outside). Variables are scaled by bound widths, or by the
/// start magnitude when unbounded; residuals by the transcription's scales.
/// Deterministic given (nlp, z0, cfg, seed). Feasibility in the returned
/// stats is recomputed from the transcription, not taken from the backend.
std::pair<Eigen::VectorXd, SolveStats> solve(const TranscribedNlp& nlp,
                                             const Eigen::VectorXd& z0,
                                             const SolverConfig& cfg = {},
                                             const std::string& backend_name = "reference");

/// Start point: state coefficients interpolate the boundary targets
/// linearly in time, control coefficients sit at bound-box midpoints (zero
/// when unbounded), knots are uniform over the final-time guess.
Eigen::VectorXd initial_guess(const OcProblem& p, const DecisionLayout& layout);

/// Central finite-difference gradient with relative step
/// fd_step * max(1, |z_i|). Throws naming the coordinate on a non-finite
/// probe.
Eigen::VectorXd gradient(const std::function<double(const Eigen::VectorXd&)>& fn,
                         const Eigen::VectorXd& z, const SolverConfig& cfg = {});

}  // namespace cboc
