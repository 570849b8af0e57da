#pragma once

#include <vector>

#include <Eigen/Core>

#include "cboc/composite.hpp"
#include "cboc/ocp.hpp"
#include "cboc/solve_stats.hpp"

namespace cboc {

struct TranscribeOptions {
  /// Interior knot times become decision variables (only meaningful for
  /// K > 1). Freeze for convergence studies.
  bool free_interior_knots = true;
  /// Relaxation bound on the per-node dynamics residuals.
  double delta = 1e-6;
  /// Use delta / (K^2 N) instead of the constant value.
  bool delta_per_resolution = false;
  /// Minimum knot spacing as a fraction of the horizon guess.
  double eps_gap_frac = 1e-3;
  /// Also tie control coefficients across segment joints (off: controls may
  /// jump at knots, states are always continuous).
  bool control_continuity = false;
};

/// Placement of coefficients and knot times inside the decision vector:
/// all state coefficients, then all control coefficients, then free knot
/// variables (interior knots t_1..t_{K-1}, then t_K when the final time is
/// free).
struct DecisionLayout {
  int K = 0;
  int N = 0;
  int nx = 0;
  int nu = 0;
  bool free_interior_knots = false;
  bool free_final_time = false;
  int state_offset = 0;
  int control_offset = 0;
  int knot_offset = 0;
  int total = 0;

  int nodes() const { return K * (N + 1); }
  int n_interior_knot_vars() const { return free_interior_knots ? K - 1 : 0; }
  int n_knot_vars() const { return n_interior_knot_vars() + (free_final_time ? 1 : 0); }
  int state_index(int k, int j, int i) const {
    return state_offset + ((k * (N + 1)) + j) * nx + i;
  }
  int control_index(int k, int j, int i) const {
    return control_offset + ((k * (N + 1)) + j) * nu + i;
  }
};

/// The discretized problem: objective and constraint callables over the flat
/// decision vector, plus variable bounds and per-constraint residual scales.
///
/// Equality order:   [boundary e | state continuity | control continuity].
/// Inequality order: [dyn residual - delta | -dyn residual - delta |
///                    path h at nodes | knot gap margins], feasible <= 0.
class TranscribedNlp {
 public:
  TranscribedNlp(OcProblem p, int K, int N, TranscribeOptions opts);

  const DecisionLayout& layout() const { return layout_; }
  const OcProblem& problem() const { return problem_; }
  const TranscribeOptions& options() const { return opts_; }
  double delta() const { return delta_; }
  double eps_gap() const { return eps_gap_; }

  /// Knot times implied by z (always starts at 0). Not validated; transient
  /// iterates may violate the ordering, which the gap constraints penalize.
  std::vector<double> knot_times(const Eigen::VectorXd& z) const;
  /// Definition-1 node times for every segment, K(N+1) entries.
  std::vector<double> node_times(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd state_coefficients(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd control_coefficients(const Eigen::VectorXd& z) const;

  double objective(const Eigen::VectorXd& z) const;
  Eigen::VectorXd eq(const Eigen::VectorXd& z) const;
  Eigen::VectorXd ineq(const Eigen::VectorXd& z) const;

  /// Raw per-node dynamics residuals (nx x nodes): derivative coefficients
  /// minus f at the coefficients.
  Eigen::MatrixXd dynamics_residuals(const Eigen::VectorXd& z) const;

  int n_eq() const { return n_eq_; }
  int n_ineq() const { return n_ineq_; }
  const Eigen::VectorXd& var_lo() const { return var_lo_; }
  const Eigen::VectorXd& var_hi() const { return var_hi_; }
  const Eigen::VectorXd& eq_scales() const { return eq_scales_; }
  const Eigen::VectorXd& ineq_scales() const { return ineq_scales_; }

  /// Max of |eq|/scale and positive ineq/scale at z.
  double max_violation(const Eigen::VectorXd& z) const;

  /// Builds a decision vector from coefficient matrices (dim x K(N+1)) and
  /// a full knot list (K+1 times); free knot entries are read off the list.
  Eigen::VectorXd pack(const Eigen::MatrixXd& state_coeffs,
                       const Eigen::MatrixXd& control_coeffs,
                       const std::vector<double>& knots) const;

 private:
  OcProblem problem_;
  DecisionLayout layout_;
  TranscribeOptions opts_;
  double delta_ = 0.0;
  double eps_gap_ = 0.0;
  Eigen::MatrixXd unit_dm_;  // diff_matrix(N, [0,1]) * elevation_matrix(N)
  Eigen::VectorXd var_lo_, var_hi_;
  Eigen::VectorXd eq_scales_, ineq_scales_;
  int n_eq_ = 0;
  int n_ineq_ = 0;

  double clamped_width(const std::vector<double>& ts, int k) const;
};

/// Builds Problem P_M from a validated problem. Throws std::invalid_argument
/// listing the findings if validate(p) is non-empty.
TranscribedNlp transcribe(const OcProblem& p, int K, int N, const TranscribeOptions& opts = {});

/// Block-diagonal differentiation operator: blkdiag of per-segment
/// diff_matrix * elevation_matrix, size K(N+1) square. Stacked order-N
/// coefficients times this give order-N derivative coefficients per segment.
Eigen::MatrixXd assemble_DM(const KnotVector& knots, int N);

/// Endpoint cost on the first/last state coefficients plus the weighted
/// running-cost sum over all coefficients, w_k = width_k / (N+1).
double objective_value(const TranscribedNlp& nlp, const Eigen::VectorXd& z);

struct Solution {
  CompositeCurve state;
  CompositeCurve control;
  double cost = 0.0;
  double final_time = 0.0;
  SolveStats stats;

  const KnotVector& knots() const { return state.knots; }
};

/// Reconstitutes curves from a decision vector and recomputes the cost.
/// Throws std::runtime_error if the knot ordering in z is violated.
Solution extract_solution(const TranscribedNlp& nlp, const Eigen::VectorXd& z,
                          const SolveStats& stats);

}  // namespace cboc
