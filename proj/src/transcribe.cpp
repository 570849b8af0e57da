#include "cboc/transcribe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cboc {

namespace {

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

}  // namespace

TranscribedNlp::TranscribedNlp(OcProblem p, int K, int N, TranscribeOptions opts)
    : problem_(std::move(p)), opts_(opts) {
  if (K < 1 || N < 1) throw std::invalid_argument("transcribe: need K >= 1 and N >= 1");
  const auto findings = validate(problem_);
  if (!findings.empty()) {
    std::string msg = "transcribe: invalid problem:";
    for (const auto& f : findings) msg += " [" + f + "]";
    throw std::invalid_argument(msg);
  }

  layout_.K = K;
  layout_.N = N;
  layout_.nx = problem_.nx;
  layout_.nu = problem_.nu;
  layout_.free_interior_knots = opts_.free_interior_knots && K > 1;
  layout_.free_final_time = problem_.final_time.mode == FinalTime::Mode::Free;
  layout_.state_offset = 0;
  layout_.control_offset = layout_.nx * layout_.nodes();
  layout_.knot_offset = layout_.control_offset + layout_.nu * layout_.nodes();
  layout_.total = layout_.knot_offset + layout_.n_knot_vars();

  const double horizon = problem_.final_time.value;
  eps_gap_ = opts_.eps_gap_frac * horizon;
  delta_ = opts_.delta_per_resolution
               ? opts_.delta / (static_cast<double>(K) * K * N)
               : opts_.delta;

  unit_dm_ = diff_matrix(N, Interval(0.0, 1.0)) * elevation_matrix(N);

  // variable bounds: coefficient boxes carry the state/control boxes directly
  var_lo_ = Eigen::VectorXd::Constant(layout_.total, -std::numeric_limits<double>::infinity());
  var_hi_ = Eigen::VectorXd::Constant(layout_.total, std::numeric_limits<double>::infinity());
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j <= N; ++j) {
      for (int i = 0; i < layout_.nx; ++i) {
        var_lo_[layout_.state_index(k, j, i)] = problem_.state_bounds[i].lo;
        var_hi_[layout_.state_index(k, j, i)] = problem_.state_bounds[i].hi;
      }
      for (int i = 0; i < layout_.nu; ++i) {
        var_lo_[layout_.control_index(k, j, i)] = problem_.control_bounds[i].lo;
        var_hi_[layout_.control_index(k, j, i)] = problem_.control_bounds[i].hi;
      }
    }
  }
  const double tf_hi = layout_.free_final_time ? problem_.final_time.hi : horizon;
  for (int m = 0; m < layout_.n_interior_knot_vars(); ++m) {
    var_lo_[layout_.knot_offset + m] = (m + 1) * eps_gap_;
    var_hi_[layout_.knot_offset + m] = tf_hi - (layout_.n_interior_knot_vars() - m) * eps_gap_;
  }
  if (layout_.free_final_time) {
    var_lo_[layout_.total - 1] = problem_.final_time.lo;
    var_hi_[layout_.total - 1] = problem_.final_time.hi;
  }

  // constraint counts and residual scales
  n_eq_ = problem_.ne + (K - 1) * layout_.nx +
          (opts_.control_continuity ? (K - 1) * layout_.nu : 0);
  const int n_gap = layout_.n_knot_vars() > 0 ? K : 0;
  n_ineq_ = 2 * layout_.nodes() * layout_.nx + layout_.nodes() * problem_.nh + n_gap;

  // characteristic magnitudes per state coordinate, from boundary targets
  Eigen::VectorXd sx = Eigen::VectorXd::Ones(layout_.nx);
  for (int i = 0; i < layout_.nx; ++i) {
    if (problem_.x0_target.size() == layout_.nx) {
      sx[i] = std::max(sx[i], std::abs(finite_or(problem_.x0_target[i], 0.0)));
    }
    if (problem_.xf_target.size() == layout_.nx) {
      sx[i] = std::max(sx[i], std::abs(finite_or(problem_.xf_target[i], 0.0)));
    }
  }
  Eigen::VectorXd dyn_scale(layout_.nx);
  for (int i = 0; i < layout_.nx; ++i) dyn_scale[i] = std::max(1.0, 2.0 * sx[i] / horizon);

  eq_scales_ = Eigen::VectorXd::Ones(n_eq_);
  if (problem_.equality_scales.size() == problem_.ne) {
    eq_scales_.head(problem_.ne) = problem_.equality_scales;
  }
  for (int k = 0; k < K - 1; ++k) {
    for (int i = 0; i < layout_.nx; ++i) {
      eq_scales_[problem_.ne + k * layout_.nx + i] = sx[i];
    }
  }

  ineq_scales_ = Eigen::VectorXd::Ones(n_ineq_);
  const int nodes = layout_.nodes();
  for (int m = 0; m < nodes; ++m) {
    for (int i = 0; i < layout_.nx; ++i) {
      ineq_scales_[m * layout_.nx + i] = dyn_scale[i];
      ineq_scales_[nodes * layout_.nx + m * layout_.nx + i] = dyn_scale[i];
    }
  }
  if (problem_.nh > 0 && problem_.path_ineq_scales.size() == problem_.nh) {
    for (int m = 0; m < nodes; ++m) {
      for (int i = 0; i < problem_.nh; ++i) {
        ineq_scales_[2 * nodes * layout_.nx + m * problem_.nh + i] =
            std::max(1.0, problem_.path_ineq_scales[i]);
      }
    }
  }
  for (int g = 0; g < n_gap; ++g) {
    ineq_scales_[n_ineq_ - n_gap + g] = std::max(1.0, horizon);
  }
}

std::vector<double> TranscribedNlp::knot_times(const Eigen::VectorXd& z) const {
  const int K = layout_.K;
  std::vector<double> ts(K + 1);
  ts[0] = 0.0;
  ts[K] = layout_.free_final_time ? z[layout_.total - 1] : problem_.final_time.value;
  if (layout_.free_interior_knots) {
    for (int m = 0; m < K - 1; ++m) ts[m + 1] = z[layout_.knot_offset + m];
  } else {
    for (int m = 1; m < K; ++m) ts[m] = ts[K] * static_cast<double>(m) / K;
  }
  return ts;
}

double TranscribedNlp::clamped_width(const std::vector<double>& ts, int k) const {
  // transient iterates may invert knots; keep the algebra finite and let the
  // gap constraints push them apart again
  const double floor = 1e-9 * std::max(1.0, problem_.final_time.value);
  return std::max(ts[k + 1] - ts[k], floor);
}

std::vector<double> TranscribedNlp::node_times(const Eigen::VectorXd& z) const {
  const auto ts = knot_times(z);
  const int N = layout_.N;
  std::vector<double> nodes;
  nodes.reserve(layout_.nodes());
  for (int k = 0; k < layout_.K; ++k) {
    const double h = ts[k + 1] - ts[k];
    for (int j = 0; j <= N; ++j) {
      nodes.push_back(j == N ? ts[k + 1]
                             : ts[k] + h * static_cast<double>(j) / static_cast<double>(N));
    }
  }
  return nodes;
}

Eigen::MatrixXd TranscribedNlp::state_coefficients(const Eigen::VectorXd& z) const {
  return Eigen::Map<const Eigen::MatrixXd>(z.data() + layout_.state_offset, layout_.nx,
                                           layout_.nodes());
}

Eigen::MatrixXd TranscribedNlp::control_coefficients(const Eigen::VectorXd& z) const {
  return Eigen::Map<const Eigen::MatrixXd>(z.data() + layout_.control_offset, layout_.nu,
                                           layout_.nodes());
}

double TranscribedNlp::objective(const Eigen::VectorXd& z) const {
  const auto ts = knot_times(z);
  const auto x = state_coefficients(z);
  const auto u = control_coefficients(z);
  const int N = layout_.N;

  double total = problem_.endpoint_cost(x.col(0), x.col(layout_.nodes() - 1), ts[layout_.K]);
  for (int k = 0; k < layout_.K; ++k) {
    const double w = (ts[k + 1] - ts[k]) / static_cast<double>(N + 1);
    double seg = 0.0;
    for (int j = 0; j <= N; ++j) {
      const int col = k * (N + 1) + j;
      const double fj = problem_.running_cost(x.col(col), u.col(col));
      if (!std::isfinite(fj)) {
        throw std::runtime_error("objective: non-finite running cost at segment " +
                                 std::to_string(k) + ", node " + std::to_string(j));
      }
      seg += fj;
    }
    total += w * seg;
  }
  if (!std::isfinite(total)) throw std::runtime_error("objective: non-finite endpoint cost");
  return total;
}

Eigen::MatrixXd TranscribedNlp::dynamics_residuals(const Eigen::VectorXd& z) const {
  const auto ts = knot_times(z);
  const auto x = state_coefficients(z);
  const auto u = control_coefficients(z);
  const int N = layout_.N;

  Eigen::MatrixXd res(layout_.nx, layout_.nodes());
  for (int k = 0; k < layout_.K; ++k) {
    const double h = clamped_width(ts, k);
    const Eigen::MatrixXd xk = x.middleCols(k * (N + 1), N + 1);
    const Eigen::MatrixXd deriv = (xk * unit_dm_) / h;
    for (int j = 0; j <= N; ++j) {
      const int col = k * (N + 1) + j;
      res.col(col) = deriv.col(j) - problem_.dynamics(x.col(col), u.col(col));
    }
  }
  return res;
}

Eigen::VectorXd TranscribedNlp::eq(const Eigen::VectorXd& z) const {
  const auto ts = knot_times(z);
  const auto x = state_coefficients(z);
  const int N = layout_.N;

  Eigen::VectorXd out(n_eq_);
  int at = 0;
  if (problem_.ne > 0) {
    out.head(problem_.ne) =
        problem_.equality(x.col(0), x.col(layout_.nodes() - 1), ts[layout_.K]);
    at += problem_.ne;
  }
  for (int k = 0; k + 1 < layout_.K; ++k) {
    out.segment(at, layout_.nx) = x.col(k * (N + 1) + N) - x.col((k + 1) * (N + 1));
    at += layout_.nx;
  }
  if (opts_.control_continuity) {
    const auto u = control_coefficients(z);
    for (int k = 0; k + 1 < layout_.K; ++k) {
      out.segment(at, layout_.nu) = u.col(k * (N + 1) + N) - u.col((k + 1) * (N + 1));
      at += layout_.nu;
    }
  }
  return out;
}

Eigen::VectorXd TranscribedNlp::ineq(const Eigen::VectorXd& z) const {
  const auto ts = knot_times(z);
  const int nodes = layout_.nodes();
  const int nx = layout_.nx;

  // the relaxation bound applies to scaled residuals, so the band width is
  // delta in the same units as the feasibility tolerance
  Eigen::VectorXd out(n_ineq_);
  const Eigen::MatrixXd res = dynamics_residuals(z);
  for (int m = 0; m < nodes; ++m) {
    for (int i = 0; i < nx; ++i) {
      const double band = delta_ * ineq_scales_[m * nx + i];
      out[m * nx + i] = res(i, m) - band;
      out[nodes * nx + m * nx + i] = -res(i, m) - band;
    }
  }
  int at = 2 * nodes * nx;
  if (problem_.nh > 0) {
    const auto x = state_coefficients(z);
    const auto u = control_coefficients(z);
    const auto times = node_times(z);
    for (int m = 0; m < nodes; ++m) {
      out.segment(at, problem_.nh) = problem_.path_ineq(times[m], x.col(m), u.col(m));
      at += problem_.nh;
    }
  }
  if (layout_.n_knot_vars() > 0) {
    for (int k = 0; k < layout_.K; ++k) {
      out[at++] = eps_gap_ - (ts[k + 1] - ts[k]);
    }
  }
  return out;
}

double TranscribedNlp::max_violation(const Eigen::VectorXd& z) const {
  double v = 0.0;
  const Eigen::VectorXd e = eq(z);
  for (int i = 0; i < n_eq_; ++i) v = std::max(v, std::abs(e[i]) / eq_scales_[i]);
  const Eigen::VectorXd g = ineq(z);
  for (int i = 0; i < n_ineq_; ++i) v = std::max(v, g[i] / ineq_scales_[i]);
  return v;
}

Eigen::VectorXd TranscribedNlp::pack(const Eigen::MatrixXd& state_coeffs,
                                     const Eigen::MatrixXd& control_coeffs,
                                     const std::vector<double>& knots) const {
  if (state_coeffs.rows() != layout_.nx || state_coeffs.cols() != layout_.nodes() ||
      control_coeffs.rows() != layout_.nu || control_coeffs.cols() != layout_.nodes() ||
      static_cast<int>(knots.size()) != layout_.K + 1) {
    throw std::invalid_argument("pack: shape mismatch with layout");
  }
  Eigen::VectorXd z(layout_.total);
  Eigen::Map<Eigen::MatrixXd>(z.data() + layout_.state_offset, layout_.nx, layout_.nodes()) =
      state_coeffs;
  Eigen::Map<Eigen::MatrixXd>(z.data() + layout_.control_offset, layout_.nu, layout_.nodes()) =
      control_coeffs;
  for (int m = 0; m < layout_.n_interior_knot_vars(); ++m) {
    z[layout_.knot_offset + m] = knots[m + 1];
  }
  if (layout_.free_final_time) z[layout_.total - 1] = knots[layout_.K];
  return z;
}

TranscribedNlp transcribe(const OcProblem& p, int K, int N, const TranscribeOptions& opts) {
  return TranscribedNlp(p, K, N, opts);
}

Eigen::MatrixXd assemble_DM(const KnotVector& knots, int N) {
  const int K = knots.segment_count();
  const int n1 = N + 1;
  Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(K * n1, K * n1);
  const Eigen::MatrixXd elev = elevation_matrix(N);
  for (int k = 0; k < K; ++k) {
    dm.block(k * n1, k * n1, n1, n1) = diff_matrix(N, knots.segment_interval(k)) * elev;
  }
  return dm;
}

double objective_value(const TranscribedNlp& nlp, const Eigen::VectorXd& z) {
  return nlp.objective(z);
}

Solution extract_solution(const TranscribedNlp& nlp, const Eigen::VectorXd& z,
                          const SolveStats& stats) {
  const auto ts = nlp.knot_times(z);
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    if (!(ts[k + 1] > ts[k])) {
      throw std::runtime_error("extract_solution: knot ordering violated at index " +
                               std::to_string(k));
    }
  }
  KnotVector kv(ts);
  const int N = nlp.layout().N;
  Solution sol{CompositeCurve::from_coefficients(kv, nlp.state_coefficients(z), N),
               CompositeCurve::from_coefficients(kv, nlp.control_coefficients(z), N),
               nlp.objective(z), ts.back(), stats};
  return sol;
}

}  // namespace cboc
