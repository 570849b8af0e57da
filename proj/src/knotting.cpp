#include "cboc/knotting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cboc {

namespace {

void check_config(const KnotDetectConfig& cfg) {
  if (!(cfg.d_th > 0.0)) throw std::invalid_argument("knot detect: d_th must be positive");
  if (cfg.N < 2) throw std::invalid_argument("knot detect: probe order N must be >= 2");
  if (cfg.max_rounds < 1) throw std::invalid_argument("knot detect: max_rounds must be >= 1");
}

/// Samples an existing solution's curves at the Definition-1 nodes of a new
/// knot layout; controls are clipped back into their boxes.
Eigen::VectorXd warm_start(const TranscribedNlp& nlp, const Solution& prev,
                           const std::vector<double>& knots) {
  const auto& lay = nlp.layout();
  Eigen::MatrixXd xs(lay.nx, lay.nodes());
  Eigen::MatrixXd us(lay.nu, lay.nodes());
  const double t_lo = prev.knots().t0();
  const double t_hi = prev.knots().tf();
  for (int k = 0; k < lay.K; ++k) {
    for (int j = 0; j <= lay.N; ++j) {
      double t = knots[k] + (knots[k + 1] - knots[k]) * static_cast<double>(j) / lay.N;
      t = std::clamp(t, t_lo, t_hi);
      const int col = k * (lay.N + 1) + j;
      xs.col(col) = curve_eval(prev.state, t);
      us.col(col) = curve_eval(prev.control, t);
    }
  }
  Eigen::VectorXd z = nlp.pack(xs, us, knots);
  return z.cwiseMax(nlp.var_lo()).cwiseMin(nlp.var_hi());
}

}  // namespace

std::vector<KnotViolation> derivative_violations(const CompositeCurve& control, double d_th) {
  std::vector<KnotViolation> out;
  const int N = control.order();
  if (N < 1) return out;
  for (std::size_t k = 0; k < control.segments.size(); ++k) {
    const auto& seg = control.segments[k];
    const Eigen::MatrixXd du = seg.coeffs * diff_matrix(N, seg.interval);  // order N-1
    for (int j = 0; j < N; ++j) {
      const double mag = du.col(j).lpNorm<Eigen::Infinity>();
      if (mag > d_th) {
        const double t =
            N == 1 ? 0.5 * (seg.interval.a + seg.interval.b)
                   : seg.interval.a + seg.interval.width() * static_cast<double>(j) / (N - 1);
        out.push_back(KnotViolation{t, mag});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const KnotViolation& a, const KnotViolation& b) { return a.time < b.time; });
  return out;
}

std::vector<double> cluster_violations(const std::vector<KnotViolation>& violations,
                                       double width) {
  std::vector<double> centers;
  std::size_t i = 0;
  while (i < violations.size()) {
    double wsum = violations[i].magnitude;
    double tsum = violations[i].magnitude * violations[i].time;
    std::size_t j = i + 1;
    while (j < violations.size() && violations[j].time - violations[j - 1].time <= width) {
      wsum += violations[j].magnitude;
      tsum += violations[j].magnitude * violations[j].time;
      ++j;
    }
    centers.push_back(tsum / wsum);
    i = j;
  }
  return centers;
}

KnotReport detect(const OcProblem& p, const KnotDetectConfig& cfg) {
  check_config(cfg);
  TranscribedNlp nlp = transcribe(p, 1, cfg.N);
  const Eigen::VectorXd z0 = initial_guess(p, nlp.layout());
  auto [z, stats] = solve(nlp, z0, cfg.solver);
  if (!stats.converged) {
    throw ProbeSolveError("knot detect: K=1 probe solve did not converge (feas=" +
                              std::to_string(stats.final_feas) + ", kkt=" +
                              std::to_string(stats.final_kkt) + ")",
                          stats);
  }
  const Solution probe = extract_solution(nlp, z, stats);

  KnotReport rep;
  rep.probe_stats = stats;
  rep.violating_nodes = derivative_violations(probe.control, cfg.d_th);
  const double horizon = probe.knots().tf() - probe.knots().t0();
  rep.knot_guesses = cluster_violations(rep.violating_nodes, cfg.cluster_width * horizon);
  // interior clamp so re-transcription keeps a valid minimum gap
  const double gap = std::max(nlp.eps_gap(), 1e-6 * horizon);
  for (double& t : rep.knot_guesses) {
    t = std::clamp(t, probe.knots().t0() + gap, probe.knots().tf() - gap);
  }
  rep.detected_K = 1 + static_cast<int>(rep.knot_guesses.size());
  rep.final_solution = probe;  // replaced by the re-solve when knots were found
  return rep;
}

KnotReport detect_and_solve(const OcProblem& p, const KnotDetectConfig& cfg,
                            const SolverConfig& scfg) {
  KnotReport rep = detect(p, cfg);
  if (rep.detected_K == 1) return rep;  // nothing to refine

  std::vector<double> interior = rep.knot_guesses;
  for (int round = 0; round < cfg.max_rounds; ++round) {
    const int K = 1 + static_cast<int>(interior.size());
    TranscribedNlp nlp = transcribe(p, K, cfg.N);
    std::vector<double> knots;
    knots.push_back(0.0);
    knots.insert(knots.end(), interior.begin(), interior.end());
    knots.push_back(rep.final_solution->final_time);
    const Eigen::VectorXd z0 = warm_start(nlp, *rep.final_solution, knots);

    auto [z, stats] = solve(nlp, z0, scfg);
    Solution sol = extract_solution(nlp, z, stats);
    rep.detected_K = K;
    rep.optimized_knots.assign(sol.knots().times.begin() + 1, sol.knots().times.end() - 1);
    rep.final_solution = std::move(sol);
    if (!stats.converged) break;

    // another pass only if fresh discontinuities show up inside a segment
    const auto more = derivative_violations(rep.final_solution->control, cfg.d_th);
    const double horizon = rep.final_solution->final_time;
    auto centers = cluster_violations(more, cfg.cluster_width * horizon);
    std::erase_if(centers, [&](double c) {
      return std::any_of(rep.optimized_knots.begin(), rep.optimized_knots.end(), [&](double t) {
        return std::abs(t - c) <= cfg.cluster_width * horizon;
      });
    });
    if (centers.empty()) break;
    interior = rep.optimized_knots;
    interior.insert(interior.end(), centers.begin(), centers.end());
    std::sort(interior.begin(), interior.end());
  }
  return rep;
}

}  // namespace cboc
