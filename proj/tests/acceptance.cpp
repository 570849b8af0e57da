// Acceptance suite: every criterion prints one [PASS]/[FAIL] line; the
// process exits nonzero if any selected criterion fails.
//
// usage: acceptance [--only <1..8>]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cboc/bounds.hpp"
#include "cboc/io.hpp"
#include "cboc/knotting.hpp"
#include "cboc/solver.hpp"
#include "cboc/studies.hpp"
#include "test_util.hpp"

using namespace cboc;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

// ---------------------------------------------------------------------------
// 1. Table I reproduction
// ---------------------------------------------------------------------------
Check criterion1() {
  Check c;
  const double start = now_seconds();
  SolverConfig cfg;
  cfg.inner_max_iter = 1500;
  cfg.outer_max_iter = 60;
  const auto rows = run_table1(cfg, {}, true);
  const double elapsed = now_seconds() - start;
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s cost %.4f vs paper %.2f (tol %.2f)%s",
                  r.scenario.label.c_str(), r.cost, r.scenario.paper_cost,
                  r.scenario.tolerance, r.converged ? "" : " NOT CONVERGED");
    c.require(r.matches_paper(), buf);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "runtime %.1f s exceeds 600 s", elapsed);
  c.require(elapsed < 600.0, buf);
  if (c.ok) {
    std::snprintf(buf, sizeof buf, "five costs within tolerance, runtime %.1f s", elapsed);
    c.detail = buf;
  }
  return c;
}

// ---------------------------------------------------------------------------
// 2. Switch-time recovery through the knotting pipeline
// ---------------------------------------------------------------------------
Check criterion2() {
  Check c;
  KnotDetectConfig kcfg;  // default threshold and N = 10 probe
  kcfg.solver.inner_max_iter = 1500;
  const KnotReport rep = detect_and_solve(bangbang_problem(), kcfg, kcfg.solver);

  c.require(rep.detected_K == 2,
            "detected K = " + std::to_string(rep.detected_K) + ", expected 2");
  if (!rep.knot_guesses.empty()) {
    const double guess = rep.knot_guesses.front();
    char buf[96];
    std::snprintf(buf, sizeof buf, "initial guess %.4f outside [1.0, 1.4]", guess);
    c.require(guess >= 1.0 && guess <= 1.4, buf);
  } else {
    c.require(false, "no knot guess produced");
  }
  if (!rep.optimized_knots.empty() && rep.final_solution) {
    const double knot = rep.optimized_knots.front();
    char buf[128];
    std::snprintf(buf, sizeof buf, "optimized knot %.4f not within 0.02 of 1.096", knot);
    c.require(std::abs(knot - 1.096) <= 0.02, buf);
    c.require(rep.final_solution->stats.converged, "final solve did not converge");
    if (c.ok) {
      std::snprintf(buf, sizeof buf, "guess %.3f -> optimized knot %.4f, cost %.3f",
                    rep.knot_guesses.front(), knot, rep.final_solution->cost);
      c.detail = buf;
    }
  } else {
    c.require(false, "no optimized knot produced");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 3-5. Lemma soundness across functions and the (K, N) grid
// ---------------------------------------------------------------------------
const std::vector<int> kGridK{1, 2, 4, 8};
const std::vector<int> kGridN{2, 4, 8, 16};

Check criterion3() {
  Check c;
  for (const char* name : {"sin2pi", "poly2", "exp"}) {
    const SmoothTestFunction f = test_function(name);
    for (int K : kGridK) {
      for (int N : kGridN) {
        const KnotVector kv = uniform_knots(0, 1, K);
        const double err =
            empirical_sup_error(f.deriv(0), approximant(f.deriv(0), kv, N), 2000);
        const double bound = lemma1_bound(bound_constants(f, kv, 1), K, N);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s K=%d N=%d err %.3e > 1.01*bound %.3e", name, K, N,
                      err, bound);
        c.require(err <= kBoundSafety * bound, buf);
      }
    }
  }
  const ConvergenceReport vk =
      rate_study(test_function("sin2pi"), {1, 2, 4, 8, 16}, {5}, RateMode::VaryK);
  const ConvergenceReport vn =
      rate_study(test_function("sin2pi"), {1}, {4, 8, 16, 32, 64}, RateMode::VaryN);
  char buf[128];
  std::snprintf(buf, sizeof buf, "K-slope %.3f outside -2 +- 0.3", vk.fittedSlopeK);
  c.require(std::abs(vk.fittedSlopeK + 2.0) <= 0.3, buf);
  std::snprintf(buf, sizeof buf, "N-slope %.3f outside -1 +- 0.2", vn.fittedSlopeN);
  c.require(std::abs(vn.fittedSlopeN + 1.0) <= 0.2, buf);
  if (c.ok) {
    std::snprintf(buf, sizeof buf,
                  "48 cells sound; slopes K %.2f (want -2), N %.2f (want -1)",
                  vk.fittedSlopeK, vn.fittedSlopeN);
    c.detail = buf;
  }
  return c;
}

Check criterion4() {
  Check c;
  for (const char* name : {"sin2pi", "poly2", "exp"}) {
    const SmoothTestFunction f = test_function(name);
    for (int K : kGridK) {
      for (int N : kGridN) {
        const KnotVector kv = uniform_knots(0, 1, K);
        const BoundConstants bc = bound_constants(f, kv, 1);
        const double err = empirical_sup_error(
            f.deriv(1), curve_derivative(approximant(f.deriv(0), kv, N)), 2000);
        const double bound = lemma2_bound(bc, 1, K, N);  // B3 = 0 at r = 1
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s K=%d N=%d deriv err %.3e > 1.01*bound %.3e", name,
                      K, N, err, bound);
        c.require(err <= kBoundSafety * bound, buf);
      }
    }
  }
  if (c.ok) c.detail = "48 first-derivative cells within 1.01*(B1/(K^2 N) + B2/(K N))";
  return c;
}

Check criterion5() {
  Check c;
  const std::map<std::string, double> exact{
      {"sin2pi", 0.0}, {"poly2", 1.0 / 3.0}, {"exp", std::exp(1.0) - 1.0}};
  for (const auto& [name, integral] : exact) {
    const SmoothTestFunction f = test_function(name);
    for (int K : kGridK) {
      for (int N : kGridN) {
        const KnotVector kv = uniform_knots(0, 1, K);
        const double err =
            std::abs(curve_integral(approximant(f.deriv(0), kv, N))[0] - integral);
        const double bound = lemma3_bound(bound_constants(f, kv, 1), K, N);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s K=%d N=%d integral err %.3e > 1.01*bound %.3e",
                      name.c_str(), K, N, err, bound);
        c.require(err <= kBoundSafety * bound, buf);
      }
    }
  }
  const SmoothTestFunction lin = test_function("linear");
  const double lin_integral = 0.3 + 0.35;
  for (int K : kGridK) {
    for (int N : kGridN) {
      const double err = std::abs(
          curve_integral(approximant(lin.deriv(0), uniform_knots(0, 1, K), N))[0] -
          lin_integral);
      char buf[96];
      std::snprintf(buf, sizeof buf, "linear K=%d N=%d integral err %.2e > 1e-12", K, N, err);
      c.require(err <= 1e-12, buf);
    }
  }
  if (c.ok) c.detail = "48 integral cells within 1.01*C/(K^2 N); linear exact to 1e-12";
  return c;
}

// ---------------------------------------------------------------------------
// 6. Transcription feasibility at the sampled analytic optimum
// ---------------------------------------------------------------------------
Check criterion6() {
  Check c;
  const test_util::BangBangOracle oracle;
  const OcProblem p = bangbang_problem();

  struct Cell {
    int K, N;
    double max_res = 0.0;
    double away_res = 0.0;
  };
  std::vector<Cell> cells{{1, 10}, {2, 10}, {2, 20}};
  for (auto& cell : cells) {
    const TranscribedNlp nlp = transcribe(p, cell.K, cell.N);
    const std::vector<double> knots =
        cell.K == 1 ? std::vector<double>{0.0, 2.0}
                    : std::vector<double>{0.0, oracle.switch_time, 2.0};
    const Eigen::VectorXd z = oracle.sample_decision(nlp, knots);
    const Eigen::MatrixXd res = nlp.dynamics_residuals(z);
    const auto times = nlp.node_times(z);
    for (int m = 0; m < res.cols(); ++m) {
      const double r = res.col(m).lpNorm<Eigen::Infinity>();
      cell.max_res = std::max(cell.max_res, r);
      if (std::abs(times[m] - oracle.switch_time) >= 0.1) {
        cell.away_res = std::max(cell.away_res, r);
      }
    }
  }
  char buf[192];
  std::snprintf(buf, sizeof buf, "residuals not monotone: %.3e -> %.3e -> %.3e",
                cells[0].max_res, cells[1].max_res, cells[2].max_res);
  c.require(cells[1].max_res <= 1.1 * cells[0].max_res &&
                cells[2].max_res <= 1.1 * cells[1].max_res,
            buf);
  std::snprintf(buf, sizeof buf,
                "K=2 N=20 residual away from the switch %.3e exceeds 1e-3",
                cells[2].away_res);
  c.require(cells[2].away_res < 1e-3, buf);
  if (c.ok) {
    std::snprintf(buf, sizeof buf, "residuals %.2e -> %.2e -> %.2e; away-from-switch %.2e",
                  cells[0].max_res, cells[1].max_res, cells[2].max_res, cells[2].away_res);
    c.detail = buf;
  }
  return c;
}

// ---------------------------------------------------------------------------
// 7. Motion planning solve
// ---------------------------------------------------------------------------
Check criterion7() {
  Check c;
  const OcProblem p = motion_planning_problem();
  const int K = 2, N = 8;
  const TranscribedNlp nlp = transcribe(p, K, N);
  SolverConfig cfg;
  cfg.feas_tol = 1e-5;
  cfg.opt_tol = 1e-4;
  cfg.outer_max_iter = 60;
  cfg.inner_max_iter = 1500;
  cfg.seed = 0;

  const Eigen::VectorXd z0 = initial_guess(p, nlp.layout());
  auto [z, stats] = solve(nlp, z0, cfg);
  char buf[160];
  std::snprintf(buf, sizeof buf, "solve did not converge (feas %.2e, kkt %.2e)",
                stats.final_feas, stats.final_kkt);
  c.require(stats.converged, buf);

  const double viol = nlp.max_violation(z);
  std::snprintf(buf, sizeof buf, "max scaled violation %.3e > 1e-4", viol);
  c.require(viol <= 1e-4, buf);

  const Eigen::VectorXd e = nlp.eq(z).cwiseQuotient(nlp.eq_scales());
  std::snprintf(buf, sizeof buf, "scaled boundary residual %.3e > 1e-3",
                e.lpNorm<Eigen::Infinity>());
  c.require(e.head(p.ne).lpNorm<Eigen::Infinity>() <= 1e-3, buf);

  const IntruderSpec intruder;  // defaults used by the registry problem
  const auto times = nlp.node_times(z);
  const Eigen::MatrixXd xs = nlp.state_coefficients(z);
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < times.size(); ++m) {
    const Eigen::Vector3d rel =
        xs.col(m).head<3>() - intruder.position(times[m]);
    min_dist = std::min(min_dist, rel.norm());
  }
  std::snprintf(buf, sizeof buf, "min node separation %.2f ft below 500", min_dist);
  c.require(min_dist >= intruder.separation * (1.0 - 1e-4), buf);

  const double tf = nlp.knot_times(z).back();
  std::snprintf(buf, sizeof buf, "final time %.2f s outside (0, 600]", tf);
  c.require(tf > 0.0 && tf <= 600.0, buf);

  auto [z2, stats2] = solve(nlp, z0, cfg);
  c.require((z - z2).lpNorm<Eigen::Infinity>() == 0.0, "repeat solve differs with same seed");

  if (c.ok) {
    std::snprintf(buf, sizeof buf,
                  "tf %.1f s, viol %.1e, min separation %.1f ft, deterministic", tf, viol,
                  min_dist);
    c.detail = buf;
  }
  return c;
}

// ---------------------------------------------------------------------------
// 8. Core property suites
// ---------------------------------------------------------------------------
Check criterion8() {
  Check c;
  const double start = now_seconds();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // partition of unity and non-negativity
  for (int it = 0; it < 100; ++it) {
    const int N = 1 + static_cast<int>(rng() % 30);
    const Interval iv(0.0, 1.0 + unit(rng));
    const double t = iv.a + iv.width() * unit(rng);
    double sum = 0.0;
    bool nonneg = true;
    for (int j = 0; j <= N; ++j) {
      const double b = basis_eval(j, N, iv, t);
      nonneg = nonneg && b >= 0.0;
      sum += b;
    }
    c.require(nonneg, "negative basis value");
    c.require(std::abs(sum - 1.0) <= 1e-12, "partition of unity off by more than 1e-12");
  }

  for (int it = 0; it < 100; ++it) {
    const int N = 1 + static_cast<int>(rng() % 10);
    const Interval iv(-1.0, 2.0);
    const BernsteinSegment seg(iv, test_util::random_coeffs(rng, 2, N + 1));

    // convex hull
    const double t = iv.a + iv.width() * unit(rng);
    const Eigen::VectorXd v = segment_eval(seg, t);
    for (int i = 0; i < 2; ++i) {
      c.require(v[i] >= seg.coeffs.row(i).minCoeff() - 1e-12 &&
                    v[i] <= seg.coeffs.row(i).maxCoeff() + 1e-12,
                "convex hull violated");
    }

    // endpoint interpolation
    c.require((segment_eval(seg, iv.a) - seg.coeffs.col(0)).lpNorm<Eigen::Infinity>() == 0.0 &&
                  (segment_eval(seg, iv.b) - seg.coeffs.col(N)).lpNorm<Eigen::Infinity>() == 0.0,
              "endpoint interpolation violated");

    // elevation exactness
    const BernsteinSegment up(iv, Eigen::MatrixXd(seg.coeffs * elevation_matrix(N + 1)));
    c.require((segment_eval(seg, t) - segment_eval(up, t)).lpNorm<Eigen::Infinity>() <= 1e-12,
              "elevation changed the polynomial");
  }

  // derivative vs central finite differences
  for (int it = 0; it < 100; ++it) {
    const int N = 2 + static_cast<int>(rng() % 8);
    const Interval iv(0.0, 2.0);
    const BernsteinSegment seg(iv, test_util::random_coeffs(rng, 1, N + 1));
    const BernsteinSegment dseg(iv, Eigen::MatrixXd(seg.coeffs * diff_matrix(N, iv)));
    const double t = 0.01 + 1.98 * unit(rng);
    const double h = 1e-6;
    const double fd = (segment_eval(seg, t + h)[0] - segment_eval(seg, t - h)[0]) / (2 * h);
    const double an = segment_eval(dseg, t)[0];
    c.require(std::abs(an - fd) <= 1e-5 * std::max(1.0, std::abs(an)),
              "derivative disagrees with finite differences");
  }

  // integral vs quadrature oracle
  for (int it = 0; it < 100; ++it) {
    const int N = 1 + static_cast<int>(rng() % 8);
    const Interval iv(0.0, 1.5);
    const BernsteinSegment seg(iv, test_util::random_coeffs(rng, 1, N + 1));
    const double oracle = test_util::simpson(
        [&](double t) { return segment_eval(seg, t)[0]; }, iv.a, iv.b, 2001);
    c.require(std::abs(segment_integral(seg)[0] - oracle) <= 1e-10,
              "integral disagrees with quadrature");
  }

  const double elapsed = now_seconds() - start;
  char buf[96];
  std::snprintf(buf, sizeof buf, "property suites took %.1f s (budget 60 s)", elapsed);
  c.require(elapsed < 60.0, buf);
  if (c.ok) {
    std::snprintf(buf, sizeof buf, "600 randomized cases passed in %.1f s", elapsed);
    c.detail = buf;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0) only = std::atoi(argv[i + 1]);
  }

  struct Entry {
    int id;
    const char* title;
    std::function<Check()> run;
  };
  const std::vector<Entry> entries{
      {1, "Table I reproduction", criterion1},
      {2, "switch-time recovery", criterion2},
      {3, "Lemma 1 soundness and rates", criterion3},
      {4, "Lemma 2 soundness (r=1)", criterion4},
      {5, "Lemma 3 soundness", criterion5},
      {6, "transcription feasibility transport", criterion6},
      {7, "motion planning", criterion7},
      {8, "core property suites", criterion8},
  };

  bool all_ok = true;
  for (const auto& e : entries) {
    if (only != 0 && e.id != only) continue;
    Check c;
    try {
      c = e.run();
    } catch (const std::exception& ex) {
      c.ok = false;
      c.detail = std::string("exception: ") + ex.what();
    }
    std::printf("[%s] criterion %d: %s — %s\n", c.ok ? "PASS" : "FAIL", e.id, e.title,
                c.detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && c.ok;
  }
  return all_ok ? 0 : 1;
}
