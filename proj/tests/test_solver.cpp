#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cboc/solver.hpp"
#include "test_util.hpp"

using namespace cboc;

TEST_CASE("backend minimizes a bound-constrained quadratic") {
  NlpFunctions fns;
  fns.n = 6;
  fns.objective = [](const Eigen::VectorXd& z) { return z.squaredNorm(); };
  fns.lo = Eigen::VectorXd::Constant(6, -1.0);
  fns.hi = Eigen::VectorXd::Constant(6, 1.0);

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> start(-1.0, 1.0);
  Eigen::VectorXd z0(6);
  for (int i = 0; i < 6; ++i) z0[i] = start(rng);

  auto [z, stats] = backend("reference")->minimize(fns, z0, SolverConfig{});
  CHECK(stats.converged);
  CHECK(z.lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("backend handles an active inequality") {
  // minimize -z subject to z <= 3 within [0, 10]
  NlpFunctions fns;
  fns.n = 1;
  fns.n_ineq = 1;
  fns.objective = [](const Eigen::VectorXd& z) { return -z[0]; };
  fns.ineq = [](const Eigen::VectorXd& z) {
    Eigen::VectorXd g(1);
    g[0] = z[0] - 3.0;
    return g;
  };
  fns.lo = Eigen::VectorXd::Constant(1, 0.0);
  fns.hi = Eigen::VectorXd::Constant(1, 10.0);

  auto [z, stats] = backend("reference")->minimize(fns, Eigen::VectorXd::Constant(1, 0.5),
                                                   SolverConfig{});
  CHECK(stats.converged);
  CHECK(z[0] == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("backend registry") {
  CHECK_THROWS_AS(backend("nosuch"), std::invalid_argument);
  const auto names = backend_names();
  CHECK(std::find(names.begin(), names.end(), "reference") != names.end());
}

TEST_CASE("gradient operator") {
  auto sq = [](const Eigen::VectorXd& z) { return z.squaredNorm(); };
  Eigen::VectorXd z(2);
  z << 1.0, 2.0;
  const Eigen::VectorXd g = gradient(sq, z);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-6));

  auto constant = [](const Eigen::VectorXd&) { return 3.5; };
  CHECK(gradient(constant, z).lpNorm<Eigen::Infinity>() < 1e-8);

  auto bad = [](const Eigen::VectorXd& v) { return v[0] > 1.05 ? std::nan("") : v[0]; };
  Eigen::VectorXd z1(1);
  z1 << 1.05;
  CHECK_THROWS_AS(gradient(bad, z1, SolverConfig{.fd_step = 1e-3}), std::runtime_error);
}

TEST_CASE("gradient of the transcription objective cross-checks one-sided differences") {
  const OcProblem p = bangbang_problem();
  const TranscribedNlp nlp = transcribe(p, 1, 6);
  const Eigen::VectorXd z0 = initial_guess(p, nlp.layout());
  auto fn = [&nlp](const Eigen::VectorXd& z) { return nlp.objective(z); };
  const Eigen::VectorXd g = gradient(fn, z0);
  const double f0 = fn(z0);
  for (Eigen::Index i = 0; i < z0.size(); i += 5) {
    const double h = 1e-6 * std::max(1.0, std::abs(z0[i]));
    Eigen::VectorXd zp = z0;
    zp[i] += h;
    const double one_sided = (fn(zp) - f0) / h;
    CHECK(g[i] == doctest::Approx(one_sided).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("initial guess layout") {
  const OcProblem p = bangbang_problem();
  const TranscribedNlp nlp = transcribe(p, 1, 10);
  const Eigen::VectorXd z = initial_guess(p, nlp.layout());
  CHECK(z.size() == nlp.layout().total);  // fixed tf, K=1: no knot entries
  CHECK(z[nlp.layout().state_index(0, 0, 0)] == doctest::Approx(4.0));
  CHECK(z[nlp.layout().state_index(0, 10, 0)] == doctest::Approx(39.392));
  CHECK(z[nlp.layout().state_index(0, 5, 0)] ==
        doctest::Approx(4.0 + (39.392 - 4.0) * 0.5));
  for (int j = 0; j <= 10; ++j) {
    CHECK(z[nlp.layout().control_index(0, j, 0)] == doctest::Approx(1.0));
  }

  const OcProblem mp = motion_planning_problem();
  const TranscribedNlp mnlp = transcribe(mp, 2, 4);
  const Eigen::VectorXd mz = initial_guess(mp, mnlp.layout());
  CHECK(mz[mnlp.layout().state_index(0, 0, 3)] == doctest::Approx(180.0));
  CHECK(mz[mnlp.layout().state_index(1, 4, 3)] == doctest::Approx(0.0));
  CHECK(mz[mnlp.layout().total - 1] == doctest::Approx(mp.final_time.value));
}

TEST_CASE("bangbang K=1 N=10 cost matches the benchmark") {
  const OcProblem p = bangbang_problem();
  const TranscribedNlp nlp = transcribe(p, 1, 10);
  auto [z, stats] = solve(nlp, initial_guess(p, nlp.layout()));
  CHECK(stats.converged);
  CHECK(nlp.objective(z) == doctest::Approx(-59.35).epsilon(0.3 / 59.35));
}

TEST_CASE("cost improves with order toward the analytic optimum") {
  const OcProblem p = bangbang_problem();
  const test_util::BangBangOracle oracle;
  double prev = 1e9;
  for (int N : {4, 8, 14}) {
    const TranscribedNlp nlp = transcribe(p, 1, N);
    auto [z, stats] = solve(nlp, initial_guess(p, nlp.layout()));
    REQUIRE(stats.converged);
    const double cost = nlp.objective(z);
    CHECK(cost < prev + 1e-6);
    CHECK(cost > oracle.optimal_cost() - 0.05);  // single segment cannot beat the optimum
    prev = cost;
  }
}

TEST_CASE("solves are deterministic") {
  const OcProblem p = bangbang_problem();
  const TranscribedNlp nlp = transcribe(p, 1, 6);
  SolverConfig cfg;
  cfg.seed = 7;
  auto [z1, s1] = solve(nlp, initial_guess(p, nlp.layout()), cfg);
  auto [z2, s2] = solve(nlp, initial_guess(p, nlp.layout()), cfg);
  CHECK((z1 - z2).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(s1.inner_iters == s2.inner_iters);
}

TEST_CASE("out-of-bounds start is clipped with a warning") {
  const OcProblem p = bangbang_problem();
  const TranscribedNlp nlp = transcribe(p, 1, 4);
  Eigen::VectorXd z0 = initial_guess(p, nlp.layout());
  z0[nlp.layout().control_index(0, 0, 0)] = 5.0;  // above the control box
  auto [z, stats] = solve(nlp, z0);
  CHECK(!stats.warnings.empty());
  CHECK(stats.converged);
}
