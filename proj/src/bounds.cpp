#include "cboc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cboc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd scalar1(double v) {
  Eigen::VectorXd out(1);
  out << v;
  return out;
}

}  // namespace

const VectorFn& SmoothTestFunction::deriv(int m) const {
  if (m < 0 || m > max_order()) {
    throw std::invalid_argument("SmoothTestFunction '" + label + "': derivative order " +
                                std::to_string(m) + " not available (have 0.." +
                                std::to_string(max_order()) + ")");
  }
  return derivs[m];
}

SmoothTestFunction scalar_test_function(std::string label, Interval domain,
                                        std::vector<std::function<double(double)>> derivs) {
  SmoothTestFunction out{std::move(label), domain, {}};
  out.derivs.reserve(derivs.size());
  for (auto& d : derivs) {
    out.derivs.push_back([fn = std::move(d)](double t) { return scalar1(fn(t)); });
  }
  return out;
}

SmoothTestFunction test_function(const std::string& name) {
  const Interval unit(0.0, 1.0);
  const double w = 2.0 * std::numbers::pi;
  if (name == "sin2pi") {
    // m-th derivative of sin(wt) is w^m sin(wt + m pi/2)
    std::vector<std::function<double(double)>> d;
    for (int m = 0; m <= 3; ++m) {
      d.push_back([w, m](double t) {
        return std::pow(w, m) * std::sin(w * t + m * std::numbers::pi / 2.0);
      });
    }
    return scalar_test_function("sin2pi", unit, std::move(d));
  }
  if (name == "poly2") {
    return scalar_test_function("poly2", unit,
                                {[](double t) { return t * t; },
                                 [](double t) { return 2.0 * t; },
                                 [](double) { return 2.0; },
                                 [](double) { return 0.0; }});
  }
  if (name == "exp") {
    auto e = [](double t) { return std::exp(t); };
    return scalar_test_function("exp", unit, {e, e, e, e});
  }
  if (name == "linear") {
    return scalar_test_function("linear", unit,
                                {[](double t) { return 0.3 + 0.7 * t; },
                                 [](double) { return 0.7; },
                                 [](double) { return 0.0; },
                                 [](double) { return 0.0; }});
  }
  throw std::invalid_argument("test_function: unknown name '" + name +
                              "'; known: sin2pi, poly2, exp, linear");
}

std::vector<std::string> test_function_names() { return {"sin2pi", "poly2", "exp", "linear"}; }

bool check_derivative_consistency(const SmoothTestFunction& f, int points, double rel_tol) {
  const double span = f.domain.width();
  const double h = 1e-5 * span;
  for (int m = 0; m + 1 <= f.max_order(); ++m) {
    for (int i = 1; i <= points; ++i) {
      const double t = f.domain.a + span * static_cast<double>(i) / (points + 1);
      const Eigen::VectorXd fd = (f.deriv(m)(t + h) - f.deriv(m)(t - h)) / (2.0 * h);
      const Eigen::VectorXd an = f.deriv(m + 1)(t);
      const double scale = std::max(1.0, an.lpNorm<Eigen::Infinity>());
      if ((fd - an).lpNorm<Eigen::Infinity>() > rel_tol * scale) return false;
    }
  }
  return true;
}

BoundConstants bound_constants(const SmoothTestFunction& f, const KnotVector& knots, int r,
                               int gridSize) {
  if (r >= 1 && f.max_order() < r + 2) {
    throw std::invalid_argument("bound_constants: derivatives up to order " +
                                std::to_string(r + 2) + " required for r=" + std::to_string(r));
  }
  if (f.max_order() < 2) {
    throw std::invalid_argument("bound_constants: second derivative required");
  }

  BoundConstants c;
  c.Ct = knots.horizon_constant();

  auto grid_sup = [&](int order) {
    double m = 0.0;
    for (int i = 0; i < gridSize; ++i) {
      const double t =
          knots.t0() + (knots.tf() - knots.t0()) * static_cast<double>(i) / (gridSize - 1);
      m = std::max(m, f.deriv(order)(t).lpNorm<Eigen::Infinity>());
    }
    return m;
  };
  auto knot_sup = [&](int order) {
    double m = 0.0;
    for (double tk : knots.times) m = std::max(m, f.deriv(order)(tk).lpNorm<Eigen::Infinity>());
    return m;
  };

  c.maxAbsDeriv[2] = grid_sup(2);
  c.A = c.Ct * c.Ct / 8.0 * c.maxAbsDeriv[2];
  c.C = c.Ct * c.A;

  if (r >= 1) {
    for (int m : {r, r + 1, r + 2}) {
      if (!c.maxAbsDeriv.count(m)) c.maxAbsDeriv[m] = grid_sup(m);
    }
    c.B1 = c.Ct * c.Ct * (r * r + 1) / 2.0 * c.maxAbsDeriv[r + 2];
    c.B2 = c.Ct * r * r / 2.0 * knot_sup(r + 1);
    c.B3 = r * (r - 1) / 2.0 * knot_sup(r);
  }
  return c;
}

double lemma1_bound(const BoundConstants& c, int K, int N) {
  if (K < 1 || N < 1) throw std::invalid_argument("lemma1_bound: need K, N >= 1");
  return c.A / (static_cast<double>(K) * K * N);
}

double lemma2_bound(const BoundConstants& c, int r, int K, int N) {
  if (r < 1) throw std::invalid_argument("lemma2_bound: r must be >= 1 (use lemma1_bound)");
  if (K < 1 || N < 1) throw std::invalid_argument("lemma2_bound: need K, N >= 1");
  const double k = K;
  return c.B1 / (k * k * N) + c.B2 / (k * N) + c.B3 / N;
}

double lemma3_bound(const BoundConstants& c, int K, int N) {
  if (K < 1 || N < 1) throw std::invalid_argument("lemma3_bound: need K, N >= 1");
  return c.C / (static_cast<double>(K) * K * N);
}

double empirical_sup_error(const VectorFn& f, const CompositeCurve& curve, int gridSize) {
  if (gridSize < 1000) throw std::invalid_argument("empirical_sup_error: gridSize must be >= 1000");
  const double t0 = curve.knots.t0();
  const double tf = curve.knots.tf();

  double sup = 0.0;
  auto take = [&](const Eigen::VectorXd& cv, const Eigen::VectorXd& fv) {
    const double e = (cv - fv).lpNorm<Eigen::Infinity>();
    if (!std::isfinite(e)) throw std::runtime_error("empirical_sup_error: non-finite sample");
    sup = std::max(sup, e);
  };

  for (int i = 0; i < gridSize; ++i) {
    double t = t0 + (tf - t0) * static_cast<double>(i) / (gridSize - 1);
    if (i == gridSize - 1) t = tf;
    take(curve_eval(curve, t), f(t));
  }
  for (double tk : curve.knots.times) {
    const Eigen::VectorXd fv = f(tk);
    take(curve_eval(curve, tk), fv);
    take(curve_eval_left(curve, tk), fv);
  }
  return sup;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("ols_slope: need two equally sized samples");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceReport rate_study(const SmoothTestFunction& f, const std::vector<int>& Ks,
                             const std::vector<int>& Ns, RateMode mode, int gridSize) {
  if (Ks.empty() || Ns.empty()) throw std::invalid_argument("rate_study: empty K or N list");
  const std::vector<int>& varied = (mode == RateMode::VaryK) ? Ks : Ns;
  if (varied.size() < 4) {
    throw std::invalid_argument("rate_study: need >= 4 points along the varied axis");
  }

  ConvergenceReport report;
  report.fittedSlopeK = kNaN;
  report.fittedSlopeN = kNaN;

  std::vector<double> logx, logerr;
  for (int v : varied) {
    const int K = (mode == RateMode::VaryK) ? v : Ks.front();
    const int N = (mode == RateMode::VaryK) ? Ns.front() : v;
    const KnotVector knots = uniform_knots(f.domain.a, f.domain.b, K);
    const CompositeCurve curve = approximant(f.deriv(0), knots, N);
    const double err = empirical_sup_error(f.deriv(0), curve, gridSize);
    const double bound = lemma1_bound(bound_constants(f, knots, 1), K, N);
    report.rows.push_back(ConvergenceRow{K, N, err, bound});
    logx.push_back(std::log(static_cast<double>(v)));
    logerr.push_back(std::log(std::max(err, 1e-300)));
  }

  report.exactlyRepresentable =
      std::all_of(report.rows.begin(), report.rows.end(),
                  [](const ConvergenceRow& r) { return r.supError < 1e-12; });
  if (!report.exactlyRepresentable) {
    const double slope = ols_slope(logx, logerr);
    if (mode == RateMode::VaryK) {
      report.fittedSlopeK = slope;
    } else {
      report.fittedSlopeN = slope;
    }
  }
  return report;
}

}  // namespace cboc
