#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cboc/composite.hpp"

namespace cboc {

using VectorFn = std::function<Eigen::VectorXd(double)>;

/// A test function together with its analytic derivatives: derivs[m] is the
/// m-th derivative (derivs[0] is the function itself).
struct SmoothTestFunction {
  std::string label;
  Interval domain{0.0, 1.0};
  std::vector<VectorFn> derivs;

  int max_order() const { return static_cast<int>(derivs.size()) - 1; }
  const VectorFn& deriv(int m) const;
};

/// Wraps scalar callables into a 1-dimensional SmoothTestFunction.
SmoothTestFunction scalar_test_function(std::string label, Interval domain,
                                        std::vector<std::function<double(double)>> derivs);

/// Built-in suite on [0,1]: "sin2pi", "poly2", "exp", "linear".
SmoothTestFunction test_function(const std::string& name);
std::vector<std::string> test_function_names();

/// Spot check that derivs[m+1] is the derivative of derivs[m] by central
/// differences at `points` interior samples.
bool check_derivative_consistency(const SmoothTestFunction& f, int points = 10,
                                  double rel_tol = 1e-4);

/// Computable constants entering the error bounds. Sup norms are grid maxima
/// of analytic derivatives; B2/B3 use the maximum over knots, a conservative
/// stand-in for the left-endpoint maxima in the bound statement.
struct BoundConstants {
  double A = 0.0;
  double B1 = 0.0, B2 = 0.0, B3 = 0.0;
  double C = 0.0;
  double Ct = 0.0;
  std::map<int, double> maxAbsDeriv;  // derivative order -> grid sup norm
};

/// Grid maxima understate true sups by O(grid^-2); comparisons against the
/// bounds absorb that with this factor.
inline constexpr double kBoundSafety = 1.01;

BoundConstants bound_constants(const SmoothTestFunction& f, const KnotVector& knots,
                               int r = 1, int gridSize = 10000);

/// A / (K^2 N): sup-norm bound on the approximant error for C^2 functions.
double lemma1_bound(const BoundConstants& c, int K, int N);

/// B1/(K^2 N) + B2/(K N) + B3/N: bound on the r-th derivative error.
double lemma2_bound(const BoundConstants& c, int r, int K, int N);

/// C / (K^2 N): bound on the integral error; equals Ct * lemma1_bound.
double lemma3_bound(const BoundConstants& c, int K, int N);

/// Max of ||curve(t) - f(t)||_inf over an equispaced grid plus both one-sided
/// values at every knot. gridSize must be >= 1000.
double empirical_sup_error(const VectorFn& f, const CompositeCurve& curve, int gridSize);

enum class RateMode { VaryK, VaryN };

struct ConvergenceRow {
  int K;
  int N;
  double supError;
  double bound;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double fittedSlopeK;
  double fittedSlopeN;
  bool exactlyRepresentable = false;
};

/// Sup-error sweep along K (with N = Ns.front()) or along N (with
/// K = Ks.front()), with the corresponding lemma-1 bound per row and a
/// least-squares log-log slope along the varied axis. Requires at least 4
/// points along that axis. Errors below 1e-12 everywhere flag the function
/// as exactly representable and leave the slope NaN.
ConvergenceReport rate_study(const SmoothTestFunction& f, const std::vector<int>& Ks,
                             const std::vector<int>& Ns, RateMode mode,
                             int gridSize = 2000);

/// Ordinary least-squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cboc
