#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "cboc/bernstein.hpp"

namespace cboc {

/// Strictly increasing time knots t_0 < t_1 < ... < t_K.
struct KnotVector {
  std::vector<double> times;

  explicit KnotVector(std::vector<double> ts);

  int segment_count() const { return static_cast<int>(times.size()) - 1; }
  double t0() const { return times.front(); }
  double tf() const { return times.back(); }
  double width(int k) const { return times[k + 1] - times[k]; }
  double max_width() const;

  /// C_t = K * max segment width, so |t_k - t_{k-1}| <= C_t / K always holds.
  double horizon_constant() const { return segment_count() * max_width(); }

  Interval segment_interval(int k) const { return Interval(times[k], times[k + 1]); }

  /// Index of the segment owning t, assigning interior knots to the segment
  /// on their right. Throws std::domain_error outside [t_0, t_K].
  int segment_of(double t) const;
};

/// K+1 equispaced knots over [t0, tf].
KnotVector uniform_knots(double t0, double tf, int K);

/// Piecewise Bernstein curve: K segments of common order and dimension
/// tiling a knot vector.
struct CompositeCurve {
  KnotVector knots;
  std::vector<BernsteinSegment> segments;

  CompositeCurve(KnotVector kv, std::vector<BernsteinSegment> segs);

  int dim() const { return segments.front().dim(); }
  int order() const { return segments.front().order(); }

  /// Builds a curve from stacked coefficients, dim x K(N+1); columns
  /// [k(N+1), (k+1)(N+1)) belong to segment k.
  static CompositeCurve from_coefficients(const KnotVector& kv,
                                          const Eigen::MatrixXd& stacked, int N);

  /// dim x K(N+1) matrix of all segment coefficients side by side.
  Eigen::MatrixXd stacked_coefficients() const;
};

/// Value at t; interior knots take the right segment's value.
Eigen::VectorXd curve_eval(const CompositeCurve& c, double t);

/// Left limit: same as curve_eval except at interior knots, where the left
/// segment's endpoint value is returned.
Eigen::VectorXd curve_eval_left(const CompositeCurve& c, double t);

/// Per-segment derivative, order N-1.
CompositeCurve curve_derivative(const CompositeCurve& c);

/// Same polynomial re-expressed one order higher on every segment.
CompositeCurve curve_elevate(const CompositeCurve& c);

/// Sum of segment integrals: sum_k w_k sum_j coeffs, w_k = width/(N+1).
Eigen::VectorXd curve_integral(const CompositeCurve& c);

/// Composite Bernstein approximant of f: segment k coefficients are f
/// sampled at the N+1 equispaced nodes t_{k,j} = t_{k-1} + (j/N) width.
/// Shared knot samples are evaluated once, so the curve is C0 by
/// construction.
CompositeCurve approximant(const std::function<Eigen::VectorXd(double)>& f,
                           const KnotVector& knots, int N);

struct SampleRow {
  double t;
  bool left_limit;
  Eigen::VectorXd value;
};

/// n equispaced samples including both endpoints. Grid points on interior
/// knots take the right value; every interior knot additionally gets a
/// left-limit row (and a right row if the grid missed it) so jumps are
/// visible in the output.
std::vector<SampleRow> sample_curve(const CompositeCurve& c, int n);

}  // namespace cboc
