#pragma once

#include <Eigen/Core>

namespace cboc {

/// Closed time interval [a, b] with finite positive width.
struct Interval {
  double a;
  double b;

  Interval(double a_, double b_);

  double width() const { return b - a; }
  bool contains(double t) const { return t >= a && t <= b; }
};

/// Binomial coefficient C(n, k) by multiplicative recurrence in double
/// precision. Stays finite where 64-bit integers would overflow (n > 60).
double binomial(int n, int k);

/// Bernstein basis polynomial b_{j,N} on `iv`, evaluated at t.
///
/// Equals C(N,j) (t-a)^j (b-t)^{N-j} / (b-a)^N, computed on the normalized
/// parameter so interval width never enters a large power.
double basis_eval(int j, int N, const Interval& iv, double t);

/// One polynomial segment: a dim x (N+1) matrix of control points over an
/// interval. Column j is the j-th Bernstein coefficient.
struct BernsteinSegment {
  Interval interval;
  Eigen::MatrixXd coeffs;

  BernsteinSegment(Interval iv, Eigen::MatrixXd c);

  int order() const { return static_cast<int>(coeffs.cols()) - 1; }
  int dim() const { return static_cast<int>(coeffs.rows()); }
};

/// Segment value at t via the de Casteljau convex-combination recursion,
/// which is stable at orders where the direct binomial formula is not.
Eigen::VectorXd segment_eval(const BernsteinSegment& seg, double t);

/// (N+1) x N differentiation matrix with -N/(b-a) on the diagonal and
/// +N/(b-a) on the subdiagonal. Derivative coefficients of order N-1 are
/// coeffs * diff_matrix(N, iv).
Eigen::MatrixXd diff_matrix(int N, const Interval& iv);

/// N x (N+1) degree elevation matrix. Order N-1 coefficients times this
/// matrix give order-N coefficients of the identical polynomial:
/// new_i = (i/N) old_{i-1} + (1 - i/N) old_i.
Eigen::MatrixXd elevation_matrix(int N);

/// Exact integral of the segment over its interval:
/// (width/(N+1)) * sum of coefficient columns.
Eigen::VectorXd segment_integral(const BernsteinSegment& seg);

}  // namespace cboc
