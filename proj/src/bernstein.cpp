#include "cboc/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cboc {

Interval::Interval(double a_, double b_) : a(a_), b(b_) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) {
    throw std::invalid_argument("Interval: need finite b > a, got [" +
                                std::to_string(a_) + ", " + std::to_string(b_) + "]");
  }
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c *= static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return c;
}

double basis_eval(int j, int N, const Interval& iv, double t) {
  if (N < 0 || j < 0 || j > N) {
    throw std::domain_error("basis_eval: index j=" + std::to_string(j) +
                            " outside 0.." + std::to_string(N));
  }
  if (!iv.contains(t)) {
    throw std::domain_error("basis_eval: t=" + std::to_string(t) + " outside [" +
                            std::to_string(iv.a) + ", " + std::to_string(iv.b) + "]");
  }
  const double lam = (t - iv.a) / iv.width();
  return binomial(N, j) * std::pow(lam, j) * std::pow(1.0 - lam, N - j);
}

BernsteinSegment::BernsteinSegment(Interval iv, Eigen::MatrixXd c)
    : interval(iv), coeffs(std::move(c)) {
  if (coeffs.cols() < 1 || coeffs.rows() < 1) {
    throw std::invalid_argument("BernsteinSegment: empty coefficient matrix");
  }
  if (!coeffs.allFinite()) {
    throw std::invalid_argument("BernsteinSegment: non-finite coefficient");
  }
}

Eigen::VectorXd segment_eval(const BernsteinSegment& seg, double t) {
  if (!seg.interval.contains(t)) {
    throw std::domain_error("segment_eval: t=" + std::to_string(t) + " outside [" +
                            std::to_string(seg.interval.a) + ", " +
                            std::to_string(seg.interval.b) + "]");
  }
  const double lam = (t - seg.interval.a) / seg.interval.width();
  Eigen::MatrixXd w = seg.coeffs;
  for (int r = seg.order(); r >= 1; --r) {
    for (int c = 0; c < r; ++c) {
      w.col(c) = (1.0 - lam) * w.col(c) + lam * w.col(c + 1);
    }
  }
  return w.col(0);
}

Eigen::MatrixXd diff_matrix(int N, const Interval& iv) {
  if (N < 1) throw std::invalid_argument("diff_matrix: degenerate order N=" + std::to_string(N));
  const double s = static_cast<double>(N) / iv.width();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(N + 1, N);
  for (int j = 0; j < N; ++j) {
    d(j, j) = -s;
    d(j + 1, j) = s;
  }
  return d;
}

Eigen::MatrixXd elevation_matrix(int N) {
  if (N < 1) throw std::invalid_argument("elevation_matrix: degenerate order N=" + std::to_string(N));
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(N, N + 1);
  for (int i = 0; i <= N; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(N);
    if (i > 0) e(i - 1, i) = w;
    if (i < N) e(i, i) = 1.0 - w;
  }
  return e;
}

Eigen::VectorXd segment_integral(const BernsteinSegment& seg) {
  const double w = seg.interval.width() / static_cast<double>(seg.order() + 1);
  return w * seg.coeffs.rowwise().sum();
}

}  // namespace cboc
