#include "cboc/composite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cboc {

KnotVector::KnotVector(std::vector<double> ts) : times(std::move(ts)) {
  if (times.size() < 2) {
    throw std::invalid_argument("KnotVector: need at least 2 knots");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw std::invalid_argument("KnotVector: non-finite knot");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("KnotVector: knots not strictly increasing at index " +
                                  std::to_string(i));
    }
  }
}

double KnotVector::max_width() const {
  double w = 0.0;
  for (int k = 0; k < segment_count(); ++k) w = std::max(w, width(k));
  return w;
}

int KnotVector::segment_of(double t) const {
  if (t < t0() || t > tf()) {
    throw std::domain_error("KnotVector: t=" + std::to_string(t) + " outside [" +
                            std::to_string(t0()) + ", " + std::to_string(tf()) + "]");
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  int k = static_cast<int>(it - times.begin()) - 1;
  return std::min(k, segment_count() - 1);
}

KnotVector uniform_knots(double t0, double tf, int K) {
  if (K < 1) throw std::invalid_argument("uniform_knots: K must be >= 1");
  if (!(tf > t0)) throw std::invalid_argument("uniform_knots: need tf > t0");
  std::vector<double> ts(K + 1);
  for (int k = 0; k <= K; ++k) {
    ts[k] = t0 + (tf - t0) * static_cast<double>(k) / static_cast<double>(K);
  }
  ts[0] = t0;
  ts[K] = tf;
  return KnotVector(std::move(ts));
}

CompositeCurve::CompositeCurve(KnotVector kv, std::vector<BernsteinSegment> segs)
    : knots(std::move(kv)), segments(std::move(segs)) {
  if (static_cast<int>(segments.size()) != knots.segment_count()) {
    throw std::invalid_argument("CompositeCurve: segment count does not match knots");
  }
  for (int k = 0; k < knots.segment_count(); ++k) {
    const auto& seg = segments[k];
    if (seg.interval.a != knots.times[k] || seg.interval.b != knots.times[k + 1]) {
      throw std::invalid_argument("CompositeCurve: segment " + std::to_string(k) +
                                  " does not tile the knot vector");
    }
    if (seg.dim() != segments.front().dim() || seg.order() != segments.front().order()) {
      throw std::invalid_argument("CompositeCurve: segments disagree on dim or order");
    }
  }
}

CompositeCurve CompositeCurve::from_coefficients(const KnotVector& kv,
                                                 const Eigen::MatrixXd& stacked, int N) {
  const int K = kv.segment_count();
  if (stacked.cols() != static_cast<Eigen::Index>(K) * (N + 1)) {
    throw std::invalid_argument("from_coefficients: expected " +
                                std::to_string(K * (N + 1)) + " columns, got " +
                                std::to_string(stacked.cols()));
  }
  std::vector<BernsteinSegment> segs;
  segs.reserve(K);
  for (int k = 0; k < K; ++k) {
    segs.emplace_back(kv.segment_interval(k), stacked.middleCols(k * (N + 1), N + 1));
  }
  return CompositeCurve(kv, std::move(segs));
}

Eigen::MatrixXd CompositeCurve::stacked_coefficients() const {
  const int n1 = order() + 1;
  Eigen::MatrixXd out(dim(), static_cast<Eigen::Index>(segments.size()) * n1);
  for (std::size_t k = 0; k < segments.size(); ++k) {
    out.middleCols(static_cast<Eigen::Index>(k) * n1, n1) = segments[k].coeffs;
  }
  return out;
}

Eigen::VectorXd curve_eval(const CompositeCurve& c, double t) {
  return segment_eval(c.segments[c.knots.segment_of(t)], t);
}

Eigen::VectorXd curve_eval_left(const CompositeCurve& c, double t) {
  int k = c.knots.segment_of(t);
  // at an interior knot step back to the left segment
  if (k > 0 && t == c.knots.times[k]) k -= 1;
  return segment_eval(c.segments[k], t);
}

CompositeCurve curve_derivative(const CompositeCurve& c) {
  if (c.order() < 1) throw std::invalid_argument("curve_derivative: degenerate order 0");
  std::vector<BernsteinSegment> segs;
  segs.reserve(c.segments.size());
  for (const auto& seg : c.segments) {
    segs.emplace_back(seg.interval,
                      Eigen::MatrixXd(seg.coeffs * diff_matrix(seg.order(), seg.interval)));
  }
  return CompositeCurve(c.knots, std::move(segs));
}

CompositeCurve curve_elevate(const CompositeCurve& c) {
  std::vector<BernsteinSegment> segs;
  segs.reserve(c.segments.size());
  const Eigen::MatrixXd e = elevation_matrix(c.order() + 1);
  for (const auto& seg : c.segments) {
    segs.emplace_back(seg.interval, Eigen::MatrixXd(seg.coeffs * e));
  }
  return CompositeCurve(c.knots, std::move(segs));
}

Eigen::VectorXd curve_integral(const CompositeCurve& c) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(c.dim());
  for (const auto& seg : c.segments) total += segment_integral(seg);
  return total;
}

CompositeCurve approximant(const std::function<Eigen::VectorXd(double)>& f,
                           const KnotVector& knots, int N) {
  if (N < 1) throw std::invalid_argument("approximant: order N must be >= 1");
  const int K = knots.segment_count();

  auto sample = [&f](double t) {
    Eigen::VectorXd v = f(t);
    if (!v.allFinite()) {
      throw std::runtime_error("approximant: non-finite sample at t=" + std::to_string(t));
    }
    return v;
  };

  // knot samples shared by adjacent segments
  std::vector<Eigen::VectorXd> at_knot(K + 1);
  for (int k = 0; k <= K; ++k) at_knot[k] = sample(knots.times[k]);
  const int dim = static_cast<int>(at_knot[0].size());

  std::vector<BernsteinSegment> segs;
  segs.reserve(K);
  for (int k = 0; k < K; ++k) {
    const double a = knots.times[k];
    const double h = knots.width(k);
    Eigen::MatrixXd coeffs(dim, N + 1);
    coeffs.col(0) = at_knot[k];
    for (int j = 1; j < N; ++j) {
      coeffs.col(j) = sample(a + h * static_cast<double>(j) / static_cast<double>(N));
    }
    coeffs.col(N) = at_knot[k + 1];
    segs.emplace_back(knots.segment_interval(k), std::move(coeffs));
  }
  return CompositeCurve(knots, std::move(segs));
}

std::vector<SampleRow> sample_curve(const CompositeCurve& c, int n) {
  if (n < 2) throw std::invalid_argument("sample_curve: need n >= 2");
  const double t0 = c.knots.t0();
  const double tf = c.knots.tf();

  // events: (time, 0=left-limit row, 1=value row)
  std::vector<std::pair<double, int>> events;
  events.reserve(n + 2 * (c.knots.segment_count() - 1));
  for (int i = 0; i < n; ++i) {
    double t = t0 + (tf - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
    if (i == n - 1) t = tf;
    events.emplace_back(t, 1);
  }
  for (int k = 1; k < c.knots.segment_count(); ++k) {
    const double tk = c.knots.times[k];
    events.emplace_back(tk, 0);
    const bool have_value_row =
        std::any_of(events.begin(), events.end(),
                    [tk](const auto& e) { return e.second == 1 && e.first == tk; });
    if (!have_value_row) events.emplace_back(tk, 1);
  }
  std::sort(events.begin(), events.end());

  std::vector<SampleRow> rows;
  rows.reserve(events.size());
  for (const auto& [t, kind] : events) {
    rows.push_back(SampleRow{t, kind == 0,
                             kind == 0 ? curve_eval_left(c, t) : curve_eval(c, t)});
  }
  return rows;
}

}  // namespace cboc
