#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cboc/bernstein.hpp"
#include "test_util.hpp"

using namespace cboc;

TEST_CASE("basis_eval matches the closed form") {
  const Interval unit(0.0, 1.0);
  CHECK(basis_eval(0, 3, unit, 0.0) == doctest::Approx(1.0));
  CHECK(basis_eval(1, 2, unit, 0.5) == doctest::Approx(0.5));
  CHECK(basis_eval(2, 2, Interval(0.0, 2.0), 1.0) == doctest::Approx(0.25));
}

TEST_CASE("basis_eval rejects bad arguments") {
  const Interval unit(0.0, 1.0);
  CHECK_THROWS_AS(basis_eval(3, 2, unit, 0.5), std::domain_error);
  CHECK_THROWS_AS(basis_eval(-1, 2, unit, 0.5), std::domain_error);
  CHECK_THROWS_AS(basis_eval(0, 2, unit, 1.5), std::domain_error);
  CHECK_THROWS_AS(Interval(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("binomial recurrence") {
  CHECK(binomial(4, 2) == doctest::Approx(6.0));
  CHECK(binomial(10, 0) == doctest::Approx(1.0));
  CHECK(binomial(70, 35) == doctest::Approx(1.1218627781666285e20).epsilon(1e-12));
}

TEST_CASE("partition of unity and non-negativity") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> order(1, 30);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int it = 0; it < 100; ++it) {
    const int N = order(rng);
    const Interval iv(-1.3, 2.7);
    const double t = iv.a + iv.width() * unit(rng);
    double sum = 0.0;
    for (int j = 0; j <= N; ++j) {
      const double b = basis_eval(j, N, iv, t);
      CHECK(b >= 0.0);
      sum += b;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("segment_eval spec values") {
  Eigen::MatrixXd c(1, 4);
  c << 3.5, 3.5, 3.5, 3.5;
  const BernsteinSegment constant(Interval(0.0, 1.0), c);
  CHECK(segment_eval(constant, 0.37)[0] == doctest::Approx(3.5));

  Eigen::MatrixXd lin(1, 2);
  lin << 0.0, 1.0;
  const BernsteinSegment linear(Interval(0.0, 1.0), lin);
  CHECK(segment_eval(linear, 0.3)[0] == doctest::Approx(0.3));

  Eigen::MatrixXd sq(1, 3);
  sq << 0.0, 0.25, 1.0;
  const BernsteinSegment square(Interval(0.0, 1.0), sq);
  CHECK(segment_eval(square, 0.5)[0] == doctest::Approx(0.375));

  CHECK_THROWS_AS(segment_eval(square, 1.01), std::domain_error);
}

TEST_CASE("segment_eval agrees with the direct formula and stays in the hull") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 100; ++it) {
    const int N = 1 + static_cast<int>(rng() % 12);
    const BernsteinSegment seg(Interval(0.5, 2.0), test_util::random_coeffs(rng, 2, N + 1));
    std::uniform_real_distribution<double> ts(0.5, 2.0);
    const double t = ts(rng);
    const Eigen::VectorXd v = segment_eval(seg, t);
    CHECK((v - test_util::direct_eval(seg, t)).lpNorm<Eigen::Infinity>() < 1e-12);
    for (int i = 0; i < 2; ++i) {
      CHECK(v[i] >= seg.coeffs.row(i).minCoeff() - 1e-12);
      CHECK(v[i] <= seg.coeffs.row(i).maxCoeff() + 1e-12);
    }
  }
}

TEST_CASE("endpoint interpolation is exact") {
  std::mt19937_64 rng(11);
  const BernsteinSegment seg(Interval(-2.0, 3.0), test_util::random_coeffs(rng, 3, 9));
  CHECK((segment_eval(seg, -2.0) - seg.coeffs.col(0)).norm() == 0.0);
  CHECK((segment_eval(seg, 3.0) - seg.coeffs.col(8)).norm() == 0.0);
}

TEST_CASE("diff_matrix spec values") {
  const Eigen::MatrixXd d = diff_matrix(2, Interval(0.0, 1.0));
  Eigen::MatrixXd want(3, 2);
  want << -2, 0, 2, -2, 0, 2;
  CHECK((d - want).lpNorm<Eigen::Infinity>() == 0.0);

  const Eigen::MatrixXd d2 = diff_matrix(2, Interval(0.0, 0.5));
  Eigen::MatrixXd want2(3, 2);
  want2 << -4, 0, 4, -4, 0, 4;
  CHECK((d2 - want2).lpNorm<Eigen::Infinity>() == 0.0);

  Eigen::RowVectorXd c(3);
  c << 5, 5, 5;
  CHECK((c * d).lpNorm<Eigen::Infinity>() == 0.0);

  CHECK_THROWS_AS(diff_matrix(0, Interval(0.0, 1.0)), std::invalid_argument);
}

TEST_CASE("derivative coefficients match finite differences") {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 100; ++it) {
    const int N = 2 + static_cast<int>(rng() % 8);
    const Interval iv(0.0, 2.0);
    const BernsteinSegment seg(iv, test_util::random_coeffs(rng, 1, N + 1));
    const BernsteinSegment dseg(iv, Eigen::MatrixXd(seg.coeffs * diff_matrix(N, iv)));
    std::uniform_real_distribution<double> ts(0.01, 1.99);
    const double t = ts(rng);
    const double h = 1e-6;
    const double fd = (segment_eval(seg, t + h)[0] - segment_eval(seg, t - h)[0]) / (2 * h);
    const double an = segment_eval(dseg, t)[0];
    CHECK(an == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("elevation_matrix spec values and exactness") {
  const Eigen::MatrixXd e1 = elevation_matrix(1);
  CHECK(e1.rows() == 1);
  CHECK(e1.cols() == 2);
  CHECK(e1(0, 0) == 1.0);
  CHECK(e1(0, 1) == 1.0);

  Eigen::RowVectorXd lin(2);
  lin << 0.0, 1.0;
  const Eigen::RowVectorXd up = lin * elevation_matrix(2);
  CHECK(up(0) == doctest::Approx(0.0));
  CHECK(up(1) == doctest::Approx(0.5));
  CHECK(up(2) == doctest::Approx(1.0));

  CHECK_THROWS_AS(elevation_matrix(0), std::invalid_argument);

  std::mt19937_64 rng(17);
  for (int it = 0; it < 100; ++it) {
    const int N = 1 + static_cast<int>(rng() % 10);
    const Interval iv(-1.0, 1.5);
    const BernsteinSegment seg(iv, test_util::random_coeffs(rng, 2, N + 1));
    const BernsteinSegment up_seg(iv, Eigen::MatrixXd(seg.coeffs * elevation_matrix(N + 1)));
    std::uniform_real_distribution<double> ts(-1.0, 1.5);
    for (int p = 0; p < 20; ++p) {
      const double t = ts(rng);
      CHECK((segment_eval(seg, t) - segment_eval(up_seg, t)).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }
}

TEST_CASE("segment_integral spec values") {
  Eigen::MatrixXd lin(1, 2);
  lin << 0.0, 1.0;
  CHECK(segment_integral(BernsteinSegment(Interval(0.0, 1.0), lin))[0] ==
        doctest::Approx(0.5));

  Eigen::MatrixXd c3(1, 5);
  c3.setConstant(3.0);
  CHECK(segment_integral(BernsteinSegment(Interval(1.0, 3.0), c3))[0] == doctest::Approx(6.0));

  Eigen::MatrixXd sq(1, 3);
  sq << 0.0, 0.0, 1.0;
  CHECK(segment_integral(BernsteinSegment(Interval(0.0, 1.0), sq))[0] ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("segment_integral matches quadrature oracle") {
  std::mt19937_64 rng(19);
  for (int it = 0; it < 100; ++it) {
    const int N = 1 + static_cast<int>(rng() % 9);
    const Interval iv(0.2, 1.7);
    const BernsteinSegment seg(iv, test_util::random_coeffs(rng, 1, N + 1));
    const double oracle =
        test_util::simpson([&](double t) { return segment_eval(seg, t)[0]; }, iv.a, iv.b, 4001);
    CHECK(segment_integral(seg)[0] == doctest::Approx(oracle).epsilon(1e-10));
  }
}
