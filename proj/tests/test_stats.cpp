#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "swarmneat/stats.hpp"

using namespace swarmneat;

namespace {

// Composite Simpson integration of the t density from 0 to |t|.
double t_cdf_by_quadrature(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int n = 20000;
  const double a = std::abs(t), h = a / n;
  double s = pdf(0) + pdf(a);
  for (int i = 1; i < n; ++i) s += pdf(i * h) * (i % 2 ? 4 : 2);
  const double half = s * h / 3;
  return t >= 0 ? 0.5 + half : 0.5 - half;
}

}  // namespace

// Reference values below were computed with an independent statistics
// package (t-test from summary statistics, Student t CDF, incomplete beta).

TEST_CASE("Welch test on summary statistics") {
  const auto r = welch_t_test({16.70, 1.12, 60}, {16.72, 1.32, 60});
  CHECK(r.p > 0.9);
  CHECK(r.p == doctest::Approx(0.9288478698145232).epsilon(1e-9));
  CHECK(r.t == doctest::Approx(-0.08949046007969015).epsilon(1e-9));

  const auto s = welch_t_test({2.53, 0.2, 60}, {2.62, 0.15, 60});
  CHECK(s.t == doctest::Approx(-2.7885480092693493).epsilon(1e-9));
  CHECK(s.p == doctest::Approx(0.00624546792142423).epsilon(1e-7));
}

TEST_CASE("Welch test on raw samples") {
  const std::vector<double> a{1, 2, 3, 4, 5.5};
  const std::vector<double> b{2, 4, 6, 8.25, 9, 11};
  const auto r = welch_t_test(a, b);
  CHECK(r.t == doctest::Approx(-2.292032158431033).epsilon(1e-9));
  CHECK(r.p == doctest::Approx(0.052065723108629405).epsilon(1e-8));
  const auto swapped = welch_t_test(b, a);
  CHECK(swapped.t == doctest::Approx(-r.t));
  CHECK(swapped.p == doctest::Approx(r.p));
}

TEST_CASE("summaries") {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  const auto s = summarize(x);
  CHECK(s.mean == 5.0);
  CHECK(s.stdev == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(s.n == 8);
  const std::vector<double> one{1.0};
  CHECK_THROWS(summarize(one));
}

TEST_CASE("degenerate variance") {
  const auto same = welch_t_test({3.0, 0.0, 10}, {3.0, 0.0, 10});
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
  const auto diff = welch_t_test({3.0, 0.0, 10}, {4.0, 0.0, 10});
  CHECK(std::isinf(diff.t));
  CHECK(diff.p == 0.0);
}

TEST_CASE("incomplete beta and t CDF reference values") {
  CHECK(incomplete_beta(2.5, 3.5, 0.4) == doctest::Approx(0.4869041915261176).epsilon(1e-10));
  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3));
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  CHECK(student_t_cdf(-1.5, 7.3) == doctest::Approx(0.08778154640154301).epsilon(1e-10));
  CHECK(student_t_cdf(2.2, 3.0) == doctest::Approx(0.9424140240117647).epsilon(1e-10));
  CHECK(student_t_cdf(0.0, 5.0) == 0.5);
}

TEST_CASE("property: t CDF agrees with numerical integration") {
  for (double df : {1.0, 2.5, 7.0, 30.0, 118.0})
    for (double t : {-4.0, -1.3, -0.2, 0.5, 1.9, 3.3}) {
      CAPTURE(df);
      CAPTURE(t);
      CHECK(student_t_cdf(t, df) == doctest::Approx(t_cdf_by_quadrature(t, df)).epsilon(1e-8));
    }
}
