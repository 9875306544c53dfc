#include "swarmneat/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace swarmneat {

SampleSummary summarize(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("summarize: need at least two samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)), n};
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
static double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast for x < (a + 1) / (a + b + 2); use the
  // symmetry I_x(a, b) = 1 - I_{1-x}(b, a) otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_cdf: df must be > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

WelchResult welch_t_test(const SampleSummary& a, const SampleSummary& b) {
  if (a.n < 2.0 || b.n < 2.0) throw std::invalid_argument("welch_t_test: need n >= 2 per sample");
  const double va = a.stdev * a.stdev / a.n;
  const double vb = b.stdev * b.stdev / b.n;
  const double se2 = va + vb;
  WelchResult r;
  if (se2 == 0.0) {
    r.df = a.n + b.n - 2.0;
    if (a.mean == b.mean) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = a.mean > b.mean ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = (a.mean - b.mean) / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (a.n - 1.0) + vb * vb / (b.n - 1.0));
  r.p = incomplete_beta(0.5 * r.df, 0.5, r.df / (r.df + r.t * r.t));
  return r;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  return welch_t_test(summarize(a), summarize(b));
}

}  // namespace swarmneat
