#pragma once

#include <span>

namespace swarmneat {

struct SampleSummary {
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation (n - 1)
  double n = 0.0;
};

SampleSummary summarize(std::span<const double> samples);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Two-sample t-test with unequal variances. Zero pooled variance yields
// t = 0, p = 1 for equal means and t = +-inf, p = 0 otherwise.
WelchResult welch_t_test(const SampleSummary& a, const SampleSummary& b);
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);

}  // namespace swarmneat
