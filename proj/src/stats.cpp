#include "fairmeta/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fairmeta/errors.hpp"

namespace fairmeta {

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

struct DifferenceSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

DifferenceSummary summarize_differences(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw LengthMismatch("paired samples differ in length");
  if (a.size() < 2) throw TooFewPairs("paired comparison needs at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = b[i] - a[i];
    sum += diff[i];
  }
  const double mean = sum / static_cast<double>(n);
  double squares = 0.0;
  for (double d : diff) squares += (d - mean) * (d - mean);
  const double sd = std::sqrt(squares / static_cast<double>(n - 1));

  bool all_equal = true;
  for (double d : diff) all_equal = all_equal && d == diff.front();
  if (all_equal) {
    if (diff.front() != 0.0) {
      throw DegenerateVariance("paired differences have zero variance and non-zero mean");
    }
    return {0.0, 0.0, n};
  }
  return {mean, sd, n};
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("incomplete beta needs a, b > 0");
  if (x < 0.0 || x > 1.0) throw std::domain_error("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return regularized_incomplete_beta(dof / 2.0, 0.5, x);
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  const DifferenceSummary summary = summarize_differences(a, b);
  TTestResult result;
  result.degrees_of_freedom = static_cast<int>(summary.n) - 1;
  if (summary.sd == 0.0) return result;
  result.t_statistic = summary.mean / (summary.sd / std::sqrt(static_cast<double>(summary.n)));
  result.p_value = student_t_two_sided_p(result.t_statistic, result.degrees_of_freedom);
  return result;
}

double cohens_d_paired(std::span<const double> a, std::span<const double> b) {
  const DifferenceSummary summary = summarize_differences(a, b);
  if (summary.sd == 0.0) return 0.0;
  return summary.mean / summary.sd;
}

}  // namespace fairmeta
