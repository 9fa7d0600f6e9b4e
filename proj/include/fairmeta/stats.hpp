#pragma once

#include <span>

namespace fairmeta {

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;  // two-sided
  int degrees_of_freedom = 0;
};

/// Regularized incomplete beta function I_x(a, b), for a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// Paired t-test on differences d_i = b_i - a_i with the sample standard
/// deviation. Identical samples give t = 0, p = 1.
/// Throws LengthMismatch, TooFewPairs (n < 2), DegenerateVariance (all
/// differences equal and non-zero).
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Paired effect size d_z = mean(b - a) / sd(b - a). Same error contract as
/// paired_t_test; identical samples give 0.
double cohens_d_paired(std::span<const double> a, std::span<const double> b);

}  // namespace fairmeta
