#pragma once

namespace dyadsync {

/// I_x(a, b), the regularized incomplete beta function. a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// P(s, x), the regularized lower incomplete gamma function. s > 0, x >= 0.
double regularized_incomplete_gamma(double s, double x);

/// Q(s, x) = 1 - P(s, x), computed without cancellation in the upper tail.
double regularized_incomplete_gamma_upper(double s, double x);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Chi-square CDF.
double chi_square_cdf(double x, double df);

/// Chi-square upper tail P(X >= x).
double chi_square_sf(double x, double df);

}  // namespace dyadsync
