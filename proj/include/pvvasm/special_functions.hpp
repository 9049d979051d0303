#pragma once

namespace pvvasm::special {

// Regularized lower incomplete gamma P(a, x) and its complement Q(a, x).
// Relative accuracy is ~1e-14 for a up to ~1e5.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double chi_square_cdf(double df, double x);

// q with chi_square_cdf(df, q) == p; p in (0, 1), df > 0.
// Inverts gamma_p by safeguarded Newton iteration in log(x).
double chi_square_lower_quantile(double df, double p);

}  // namespace pvvasm::special
