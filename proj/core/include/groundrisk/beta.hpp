#pragma once

namespace groundrisk {

/// Regularized incomplete beta function I_x(a, b), evaluated with the
/// modified Lentz continued fraction. Requires a, b > 0 and x in [0, 1].
double incomplete_beta(double x, double a, double b);

/// q-quantile of Beta(a, b): the x with I_x(a, b) = q, found by bisection
/// until the bracket is narrower than `tolerance`.
double beta_quantile(double q, double a, double b, double tolerance = 1e-12);

}  // namespace groundrisk
