// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace pld {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

using ScalarFunction = std::function<double(double)>;

// All routines below run double-exponential (tanh-sinh) quadrature. Infinite
// ranges are mapped to a finite angle through x = center + scale * tan(theta),
// which turns algebraic tails (1 + x^2)^-k into integrable endpoint
// behaviour cos(theta)^(2k-2).

QuadratureResult integrate_interval(const ScalarFunction& f, double lower, double upper,
                                    double rel_tol = 1e-11);

QuadratureResult integrate_real_line(const ScalarFunction& f, double center, double scale,
                                     double rel_tol = 1e-11);

/// Integral of f over (-inf, upper].
QuadratureResult integrate_lower_tail(const ScalarFunction& f, double center, double scale,
                                      double upper, double rel_tol = 1e-11);

}  // namespace pld
