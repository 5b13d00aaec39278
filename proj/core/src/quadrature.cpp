// SPDX-License-Identifier: Apache-2.0
#include "pld/quadrature.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pld {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

// f(center + scale * tan(theta)) * scale / cos^2(theta); `xc` is boost's
// signed distance to the nearest endpoint, used to keep cos(theta) accurate
// next to -pi/2 and +pi/2.
double tangent_integrand(const ScalarFunction& f, double center, double scale, double theta,
                         double xc, double lower, double upper) {
  double c, s;
  if (xc < 0.0 && lower == -kHalfPi) {
    c = std::sin(-xc);
    s = -std::cos(-xc);
  } else if (xc > 0.0 && upper == kHalfPi) {
    c = std::sin(xc);
    s = std::cos(xc);
  } else {
    c = std::cos(theta);
    s = std::sin(theta);
  }
  if (c <= 0.0) return 0.0;
  const double fx = f(center + scale * (s / c));
  if (fx == 0.0) return 0.0;
  return fx * scale / (c * c);
}

QuadratureResult run_tangent(const ScalarFunction& f, double center, double scale,
                             double lower, double upper, double rel_tol) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("quadrature: scale must be positive and finite");
  }
  boost::math::quadrature::tanh_sinh<double> integrator;
  QuadratureResult out;
  double l1 = 0.0;
  out.value = integrator.integrate(
      [&](double theta, double xc) {
        return tangent_integrand(f, center, scale, theta, xc, lower, upper);
      },
      lower, upper, rel_tol, &out.error, &l1);
  return out;
}

}  // namespace

QuadratureResult integrate_interval(const ScalarFunction& f, double lower, double upper,
                                    double rel_tol) {
  if (!(lower < upper)) throw std::invalid_argument("quadrature: empty interval");
  boost::math::quadrature::tanh_sinh<double> integrator;
  QuadratureResult out;
  double l1 = 0.0;
  out.value = integrator.integrate([&](double x) { return f(x); }, lower, upper, rel_tol,
                                   &out.error, &l1);
  return out;
}

QuadratureResult integrate_real_line(const ScalarFunction& f, double center, double scale,
                                     double rel_tol) {
  return run_tangent(f, center, scale, -kHalfPi, kHalfPi, rel_tol);
}

QuadratureResult integrate_lower_tail(const ScalarFunction& f, double center, double scale,
                                      double upper, double rel_tol) {
  const double theta_max = std::atan((upper - center) / scale);
  if (theta_max <= -kHalfPi) return {};
  return run_tangent(f, center, scale, -kHalfPi, theta_max, rel_tol);
}

}  // namespace pld
