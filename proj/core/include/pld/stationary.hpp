// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pld/landscape.hpp"
#include "pld/linalg.hpp"
#include "pld/noise_model.hpp"
#include "pld/rng.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pld {

/// Thrown when the requested tail index makes a density non-integrable.
class NonNormalizableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Power-law kappa (q-Gaussian) density
///
///   p(w) = (1/Z) (1 + sigma_h/sigma_g (w - w*)^2)^-kappa,
///   Z = sqrt(sigma_g/sigma_h) B(1/2, kappa - 1/2),
///
/// the stationary law of the one-dimensional power-law dynamic. Equivalent
/// to w* + s T with T Student-t on 2 kappa - 1 degrees of freedom and
/// s^2 = sigma_g / (sigma_h (2 kappa - 1)).
class PowerLawKappa1D {
 public:
  PowerLawKappa1D(double kappa, double sigma_g, double sigma_h, double center = 0.0);

  /// kappa = H / (eta sigma_h) from a noise model with rho = 0 semantics.
  static PowerLawKappa1D from_noise(const ScalarNoiseParams& noise);
  /// Location-scale form: (1 + ((w - c)/s)^2 / (2 kappa - 1))^-kappa.
  static PowerLawKappa1D from_scale(double kappa, double scale, double center = 0.0);

  double kappa() const { return kappa_; }
  double sigma_g() const { return sigma_g_; }
  double sigma_h() const { return sigma_h_; }
  double center() const { return center_; }
  /// Student-t scale s.
  double scale() const;
  /// sqrt(sigma_g / sigma_h), the natural width of the density.
  double width() const;

  double log_normalizer() const { return log_z_; }
  double normalizer() const;
  double log_density(double w) const;
  double density(double w) const;
  double unnormalized_density(double w) const;
  /// CDF by adaptive quadrature of the density.
  double cdf(double w) const;
  /// Z by adaptive quadrature (independent of the closed form).
  double quadrature_normalizer() const;

 private:
  double kappa_, sigma_g_, sigma_h_, center_;
  double log_z_;
};

double density_1d(const PowerLawKappa1D& dist, double w);
double normalizer_1d(const PowerLawKappa1D& dist);
std::vector<double> sample_1d(const PowerLawKappa1D& dist, std::size_t n, RngStream& rng);

/// Multivariate power-law kappa density
///
///   p(w) = (1/Z) [1 + (w - w*)^T H Sigma_g^-1 (w - w*) / (eta kappa)]^-kappa,
///   Z = (eta kappa pi)^(d/2) Gamma(kappa - d/2) / (Gamma(kappa) sqrt(det(H Sigma_g^-1))).
class PowerLawKappaMulti {
 public:
  PowerLawKappaMulti(double kappa, Matrix hessian, Matrix sigma_g, double eta, Vector center);

  std::size_t dim() const { return static_cast<std::size_t>(center_.size()); }
  double kappa() const { return kappa_; }
  double eta() const { return eta_; }
  const Vector& center() const { return center_; }
  const Matrix& hessian() const { return hessian_; }
  const Matrix& sigma_g() const { return sigma_g_; }
  const Matrix& precision_shape() const { return shape_; }

  double log_normalizer() const { return log_z_; }
  double normalizer() const;
  double log_density(const Vector& w) const;
  double density(const Vector& w) const;

 private:
  double kappa_;
  Matrix hessian_, sigma_g_;
  double eta_;
  Vector center_;
  Matrix shape_;
  double log_z_;
};

double density_multi(const PowerLawKappaMulti& dist, const Vector& w);

/// Stationary density of the one-dimensional dynamic with the full noise
/// model (rho possibly nonzero):
///
///   p(w) ~ C(w)^(-H/(eta sigma_h))
///          * exp(-H * 4 rho * atan(C'(w) / sqrt(4 sigma_h sigma_g - 4 rho)) / (eta sigma_h)),
///
/// evaluated as printed; the radicand must be positive. Z is computed by
/// quadrature only.
class FullStationary1D {
 public:
  explicit FullStationary1D(const ScalarNoiseParams& noise);

  const ScalarNoiseParams& noise() const { return noise_; }
  double kappa() const { return noise_.kappa(); }
  double log_normalizer() const { return log_z_; }
  double log_unnormalized(double w) const;
  double log_density(double w) const;
  double density(double w) const;

 private:
  ScalarNoiseParams noise_;
  double radicand_;
  double log_z_ = 0.0;
};

double density_full_1d(const FullStationary1D& dist, double w);

/// Finite-difference weights for the `order`-th derivative at x0 over the
/// given stencil (Fornberg's recursion).
std::vector<double> finite_difference_weights(double x0, std::span<const double> stencil,
                                              int order);

/// Stationarity residual of the one-dimensional Fokker-Planck equation,
///
///   R(w) = d/dw [p g] + (eta/2) d/dw [C dp/dw],
///
/// from five-point finite differences of `density` sampled on `grid`.
/// Returns max |R| over grid points with a centred stencil, divided by
/// max p |g| over the grid.
double fokker_planck_residual(const std::function<double(double)>& density,
                              const QuadraticBasin& landscape, const ScalarNoiseParams& noise,
                              std::span<const double> grid);

}  // namespace pld
