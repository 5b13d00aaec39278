// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pld/landscape.hpp"
#include "pld/linalg.hpp"
#include "pld/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pld {

/// One-dimensional gradient-noise model around a minimum w*:
///
///   C(w) = sigma_g + 2 rho_gh (w - w*) + sigma_h (w - w*)^2
///
/// where sigma_g, sigma_h are the variances of the stochastic gradient and
/// stochastic Hessian at w* and rho_gh their covariance.
struct ScalarNoiseParams {
  double sigma_g = 1.0;
  double sigma_h = 0.0;
  double rho_gh = 0.0;
  double center = 0.0;
  double curvature = 1.0;
  double eta = 1.0;

  /// Throws std::invalid_argument unless sigma_g, sigma_h >= 0, curvature and
  /// eta > 0 and rho^2 <= sigma_g * sigma_h.
  void validate() const;
  /// Tail index H / (eta sigma_h); +inf when sigma_h == 0.
  double kappa() const;
};

double variance_at(const ScalarNoiseParams& params, double w);
/// d/dw of variance_at.
double variance_slope_at(const ScalarNoiseParams& params, double w);
/// The rho = 0 form sigma_g + sigma_h (w - w*)^2.
double simplified_variance_at(const ScalarNoiseParams& params, double w);
/// sigma_g + (2 sigma_h / H) * loss_excess, with loss_excess = L(w) - L(w*).
/// Equals simplified_variance_at on a quadratic basin of curvature H.
double loss_form_variance(const ScalarNoiseParams& params, double loss_excess);

/// Multivariate structured noise
///
///   C(w) = Sigma_g * (1 + (w - w*)^T H Sigma_g^-1 (w - w*) / (eta kappa)),
///
/// obtained when the Hessian noise satisfies eta Sigma_H = H / kappa.
class MultivariateNoiseParams {
 public:
  MultivariateNoiseParams(Matrix sigma_g, Matrix hessian, double kappa, double eta,
                          Vector center);

  std::size_t dim() const { return static_cast<std::size_t>(center_.size()); }
  const Matrix& sigma_g() const { return sigma_g_; }
  const Matrix& hessian() const { return hessian_; }
  double kappa() const { return kappa_; }
  double eta() const { return eta_; }
  const Vector& center() const { return center_; }
  /// H Sigma_g^-1, symmetrized after the constructor's symmetry check.
  const Matrix& precision_shape() const { return shape_; }

  /// The scalar (w - w*)^T H Sigma_g^-1 (w - w*) / (eta kappa).
  double quadratic_form(const Vector& w) const;

 private:
  Matrix sigma_g_;
  Matrix hessian_;
  double kappa_;
  double eta_;
  Vector center_;
  Matrix shape_;
};

Matrix covariance_at(const MultivariateNoiseParams& params, const Vector& w);

/// Lower-triangular Cholesky factor M with M M^T = cov. Non-SPD input throws
/// std::invalid_argument reporting the smallest eigenvalue.
Matrix diffusion_factor(const Matrix& cov);

/// Unbiased (n - 1) sample covariance of the rows of `samples`, accumulated
/// in row order.
Matrix sample_covariance(const std::vector<Vector>& samples);

/// Exact covariance of minibatch_gradient(w, batch_size) under sampling
/// without replacement: S (n - B) / (B (n - 1)), S the population covariance
/// (divisor n) of the per-sample gradients.
Matrix minibatch_gradient_covariance(const EmpiricalToyLoss& landscape, const Vector& w,
                                     std::size_t batch_size);

struct NoiseScanResult {
  std::vector<double> offsets;
  std::vector<double> traces;
  /// c0 + c1 x + c2 x^2 fitted by ordinary least squares.
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double r_squared = 0.0;
  double argmin_offset = 0.0;
  /// True when the fit carries no information (all traces equal, or c2 <= 0
  /// so there is no minimum).
  bool degenerate = false;
};

struct QuadraticFit {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double r_squared = 0.0;
  bool degenerate = false;
};

/// OLS fit of y = c0 + c1 x + c2 x^2; needs >= 3 distinct x.
QuadraticFit fit_quadratic(const std::vector<double>& x, const std::vector<double>& y);

struct NoiseScanConfig {
  std::vector<double> offsets;
  std::size_t batch_size = 1;
  std::size_t draws = 2000;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
};

/// Estimates Tr Cov(minibatch gradient) at center + offset * direction for
/// each offset, then fits a quadratic in the offset. Offset i draws from
/// stream derive_stream(master_seed, i), so results do not depend on the
/// thread count.
NoiseScanResult scan_noise_trace(const EmpiricalToyLoss& landscape, const Vector& center,
                                 const Vector& direction, const NoiseScanConfig& config);

/// Offsets +-(i * spacing) for i = 1..per_side, sorted ascending, the grid of
/// the covariance-trace experiment.
std::vector<double> symmetric_offsets(std::size_t per_side, double spacing);

}  // namespace pld
