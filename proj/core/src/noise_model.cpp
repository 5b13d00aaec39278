// SPDX-License-Identifier: Apache-2.0
#include "pld/noise_model.hpp"

#include "pld/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pld {

void ScalarNoiseParams::validate() const {
  if (!(sigma_g >= 0.0) || !(sigma_h >= 0.0)) {
    throw std::invalid_argument("ScalarNoiseParams: variances must be non-negative");
  }
  if (!(curvature > 0.0)) throw std::invalid_argument("ScalarNoiseParams: curvature must be > 0");
  if (!(eta > 0.0)) throw std::invalid_argument("ScalarNoiseParams: eta must be > 0");
  if (!std::isfinite(rho_gh) || !std::isfinite(center)) {
    throw std::invalid_argument("ScalarNoiseParams: rho and center must be finite");
  }
  if (rho_gh * rho_gh > sigma_g * sigma_h * (1.0 + 1e-12)) {
    throw std::invalid_argument("ScalarNoiseParams: rho^2 exceeds sigma_g * sigma_h");
  }
}

double ScalarNoiseParams::kappa() const {
  if (sigma_h == 0.0) return std::numeric_limits<double>::infinity();
  return curvature / (eta * sigma_h);
}

double variance_at(const ScalarNoiseParams& p, double w) {
  const double d = w - p.center;
  return p.sigma_g + 2.0 * p.rho_gh * d + p.sigma_h * d * d;
}

double variance_slope_at(const ScalarNoiseParams& p, double w) {
  return 2.0 * p.rho_gh + 2.0 * p.sigma_h * (w - p.center);
}

double simplified_variance_at(const ScalarNoiseParams& p, double w) {
  const double d = w - p.center;
  return p.sigma_g + p.sigma_h * d * d;
}

double loss_form_variance(const ScalarNoiseParams& p, double loss_excess) {
  return p.sigma_g + 2.0 * p.sigma_h / p.curvature * loss_excess;
}

// ---------------------------------------------------------------------------

MultivariateNoiseParams::MultivariateNoiseParams(Matrix sigma_g, Matrix hessian, double kappa,
                                                 double eta, Vector center)
    : sigma_g_(std::move(sigma_g)),
      hessian_(std::move(hessian)),
      kappa_(kappa),
      eta_(eta),
      center_(std::move(center)) {
  const auto d = center_.size();
  if (d == 0) throw std::invalid_argument("MultivariateNoiseParams: empty center");
  if (sigma_g_.rows() != d || sigma_g_.cols() != d || hessian_.rows() != d ||
      hessian_.cols() != d) {
    throw std::invalid_argument("MultivariateNoiseParams: matrix shapes do not match center");
  }
  if (!(kappa_ > 0.0)) throw std::invalid_argument("MultivariateNoiseParams: kappa must be > 0");
  if (!(eta_ > 0.0)) throw std::invalid_argument("MultivariateNoiseParams: eta must be > 0");
  require_spd(sigma_g_, "MultivariateNoiseParams sigma_g");
  require_spd(hessian_, "MultivariateNoiseParams hessian");
  const Matrix shape = hessian_ * sigma_g_.llt().solve(Matrix::Identity(d, d));
  if (!is_symmetric(shape, 1e-10)) {
    throw std::invalid_argument(
        "MultivariateNoiseParams: H Sigma_g^-1 must be symmetric (H and Sigma_g must commute)");
  }
  shape_ = symmetrize(shape);
}

double MultivariateNoiseParams::quadratic_form(const Vector& w) const {
  if (w.size() != center_.size()) {
    throw std::invalid_argument("MultivariateNoiseParams: dimension mismatch");
  }
  const Vector d = w - center_;
  return d.dot(shape_ * d) / (eta_ * kappa_);
}

Matrix covariance_at(const MultivariateNoiseParams& params, const Vector& w) {
  return params.sigma_g() * (1.0 + params.quadratic_form(w));
}

Matrix diffusion_factor(const Matrix& cov) {
  require_spd(cov, "diffusion_factor");
  Eigen::LLT<Matrix> llt(symmetrize(cov));
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "diffusion_factor: Cholesky failed (smallest eigenvalue "
        << symmetric_eigenvalues(cov)(0) << ")";
    throw std::invalid_argument(msg.str());
  }
  return llt.matrixL();
}

Matrix sample_covariance(const std::vector<Vector>& samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("sample_covariance: need at least two samples");
  }
  // Shifted by the first sample: identical inputs give an exact zero.
  const Vector& shift = samples.front();
  const auto d = shift.size();
  Vector mean = Vector::Zero(d);
  for (const auto& s : samples) mean += s - shift;
  mean /= static_cast<double>(samples.size());
  Matrix cov = Matrix::Zero(d, d);
  for (const auto& s : samples) {
    const Vector c = (s - shift) - mean;
    cov.noalias() += c * c.transpose();
  }
  return cov / static_cast<double>(samples.size() - 1);
}

Matrix minibatch_gradient_covariance(const EmpiricalToyLoss& landscape, const Vector& w,
                                     std::size_t batch_size) {
  const std::size_t n = landscape.size();
  if (batch_size == 0 || batch_size > n) {
    throw std::invalid_argument("minibatch_gradient_covariance: batch_size must lie in [1, n]");
  }
  if (n == 1) return Matrix::Zero(2, 2);
  const Vector mean = landscape.gradient(w);
  Matrix pop = Matrix::Zero(2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = landscape.sample_gradient(w, i);
    const Vector c = Vector{{g[0], g[1]}} - mean;
    pop.noalias() += c * c.transpose();
  }
  pop /= static_cast<double>(n);
  const double b = static_cast<double>(batch_size);
  const double nn = static_cast<double>(n);
  return pop * ((nn - b) / (b * (nn - 1.0)));
}

// ---------------------------------------------------------------------------

QuadraticFit fit_quadratic(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_quadratic: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("fit_quadratic: need at least three points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix design(n, 3);
  Vector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[i];
    design(i, 2) = x[i] * x[i];
    rhs(i) = y[i];
  }
  QuadraticFit fit;
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < 3) throw std::invalid_argument("fit_quadratic: need three distinct x values");
  const Vector c = qr.solve(rhs);
  fit.c0 = c(0);
  fit.c1 = c(1);
  fit.c2 = c(2);
  const double mean = rhs.mean();
  const double ss_tot = (rhs.array() - mean).square().sum();
  const double ss_res = (design * c - rhs).squaredNorm();
  if (ss_tot <= 0.0) {
    fit.degenerate = true;
    fit.r_squared = 0.0;
  } else {
    fit.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  }
  return fit;
}

std::vector<double> symmetric_offsets(std::size_t per_side, double spacing) {
  std::vector<double> out;
  out.reserve(2 * per_side);
  for (std::size_t i = per_side; i >= 1; --i) out.push_back(-static_cast<double>(i) * spacing);
  for (std::size_t i = 1; i <= per_side; ++i) out.push_back(static_cast<double>(i) * spacing);
  return out;
}

NoiseScanResult scan_noise_trace(const EmpiricalToyLoss& landscape, const Vector& center,
                                 const Vector& direction, const NoiseScanConfig& config) {
  if (config.draws < 2) {
    throw std::invalid_argument("scan_noise_trace: draws must be >= 2 (covariance undefined)");
  }
  if (center.size() != 2 || direction.size() != 2) {
    throw std::invalid_argument("scan_noise_trace: center and direction must be 2-vectors");
  }
  if (!(direction.norm() > 0.0)) throw std::invalid_argument("scan_noise_trace: zero direction");
  const Vector unit = direction / direction.norm();

  NoiseScanResult result;
  result.offsets = config.offsets;
  result.traces.assign(config.offsets.size(), 0.0);
  parallel_for(config.offsets.size(), config.threads, [&](std::size_t i) {
    RngStream rng(config.master_seed, derive_stream(0x6e6f697365ull, i));
    const Vector w = center + config.offsets[i] * unit;
    std::vector<Vector> draws;
    draws.reserve(config.draws);
    for (std::size_t k = 0; k < config.draws; ++k) {
      draws.push_back(landscape.minibatch_gradient(w, config.batch_size, rng));
    }
    result.traces[i] = sample_covariance(draws).trace();
  });

  if (result.offsets.size() < 3) {
    result.degenerate = true;
    return result;
  }
  const QuadraticFit fit = fit_quadratic(result.offsets, result.traces);
  result.c0 = fit.c0;
  result.c1 = fit.c1;
  result.c2 = fit.c2;
  result.r_squared = fit.r_squared;
  result.degenerate = fit.degenerate || !(fit.c2 > 0.0);
  result.argmin_offset = result.degenerate ? 0.0 : -fit.c1 / (2.0 * fit.c2);
  return result;
}

}  // namespace pld
