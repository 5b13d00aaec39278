// SPDX-License-Identifier: Apache-2.0
#include "pld/stationary.hpp"

#include "pld/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pld {

namespace {

// log(Gamma(a) / Gamma(a + delta)), accurate for large a.
double log_gamma_ratio(double a, double delta) {
  return std::log(boost::math::tgamma_delta_ratio(a, delta));
}

}  // namespace

// ---------------------------------------------------------------------------
// PowerLawKappa1D

PowerLawKappa1D::PowerLawKappa1D(double kappa, double sigma_g, double sigma_h, double center)
    : kappa_(kappa), sigma_g_(sigma_g), sigma_h_(sigma_h), center_(center) {
  if (!(sigma_g_ > 0.0) || !(sigma_h_ > 0.0) || !std::isfinite(sigma_g_) ||
      !std::isfinite(sigma_h_)) {
    throw std::invalid_argument("PowerLawKappa1D: sigma_g and sigma_h must be positive");
  }
  if (!std::isfinite(center_)) throw std::invalid_argument("PowerLawKappa1D: center not finite");
  if (!(kappa_ > 0.5) || !std::isfinite(kappa_)) {
    std::ostringstream msg;
    msg << "PowerLawKappa1D: kappa = " << kappa_ << " is not normalizable (need kappa > 1/2)";
    throw NonNormalizableError(msg.str());
  }
  // Z = sqrt(sigma_g/sigma_h) * sqrt(pi) * Gamma(kappa - 1/2) / Gamma(kappa)
  log_z_ = 0.5 * std::log(sigma_g_ / sigma_h_) + 0.5 * std::log(std::numbers::pi) +
           log_gamma_ratio(kappa_ - 0.5, 0.5);
}

PowerLawKappa1D PowerLawKappa1D::from_noise(const ScalarNoiseParams& noise) {
  noise.validate();
  return PowerLawKappa1D(noise.kappa(), noise.sigma_g, noise.sigma_h, noise.center);
}

PowerLawKappa1D PowerLawKappa1D::from_scale(double kappa, double scale, double center) {
  if (!(scale > 0.0)) throw std::invalid_argument("PowerLawKappa1D: scale must be positive");
  if (!(kappa > 0.5)) throw NonNormalizableError("PowerLawKappa1D: need kappa > 1/2");
  // sigma_h / sigma_g = 1 / (s^2 (2 kappa - 1)); fix sigma_g = 1.
  return PowerLawKappa1D(kappa, 1.0, 1.0 / (scale * scale * (2.0 * kappa - 1.0)), center);
}

double PowerLawKappa1D::scale() const {
  return std::sqrt(sigma_g_ / (sigma_h_ * (2.0 * kappa_ - 1.0)));
}

double PowerLawKappa1D::width() const { return std::sqrt(sigma_g_ / sigma_h_); }

double PowerLawKappa1D::normalizer() const { return std::exp(log_z_); }

double PowerLawKappa1D::log_density(double w) const {
  const double d = w - center_;
  return -kappa_ * std::log1p(sigma_h_ / sigma_g_ * d * d) - log_z_;
}

double PowerLawKappa1D::density(double w) const { return std::exp(log_density(w)); }

double PowerLawKappa1D::unnormalized_density(double w) const {
  const double d = w - center_;
  return std::exp(-kappa_ * std::log1p(sigma_h_ / sigma_g_ * d * d));
}

double PowerLawKappa1D::cdf(double w) const {
  if (w == center_) return 0.5;
  // Integrate the nearer tail to keep relative accuracy in both tails.
  const auto f = [this](double x) { return density(x); };
  if (w < center_) return integrate_lower_tail(f, center_, scale(), w).value;
  const auto reflected = [this](double x) { return density(2.0 * center_ - x); };
  return 1.0 - integrate_lower_tail(reflected, center_, scale(), 2.0 * center_ - w).value;
}

double PowerLawKappa1D::quadrature_normalizer() const {
  return integrate_real_line([this](double x) { return unnormalized_density(x); }, center_,
                             scale(), 1e-12)
      .value;
}

double density_1d(const PowerLawKappa1D& dist, double w) { return dist.density(w); }

double normalizer_1d(const PowerLawKappa1D& dist) { return dist.normalizer(); }

std::vector<double> sample_1d(const PowerLawKappa1D& dist, std::size_t n, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("sample_1d: n must be >= 1");
  const double dof = 2.0 * dist.kappa() - 1.0;
  const double s = dist.scale();
  std::vector<double> out(n);
  for (auto& x : out) x = dist.center() + s * rng.student_t(dof);
  return out;
}

// ---------------------------------------------------------------------------
// PowerLawKappaMulti

PowerLawKappaMulti::PowerLawKappaMulti(double kappa, Matrix hessian, Matrix sigma_g, double eta,
                                       Vector center)
    : kappa_(kappa),
      hessian_(std::move(hessian)),
      sigma_g_(std::move(sigma_g)),
      eta_(eta),
      center_(std::move(center)) {
  const auto d = center_.size();
  if (d == 0) throw std::invalid_argument("PowerLawKappaMulti: empty center");
  if (hessian_.rows() != d || hessian_.cols() != d || sigma_g_.rows() != d ||
      sigma_g_.cols() != d) {
    throw std::invalid_argument("PowerLawKappaMulti: matrix shapes do not match center");
  }
  if (!(eta_ > 0.0)) throw std::invalid_argument("PowerLawKappaMulti: eta must be > 0");
  const double half_d = 0.5 * static_cast<double>(d);
  if (!(kappa_ > half_d) || !std::isfinite(kappa_)) {
    std::ostringstream msg;
    msg << "PowerLawKappaMulti: kappa = " << kappa_ << " is not normalizable (need kappa > d/2 = "
        << half_d << ")";
    throw NonNormalizableError(msg.str());
  }
  require_spd(hessian_, "PowerLawKappaMulti hessian");
  require_spd(sigma_g_, "PowerLawKappaMulti sigma_g");
  const Matrix shape = hessian_ * sigma_g_.llt().solve(Matrix::Identity(d, d));
  if (!is_symmetric(shape, 1e-10)) {
    throw std::invalid_argument("PowerLawKappaMulti: H Sigma_g^-1 must be symmetric");
  }
  shape_ = symmetrize(shape);
  const double log_det_shape = log_det_spd(hessian_) - log_det_spd(sigma_g_);
  log_z_ = half_d * std::log(eta_ * kappa_ * std::numbers::pi) +
           log_gamma_ratio(kappa_ - half_d, half_d) - 0.5 * log_det_shape;
}

double PowerLawKappaMulti::normalizer() const { return std::exp(log_z_); }

double PowerLawKappaMulti::log_density(const Vector& w) const {
  if (w.size() != center_.size()) {
    throw std::invalid_argument("PowerLawKappaMulti: dimension mismatch");
  }
  const Vector d = w - center_;
  return -kappa_ * std::log1p(d.dot(shape_ * d) / (eta_ * kappa_)) - log_z_;
}

double PowerLawKappaMulti::density(const Vector& w) const { return std::exp(log_density(w)); }

double density_multi(const PowerLawKappaMulti& dist, const Vector& w) { return dist.density(w); }

// ---------------------------------------------------------------------------
// FullStationary1D

FullStationary1D::FullStationary1D(const ScalarNoiseParams& noise) : noise_(noise) {
  noise_.validate();
  if (!(noise_.sigma_h > 0.0) || !(noise_.sigma_g > 0.0)) {
    throw std::invalid_argument("FullStationary1D: sigma_g and sigma_h must be positive");
  }
  radicand_ = 4.0 * noise_.sigma_h * noise_.sigma_g - 4.0 * noise_.rho_gh;
  if (!(radicand_ > 0.0)) {
    std::ostringstream msg;
    msg << "FullStationary1D: ArcTan radicand 4 sigma_h sigma_g - 4 rho = " << radicand_
        << " is not positive (the formula uses rho, not rho^2, as printed)";
    throw std::domain_error(msg.str());
  }
  if (!(noise_.kappa() > 0.5)) {
    throw NonNormalizableError("FullStationary1D: need H / (eta sigma_h) > 1/2");
  }
  if (noise_.rho_gh * noise_.rho_gh >= noise_.sigma_g * noise_.sigma_h) {
    throw std::domain_error("FullStationary1D: C(w) must stay positive (rho^2 < sigma_g sigma_h)");
  }
  // Peak sits near the minimum of C(w); the unnormalized density is
  // evaluated relative to its value there to avoid overflow.
  const double width =
      std::sqrt(noise_.sigma_g / (noise_.sigma_h * (2.0 * noise_.kappa() - 1.0)));
  const double shift = log_unnormalized(noise_.center);
  const auto f = [this, shift](double w) { return std::exp(log_unnormalized(w) - shift); };
  log_z_ = shift + std::log(integrate_real_line(f, noise_.center, width, 1e-12).value);
}

double FullStationary1D::log_unnormalized(double w) const {
  const double kappa = noise_.curvature / (noise_.eta * noise_.sigma_h);
  const double c = variance_at(noise_, w);
  const double slope = variance_slope_at(noise_, w);
  return -kappa * std::log(c) - kappa * 4.0 * noise_.rho_gh * std::atan(slope / std::sqrt(radicand_));
}

double FullStationary1D::log_density(double w) const { return log_unnormalized(w) - log_z_; }

double FullStationary1D::density(double w) const { return std::exp(log_density(w)); }

double density_full_1d(const FullStationary1D& dist, double w) { return dist.density(w); }

// ---------------------------------------------------------------------------
// Fokker-Planck residual

std::vector<double> finite_difference_weights(double x0, std::span<const double> stencil,
                                              int order) {
  const int n = static_cast<int>(stencil.size());
  if (n <= order) throw std::invalid_argument("finite_difference_weights: stencil too small");
  // c[k][j]: weight of stencil point j for the k-th derivative.
  std::vector<std::vector<double>> c(order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = stencil[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = stencil[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = stencil[i] - stencil[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c[order];
}

double fokker_planck_residual(const std::function<double(double)>& density,
                              const QuadraticBasin& landscape, const ScalarNoiseParams& noise,
                              std::span<const double> grid) {
  const std::size_t n = grid.size();
  if (n < 5) throw std::invalid_argument("fokker_planck_residual: grid needs >= 5 points");
  if (landscape.dim() != 1) {
    throw std::invalid_argument("fokker_planck_residual: landscape must be one-dimensional");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("fokker_planck_residual: grid must be strictly increasing");
    }
  }

  // Five-point stencil around i, shifted inwards at the ends.
  auto derivative = [&](const std::vector<double>& f, std::size_t i) {
    const std::size_t lo = std::clamp<std::size_t>(i < 2 ? 0 : i - 2, 0, n - 5);
    const auto w = finite_difference_weights(grid[i], grid.subspan(lo, 5), 1);
    double d = 0.0;
    for (std::size_t k = 0; k < 5; ++k) d += w[k] * f[lo + k];
    return d;
  };

  std::vector<double> p(n), g(n), c(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = density(grid[i]);
    g[i] = landscape.gradient(Vector::Constant(1, grid[i]))(0);
    c[i] = variance_at(noise, grid[i]);
    scale = std::max(scale, std::abs(p[i] * g[i]));
  }
  std::vector<double> flux(n);
  for (std::size_t i = 0; i < n; ++i) {
    flux[i] = p[i] * g[i] + 0.5 * noise.eta * c[i] * derivative(p, i);
  }
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) worst = std::max(worst, std::abs(derivative(flux, i)));
  if (!(scale > 0.0)) throw std::domain_error("fokker_planck_residual: p * g vanishes on the grid");
  return worst / scale;
}

}  // namespace pld
