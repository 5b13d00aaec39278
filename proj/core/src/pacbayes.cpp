// SPDX-License-Identifier: Apache-2.0
#include "pld/pacbayes.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <stdexcept>

namespace pld {

namespace {

double half_d(const BoundInputs& in) { return 0.5 * static_cast<double>(in.dim()); }

double denominator(const BoundInputs& in) {
  return 4.0 * (1.0 - (half_d(in) - 1.0) / in.kappa);
}

// Tr(eta Sigma_g H^-1) through a Cholesky solve of H.
double trace_term(const BoundInputs& in) {
  const Eigen::LLT<Matrix> llt(in.hessian);
  const Matrix h_inv_sigma = llt.solve(in.sigma_g);
  return in.eta * h_inv_sigma.trace();
}

}  // namespace

void BoundInputs::validate() const {
  const auto d = hessian.rows();
  if (d == 0 || hessian.cols() != d || sigma_g.rows() != d || sigma_g.cols() != d) {
    throw std::invalid_argument("BoundInputs: hessian and sigma_g must be square of equal size");
  }
  require_spd(hessian, "BoundInputs hessian");
  require_spd(sigma_g, "BoundInputs sigma_g");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("BoundInputs: eta must be > 0");
  if (!(kappa > 0.5 * static_cast<double>(d)) || !std::isfinite(kappa)) {
    throw std::invalid_argument("BoundInputs: kappa must exceed d/2");
  }
  if (!(1.0 - (0.5 * static_cast<double>(d) - 1.0) / kappa > 0.0)) {
    throw std::invalid_argument("BoundInputs: 1 - (d/2 - 1)/kappa must be positive");
  }
  if (n_samples < 2) throw std::invalid_argument("BoundInputs: n_samples must be >= 2");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("BoundInputs: delta must lie in (0, 1)");
  if (!(empirical_risk >= 0.0)) throw std::invalid_argument("BoundInputs: empirical_risk must be >= 0");
}

double kl_upper_bound(const BoundInputs& in) {
  in.validate();
  const double log_det_ratio = log_det_spd(in.hessian) - log_det_spd(in.sigma_g);
  return 0.5 * log_det_ratio + (trace_term(in) - 4.0 * half_d(in)) / denominator(in) +
         half_d(in) * std::log(2.0 / in.eta);
}

double kl_exact_form(const BoundInputs& in) {
  in.validate();
  const double d2 = half_d(in);
  const double log_det_ratio = log_det_spd(in.hessian) - log_det_spd(in.sigma_g);
  // log Gamma(kappa) / Gamma(kappa - d/2) = -log(Gamma(kappa - d/2) / Gamma(kappa - d/2 + d/2))
  const double log_gamma_ratio =
      -std::log(boost::math::tgamma_delta_ratio(in.kappa - d2, d2));
  return 0.5 * (log_det_ratio - 2.0 * d2 * std::log(in.eta * in.kappa)) + log_gamma_ratio +
         (trace_term(in) - 4.0 * d2) / denominator(in) + d2 * std::log(2.0);
}

double generalization_bound(const BoundInputs& in) {
  const double kl = kl_upper_bound(in);
  const double n = static_cast<double>(in.n_samples);
  return in.empirical_risk + std::sqrt((kl + std::log(1.0 / in.delta) + std::log(n) + 2.0) / (n - 1.0));
}

}  // namespace pld
