// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pld/linalg.hpp"

#include <cstddef>

namespace pld {

struct BoundInputs {
  Matrix hessian;
  Matrix sigma_g;
  double eta = 1.0;
  double kappa = 1.0;
  std::size_t n_samples = 2;
  double delta = 0.05;
  double empirical_risk = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(hessian.rows()); }
  /// Throws std::invalid_argument unless H and Sigma_g are SPD of equal size,
  /// kappa > d/2, 1 - (d/2 - 1)/kappa > 0, n >= 2, delta in (0, 1) and the
  /// empirical risk is non-negative.
  void validate() const;
};

/// KL(p || N(w*, I)) <= 1/2 log(det H / det Sigma_g)
///                      + (Tr(eta Sigma_g H^-1) - 2d) / (4 (1 - (d/2 - 1)/kappa))
///                      + (d/2) log(2 / eta)
double kl_upper_bound(const BoundInputs& inputs);

/// The expression the bound relaxes, keeping log(Gamma(kappa)/Gamma(kappa - d/2))
/// in place of (d/2) log kappa:
///   1/2 log(det H / ((eta kappa)^d det Sigma_g)) + log Gamma(kappa)/Gamma(kappa - d/2)
///   + (Tr(eta Sigma_g H^-1) - 2d) / (4 (1 - (d/2 - 1)/kappa)) + (d/2) log 2
double kl_exact_form(const BoundInputs& inputs);

/// empirical_risk + sqrt((KL + log(1/delta) + log n + 2) / (n - 1)) with KL from
/// kl_upper_bound.
double generalization_bound(const BoundInputs& inputs);

}  // namespace pld
