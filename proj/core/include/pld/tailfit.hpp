// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pld/stationary.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pld {

struct TailFitResult {
  double kappa_hat = 0.0;
  double scale_hat = 0.0;
  double center_hat = 0.0;
  double log_likelihood = 0.0;
  double ks_statistic = 1.0;
  bool converged = false;
  std::size_t iterations = 0;

  PowerLawKappa1D distribution() const {
    return PowerLawKappa1D::from_scale(kappa_hat, scale_hat, center_hat);
  }
};

struct TailFitOptions {
  std::size_t max_iterations = 5000;
  /// Stop when the spread of the per-sample mean log-likelihood over the
  /// simplex falls below this value.
  double tolerance = 1e-12;
  /// Upper limit for kappa; near-Gaussian data pushes the fit toward it.
  double kappa_max = 1e8;
};

/// Maximum-likelihood fit of p(w) ~ (1 + ((w - c)/s)^2 / (2 kappa - 1))^-kappa
/// by Nelder-Mead over (log(kappa - 1/2), log s, c), started from the median,
/// IQR / 1.35 and kappa = 2. Needs at least 100 samples that are not all
/// equal.
TailFitResult fit_power_law_kappa(std::span<const double> samples,
                                  const TailFitOptions& options = {});

/// Sum of log-densities of `samples` under `dist`.
double log_likelihood(std::span<const double> samples, const PowerLawKappa1D& dist);

/// CDF of `dist` at each of the ascending points `sorted`, integrating the
/// density outward from the center (where the CDF is 1/2) with Gauss-Legendre
/// panels in the angle variable of the tangent map.
std::vector<double> cdf_at_sorted(std::span<const double> sorted, const PowerLawKappa1D& dist);

/// Kolmogorov-Smirnov statistic sup |F_n - F| against the integrated CDF.
/// Needs at least 10 samples.
double ks_distance(std::span<const double> samples, const PowerLawKappa1D& dist);

/// Minimizes f with the Nelder-Mead simplex method (standard coefficients 1,
/// 2, 1/2, 1/2). Stops when the spread of f over the simplex is below
/// `f_tolerance` or after `max_iterations` iterations.
struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, std::vector<double> steps,
                             double f_tolerance, std::size_t max_iterations);

}  // namespace pld
