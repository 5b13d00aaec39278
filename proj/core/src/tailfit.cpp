// SPDX-License-Identifier: Apache-2.0
#include "pld/tailfit.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pld {

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, std::vector<double> steps,
                             double f_tolerance, std::size_t max_iterations) {
  const std::size_t n = start.size();
  if (n == 0 || steps.size() != n) throw std::invalid_argument("nelder_mead: bad dimensions");

  std::vector<std::vector<double>> simplex(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += steps[i];
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  auto point = [&](const std::vector<double>& centroid, const std::vector<double>& worst,
                   double t) {
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (worst[j] - centroid[j]);
    return p;
  };

  NelderMeadResult result;
  std::size_t it = 0;
  for (; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (std::abs(values[worst] - values[best]) <= f_tolerance) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    }

    const auto reflected = point(centroid, simplex[worst], -1.0);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const auto expanded = point(centroid, simplex[worst], -2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const auto contracted = point(centroid, simplex[worst], outside ? -0.5 : 0.5);
    const double fc = f(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) {
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      }
      values[i] = f(simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  result.value = *best_it;
  result.iterations = it;
  return result;
}

double log_likelihood(std::span<const double> samples, const PowerLawKappa1D& dist) {
  const double a = dist.sigma_h() / dist.sigma_g();
  const double c = dist.center();
  double sum = 0.0;
  for (double x : samples) sum += std::log1p(a * (x - c) * (x - c));
  return -dist.kappa() * sum - static_cast<double>(samples.size()) * dist.log_normalizer();
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

TailFitResult fit_power_law_kappa(std::span<const double> samples, const TailFitOptions& options) {
  if (samples.size() < 100) {
    throw std::invalid_argument("fit_power_law_kappa: need at least 100 samples");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double x : sorted) {
    if (!std::isfinite(x)) throw std::invalid_argument("fit_power_law_kappa: non-finite sample");
  }
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw std::invalid_argument("fit_power_law_kappa: samples are constant");
  }

  const double median = quantile_sorted(sorted, 0.5);
  double s0 = (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)) / 1.35;
  if (!(s0 > 0.0)) {
    // More than half the samples tie; fall back to the mean absolute deviation.
    double mad = 0.0;
    for (double x : sorted) mad += std::abs(x - median);
    s0 = mad / static_cast<double>(sorted.size());
  }

  const double n = static_cast<double>(samples.size());
  const double log_kappa_cap = std::log(options.kappa_max - 0.5);
  const auto objective = [&](std::span<const double> theta) {
    if (theta[0] > log_kappa_cap || !std::isfinite(theta[1])) {
      return std::numeric_limits<double>::infinity();
    }
    const double kappa = 0.5 + std::exp(theta[0]);
    const double scale = std::exp(theta[1]);
    if (!(kappa > 0.5) || !(scale > 0.0) || !std::isfinite(scale)) {
      return std::numeric_limits<double>::infinity();
    }
    const auto dist = PowerLawKappa1D::from_scale(kappa, scale, theta[2]);
    return -log_likelihood(sorted, dist) / n;
  };

  const std::vector<double> start{std::log(2.0 - 0.5), std::log(s0), median};
  const std::vector<double> steps{0.5, 0.2, 0.2 * s0};
  const auto nm = nelder_mead(objective, start, steps, options.tolerance, options.max_iterations);

  TailFitResult result;
  result.kappa_hat = 0.5 + std::exp(nm.x[0]);
  result.scale_hat = std::exp(nm.x[1]);
  result.center_hat = nm.x[2];
  result.log_likelihood = -nm.value * n;
  result.converged = nm.converged;
  result.iterations = nm.iterations;
  result.ks_statistic = ks_distance(sorted, result.distribution());
  return result;
}

std::vector<double> cdf_at_sorted(std::span<const double> sorted, const PowerLawKappa1D& dist) {
  const double c = dist.center();
  const double width = dist.scale();
  // d/dtheta of the CDF under x = c + width * tan(theta).
  const auto integrand = [&](double theta) {
    const double ct = std::cos(theta);
    return dist.density(c + width * std::tan(theta)) * width / (ct * ct);
  };
  // Integrates from the inner end a towards the outer end b. Panels shrink
  // geometrically near theta = +-pi/2, where the integrand is not analytic.
  const auto panel = [&](double a, double b) {
    constexpr double kMaxPanel = 0.05;
    constexpr double kHalfPi = 0.5 * std::numbers::pi;
    const double dir = b > a ? 1.0 : -1.0;
    double sum = 0.0;
    double lo = a;
    while (dir * (b - lo) > 0.0) {
      const double room = kHalfPi - std::abs(lo);
      const double len = std::min({kMaxPanel, 0.5 * room, dir * (b - lo)});
      const double hi = dir * (b - lo) - len <= 1e-15 ? b : lo + dir * len;
      sum += boost::math::quadrature::gauss<double, 15>::integrate(integrand, std::min(lo, hi),
                                                                  std::max(lo, hi));
      lo = hi;
    }
    return sum;
  };

  std::vector<double> out(sorted.size());
  const auto split = static_cast<std::size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin());
  double theta_prev = 0.0;
  double f = 0.5;
  for (std::size_t k = split; k-- > 0;) {
    const double theta = std::atan((sorted[k] - c) / width);
    if (theta != theta_prev) f -= panel(theta_prev, theta);
    out[k] = std::max(f, 0.0);
    theta_prev = theta;
  }
  theta_prev = 0.0;
  f = 0.5;
  for (std::size_t k = split; k < sorted.size(); ++k) {
    const double theta = std::atan((sorted[k] - c) / width);
    if (theta != theta_prev) f += panel(theta_prev, theta);
    out[k] = std::min(f, 1.0);
    theta_prev = theta;
  }
  return out;
}

double ks_distance(std::span<const double> samples, const PowerLawKappa1D& dist) {
  if (samples.size() < 10) throw std::invalid_argument("ks_distance: need at least 10 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto cdf = cdf_at_sorted(sorted, dist);
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double hi = static_cast<double>(i + 1) / n - cdf[i];
    const double lo = cdf[i] - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

}  // namespace pld
