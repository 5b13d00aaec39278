// SPDX-License-Identifier: Apache-2.0
#include "pld/tailfit.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include <cmath>

namespace {

using pld::PowerLawKappa1D;

std::vector<double> draw(double kappa, double scale, double center, std::size_t n, std::uint64_t seed) {
  pld::RngStream rng(seed, 0);
  return pld::sample_1d(PowerLawKappa1D::from_scale(kappa, scale, center), n, rng);
}

TEST(NelderMead, MinimizesRosenbrock) {
  const auto f = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const auto r = pld::nelder_mead(f, {-1.2, 1.0}, {0.5, 0.5}, 1e-20, 10000);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(CdfAtSorted, MatchesStudentT) {
  const auto d = PowerLawKappa1D::from_scale(1.7, 2.0, -1.0);
  const boost::math::students_t_distribution<double> t(2.4);
  const std::vector<double> xs{-1e4, -50.0, -3.0, -1.0, -1.0, -0.999, 0.5, 7.0, 1e5};
  const auto cdf = pld::cdf_at_sorted(xs, d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_NEAR(cdf[i], boost::math::cdf(t, (xs[i] + 1.0) / 2.0), 1e-10) << xs[i];
  }
}

TEST(LogLikelihood, MatchesStudentTLogPdf) {
  const auto d = PowerLawKappa1D::from_scale(3.0, 0.5, 0.2);
  const boost::math::students_t_distribution<double> t(5.0);
  const std::vector<double> xs{-1.0, 0.0, 0.2, 4.0};
  double expected = 0.0;
  for (double x : xs) expected += std::log(boost::math::pdf(t, (x - 0.2) / 0.5) / 0.5);
  EXPECT_NEAR(pld::log_likelihood(xs, d), expected, 1e-12 * std::abs(expected));
}

TEST(FitKappa, RecoversKappaTwo) {
  const auto xs = draw(2.0, 1.0, 0.0, 100000, 1);
  const auto fit = pld::fit_power_law_kappa(xs);
  EXPECT_TRUE(fit.converged);
  EXPECT_GE(fit.kappa_hat, 1.8);
  EXPECT_LE(fit.kappa_hat, 2.2);
  EXPECT_NEAR(fit.scale_hat, 1.0, 0.03);
  EXPECT_NEAR(fit.center_hat, 0.0, 0.02);
  EXPECT_LT(fit.ks_statistic, 0.01);
}

TEST(FitKappa, LikelihoodIsMaximizedLocally) {
  const auto xs = draw(3.0, 2.0, 1.0, 20000, 2);
  const auto fit = pld::fit_power_law_kappa(xs);
  const double best = fit.log_likelihood;
  for (double dk : {-0.05, 0.05}) {
    const auto d = PowerLawKappa1D::from_scale(fit.kappa_hat + dk, fit.scale_hat, fit.center_hat);
    EXPECT_LT(pld::log_likelihood(xs, d), best);
  }
  for (double ds : {-0.01, 0.01}) {
    const auto d = PowerLawKappa1D::from_scale(fit.kappa_hat, fit.scale_hat + ds, fit.center_hat);
    EXPECT_LT(pld::log_likelihood(xs, d), best);
  }
}

TEST(FitKappa, GaussianDataDriftToLargeKappa) {
  pld::RngStream rng(3, 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = rng.normal();
  const auto fit = pld::fit_power_law_kappa(xs);
  EXPECT_GT(fit.kappa_hat, 50.0);
  EXPECT_LT(fit.ks_statistic, 0.01);
}

TEST(FitKappa, InputErrors) {
  EXPECT_THROW(pld::fit_power_law_kappa(std::vector<double>(500, 3.0)), std::invalid_argument);
  EXPECT_THROW(pld::fit_power_law_kappa(std::vector<double>(50, 1.0)), std::invalid_argument);
  auto xs = draw(2.0, 1.0, 0.0, 200, 4);
  xs[7] = std::nan("");
  EXPECT_THROW(pld::fit_power_law_kappa(xs), std::invalid_argument);
}

TEST(KsDistance, SelfShiftedAndDegenerate) {
  const auto d = PowerLawKappa1D::from_scale(2.0, 1.0, 0.0);
  EXPECT_LT(pld::ks_distance(draw(2.0, 1.0, 0.0, 100000, 5), d), 0.01);
  EXPECT_GT(pld::ks_distance(draw(2.0, 1.0, 5.0, 10000, 6), d), 0.5);
  EXPECT_NEAR(pld::ks_distance(std::vector<double>(1000, 0.0), d), 0.5, 1e-12);
  EXPECT_THROW(pld::ks_distance(std::vector<double>(5, 0.0), d), std::invalid_argument);
}

}  // namespace
