// SPDX-License-Identifier: Apache-2.0
#include "pld/pacbayes.hpp"

#include "pld/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <cmath>

namespace {

using pld::BoundInputs;
using pld::Matrix;

BoundInputs inputs(Matrix h, Matrix sg, double eta, double kappa, std::size_t n = 1000) {
  BoundInputs in;
  in.hessian = std::move(h);
  in.sigma_g = std::move(sg);
  in.eta = eta;
  in.kappa = kappa;
  in.n_samples = n;
  in.delta = 0.05;
  return in;
}

// Three terms evaluated with plain determinants and an explicit inverse.
double reference_kl(const BoundInputs& in) {
  const double d = static_cast<double>(in.hessian.rows());
  const double t1 = 0.5 * std::log(in.hessian.determinant() / in.sigma_g.determinant());
  const double tr = (in.eta * in.sigma_g * in.hessian.inverse()).trace();
  const double t2 = (tr - 2.0 * d) / (4.0 * (1.0 - (d / 2.0 - 1.0) / in.kappa));
  const double t3 = d / 2.0 * std::log(2.0 / in.eta);
  return t1 + t2 + t3;
}

Matrix random_spd(pld::RngStream& rng, int d) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  }
  return a * a.transpose() + 0.1 * Matrix::Identity(d, d);
}

TEST(KlUpperBound, TrivialCaseIsExactlyZero) {
  for (double kappa : {0.6, 1.0, 5.0, 1e6}) {
    const auto in = inputs(Matrix::Identity(1, 1), Matrix::Identity(1, 1), 2.0, kappa);
    EXPECT_EQ(pld::kl_upper_bound(in), 0.0) << kappa;
  }
}

TEST(KlUpperBound, HandEvaluatedTwoDimensionalCase) {
  const auto in = inputs(2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0, 4.0);
  const double expected = std::log(2.0) - 0.75 + std::log(2.0);
  EXPECT_NEAR(pld::kl_upper_bound(in), expected, 1e-14);
}

TEST(KlUpperBound, MatchesReferenceOnRandomInputs) {
  pld::RngStream rng(41, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 4;
    const auto in = inputs(random_spd(rng, d), random_spd(rng, d), 0.05 + rng.uniform(),
                           0.5 * d + 0.1 + 10.0 * rng.uniform());
    const double ref = reference_kl(in);
    EXPECT_NEAR(pld::kl_upper_bound(in), ref, 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST(KlUpperBound, LargeKappaLimit) {
  Matrix h(2, 2), sg(2, 2);
  h << 3.0, 0.5, 0.5, 1.0;
  sg << 1.0, 0.2, 0.2, 2.0;
  const auto in = inputs(h, sg, 0.3, 1e9);
  const double tr = (0.3 * sg * h.inverse()).trace();
  const double limit = 0.5 * std::log(h.determinant() / sg.determinant()) + (tr - 4.0) / 4.0 +
                       std::log(2.0 / 0.3);
  EXPECT_NEAR(pld::kl_upper_bound(in), limit, 1e-6 * std::abs(limit));
}

TEST(KlExactForm, ReferenceAndBoundedByUpper) {
  pld::RngStream rng(42, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 5;
    const auto in = inputs(random_spd(rng, d), random_spd(rng, d), 0.05 + rng.uniform(),
                           0.5 * d + 0.01 + 20.0 * rng.uniform());
    const double half = 0.5 * d;
    const double ref = 0.5 * std::log(in.hessian.determinant() /
                                      (std::pow(in.eta * in.kappa, d) * in.sigma_g.determinant())) +
                       boost::math::lgamma(in.kappa) - boost::math::lgamma(in.kappa - half) +
                       ((in.eta * in.sigma_g * in.hessian.inverse()).trace() - 2.0 * d) /
                           (4.0 * (1.0 - (half - 1.0) / in.kappa)) +
                       half * std::log(2.0);
    const double exact = pld::kl_exact_form(in);
    EXPECT_NEAR(exact, ref, 1e-9 * std::max(1.0, std::abs(ref)));
    EXPECT_LE(exact, pld::kl_upper_bound(in) + 1e-12);
  }
}

TEST(GeneralizationBound, Arithmetic) {
  auto in = inputs(Matrix::Identity(1, 1), Matrix::Identity(1, 1), 2.0, 3.0, 10);
  in.delta = 0.1;
  in.empirical_risk = 0.25;
  const double expected = 0.25 + std::sqrt((std::log(10.0) + std::log(10.0) + 2.0) / 9.0);
  EXPECT_NEAR(pld::generalization_bound(in), expected, 1e-14);
  in.empirical_risk = 0.0;
  EXPECT_NEAR(pld::generalization_bound(in), expected - 0.25, 1e-14);
}

TEST(GeneralizationBound, DecreasesWithSampleSize) {
  double prev = INFINITY;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    const double b = pld::generalization_bound(
        inputs(2.0 * Matrix::Identity(3, 3), Matrix::Identity(3, 3), 0.1, 4.0, n));
    EXPECT_LT(b, prev);
    prev = b;
  }
}

TEST(BoundInputs, Validation) {
  auto in = inputs(Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0, 1.0);
  EXPECT_THROW(pld::kl_upper_bound(in), std::invalid_argument);  // kappa <= d/2
  in.kappa = 3.0;
  in.n_samples = 1;
  EXPECT_THROW(pld::generalization_bound(in), std::invalid_argument);
  in.n_samples = 10;
  in.hessian(1, 1) = 0.0;
  EXPECT_THROW(pld::kl_upper_bound(in), std::invalid_argument);
  in.hessian(1, 1) = 1.0;
  in.delta = 1.0;
  EXPECT_THROW(pld::kl_upper_bound(in), std::invalid_argument);
}

}  // namespace
