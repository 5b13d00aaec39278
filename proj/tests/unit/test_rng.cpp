// SPDX-License-Identifier: Apache-2.0
#include "pld/rng.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace {

using pld::Philox4x32;
using pld::RngStream;

// Known-answer vectors published with the Random123 library.
TEST(Philox, MatchesReferenceVectors) {
  const auto zero = Philox4x32::encrypt({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(zero, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));

  const auto ones = Philox4x32::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(ones, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));

  const auto pi = Philox4x32::encrypt({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                      {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(pi, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, SameSeedAndStreamReplays) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  RngStream c(42, 7), d(42, 7);
  for (int i = 0; i < 1001; ++i) ASSERT_EQ(c.normal(), d.normal());
}

TEST(RngStream, DifferentStreamsDiffer) {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    same_ab += x == y;
    same_ac += x == z;
  }
  EXPECT_LT(same_ab, 3);
  EXPECT_LT(same_ac, 3);
}

TEST(DeriveStream, ChildrenAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t parent = 0; parent < 20; ++parent) {
    for (std::uint64_t i = 0; i < 500; ++i) seen.insert(pld::derive_stream(parent, i));
  }
  EXPECT_EQ(seen.size(), 20u * 500u);
}

TEST(RngStream, UniformIsOpenAndCentered) {
  RngStream rng(1, 0);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum_sq / n - mean * mean, 1.0 / 12.0, 2e-3);
}

TEST(RngStream, NormalMoments) {
  RngStream rng(2, 0);
  const int n = 200000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
    m3 += z * z * z;
    m4 += z * z * z * z;
  }
  EXPECT_NEAR(m1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m3 / n, 0.0, 4.0 * std::sqrt(15.0 / n));
  EXPECT_NEAR(m4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(RngStream, GammaMeanAndVariance) {
  for (double shape : {0.3, 1.0, 2.5, 9.0}) {
    RngStream rng(3, static_cast<std::uint64_t>(shape * 10));
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      ASSERT_GT(g, 0.0);
      sum += g;
      sum_sq += g * g;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, shape, 5.0 * std::sqrt(shape / n)) << "shape " << shape;
    EXPECT_NEAR(sum_sq / n - mean * mean, shape, 0.05 * shape + 0.01) << "shape " << shape;
  }
}

TEST(RngStream, StudentTMatchesReferenceCdf) {
  const double dof = 3.0;
  RngStream rng(4, 0);
  const std::size_t n = 50000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.student_t(dof);
  std::sort(xs.begin(), xs.end());
  const boost::math::students_t_distribution<double> t(dof);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = boost::math::cdf(t, xs[i]);
    d = std::max({d, (i + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  // 1.63 / sqrt(n) is the 1% critical value of the one-sample KS statistic.
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST(RngStream, UniformIndexCoversRangeEvenly) {
  RngStream rng(5, 0);
  const std::uint64_t k = 7;
  const int n = 70000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) {
    const auto j = rng.uniform_index(k);
    ASSERT_LT(j, k);
    counts[j]++;
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / k;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 22.46);  // chi-square(6) at the 0.999 level
  EXPECT_THROW(rng.uniform_index(0), std::invalid_argument);
}

}  // namespace
