// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pld/linalg.hpp"
#include "pld/rng.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace pld {

/// L(w) = base + 1/2 (w - c)^T H (w - c), the second-order model of a loss
/// around a minimum.
class QuadraticBasin {
 public:
  QuadraticBasin(Vector center, Matrix hessian, double base_loss = 0.0);

  std::size_t dim() const { return static_cast<std::size_t>(center_.size()); }
  double loss(const Vector& w) const;
  Vector gradient(const Vector& w) const;

  const Vector& center() const { return center_; }
  const Matrix& hessian() const { return hessian_; }
  double base_loss() const { return base_loss_; }

 private:
  Vector center_;
  Matrix hessian_;
  double base_loss_;
};

/// The two-dimensional non-convex toy objective
///
///   L(w) = c * (1/n) sum_i l(w - x_i),
///   l(v) = 15 * sum_j |v_j - 1|^2.5 * |v_j + 1|^3,
///
/// with data x_i ~ N(0, 0.01 I) drawn once and stored. Minima of l sit at
/// (+-1, +-1); the exponents keep l continuously differentiable.
class EmpiricalToyLoss {
 public:
  using Point = std::array<double, 2>;
  static constexpr std::size_t kDim = 2;
  static constexpr double kDataStddev = 0.1;

  /// Draws `n` data points from stream (data_seed, 0).
  static EmpiricalToyLoss generate(std::size_t n, std::uint64_t data_seed, double scale = 1.0);

  explicit EmpiricalToyLoss(std::vector<Point> data, double scale = 1.0,
                            std::optional<std::uint64_t> data_seed = std::nullopt);

  /// Same stored data, different loss multiplier.
  EmpiricalToyLoss with_scale(double scale) const;

  std::size_t dim() const { return kDim; }
  std::size_t size() const { return data_.size(); }
  double scale() const { return scale_; }
  const std::vector<Point>& data() const { return data_; }
  std::optional<std::uint64_t> data_seed() const { return data_seed_; }

  double loss(const Vector& w) const;
  Vector gradient(const Vector& w) const;

  /// Mean of per-sample gradients over `batch_size` indices drawn uniformly
  /// without replacement. Indices are summed in ascending order, so a full
  /// batch reproduces gradient() bit for bit.
  Vector minibatch_gradient(const Vector& w, std::size_t batch_size, RngStream& rng) const;

  /// Gradient of the single-sample term c * l(w - x_i).
  Point sample_gradient(const Vector& w, std::size_t i) const;

  static double unit_loss(const Point& v);
  static Point unit_gradient(const Point& v);

 private:
  std::vector<Point> data_;
  double scale_;
  std::optional<std::uint64_t> data_seed_;
};

/// A one-dimensional double well built from three C^1-joined quadratics:
/// curvature H_a around the minimum a, -|H_b| around the saddle b and H_c
/// around the second minimum c. Within each piece the loss is exactly
/// quadratic, so basin and saddle curvatures are exact.
class DoubleWell1D {
 public:
  struct Params {
    double min_a = 0.0;
    double curvature_a = 1.0;
    double curvature_b_abs = 1.0;
    double barrier = 1.0;
    /// Defaults to curvature_a / barrier (symmetric well).
    std::optional<double> curvature_c;
    std::optional<double> barrier_c;
  };

  explicit DoubleWell1D(const Params& params);

  std::size_t dim() const { return 1; }
  double loss(double w) const;
  double derivative(double w) const;
  double second_derivative(double w) const;
  double loss(const Vector& w) const;
  Vector gradient(const Vector& w) const;

  const Params& params() const { return params_; }
  double min_a() const { return params_.min_a; }
  double saddle_b() const { return saddle_b_; }
  double min_c() const { return min_c_; }
  double curvature_a() const { return params_.curvature_a; }
  double curvature_b_abs() const { return params_.curvature_b_abs; }
  double curvature_c() const { return curvature_c_; }
  double barrier() const { return params_.barrier; }
  double barrier_c() const { return barrier_c_; }
  /// Join points between the basin pieces and the saddle piece.
  double left_join() const { return left_join_; }
  double right_join() const { return right_join_; }

 private:
  Params params_;
  double curvature_c_;
  double barrier_c_;
  double saddle_b_;
  double min_c_;
  double left_join_;
  double right_join_;
};

using Landscape = std::variant<QuadraticBasin, EmpiricalToyLoss, DoubleWell1D>;

std::size_t dimension(const Landscape& landscape);
double loss(const Landscape& landscape, const Vector& w);
Vector gradient(const Landscape& landscape, const Vector& w);

/// Gradient descent with Armijo backtracking from `start`, stopping once the
/// gradient norm drops below `grad_tol`. Deterministic.
Vector find_local_minimum(const Landscape& landscape, Vector start, double grad_tol = 1e-10,
                          std::size_t max_iterations = 100000);

}  // namespace pld
