// SPDX-License-Identifier: Apache-2.0
#include "pld/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pld {

namespace {

void require_dim(const Vector& w, std::size_t expected, const char* who) {
  if (static_cast<std::size_t>(w.size()) != expected) {
    std::ostringstream msg;
    msg << who << ": dimension mismatch (got " << w.size() << ", expected " << expected << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// QuadraticBasin

QuadraticBasin::QuadraticBasin(Vector center, Matrix hessian, double base_loss)
    : center_(std::move(center)), hessian_(std::move(hessian)), base_loss_(base_loss) {
  if (center_.size() == 0) throw std::invalid_argument("QuadraticBasin: empty center");
  if (hessian_.rows() != center_.size() || hessian_.cols() != center_.size()) {
    throw std::invalid_argument("QuadraticBasin: hessian shape does not match center");
  }
  if (!is_symmetric(hessian_, 1e-12)) {
    throw std::invalid_argument("QuadraticBasin: hessian is not symmetric");
  }
  const double smallest = symmetric_eigenvalues(hessian_)(0);
  const double tol = 1e-12 * std::max(1.0, hessian_.cwiseAbs().maxCoeff());
  if (smallest < -tol) {
    std::ostringstream msg;
    msg << "QuadraticBasin: hessian has negative eigenvalue " << smallest;
    throw std::invalid_argument(msg.str());
  }
}

double QuadraticBasin::loss(const Vector& w) const {
  require_dim(w, dim(), "QuadraticBasin::loss");
  const Vector d = w - center_;
  return base_loss_ + 0.5 * d.dot(hessian_ * d);
}

Vector QuadraticBasin::gradient(const Vector& w) const {
  require_dim(w, dim(), "QuadraticBasin::gradient");
  return hessian_ * (w - center_);
}

// ---------------------------------------------------------------------------
// EmpiricalToyLoss

EmpiricalToyLoss EmpiricalToyLoss::generate(std::size_t n, std::uint64_t data_seed,
                                            double scale) {
  if (n == 0) throw std::invalid_argument("EmpiricalToyLoss: need at least one sample");
  RngStream rng(data_seed, 0);
  std::vector<Point> data(n);
  for (auto& x : data) {
    x[0] = kDataStddev * rng.normal();
    x[1] = kDataStddev * rng.normal();
  }
  return EmpiricalToyLoss(std::move(data), scale, data_seed);
}

EmpiricalToyLoss::EmpiricalToyLoss(std::vector<Point> data, double scale,
                                   std::optional<std::uint64_t> data_seed)
    : data_(std::move(data)), scale_(scale), data_seed_(data_seed) {
  if (data_.empty()) throw std::invalid_argument("EmpiricalToyLoss: need at least one sample");
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) {
    throw std::invalid_argument("EmpiricalToyLoss: scale must be positive");
  }
}

EmpiricalToyLoss EmpiricalToyLoss::with_scale(double scale) const {
  return EmpiricalToyLoss(data_, scale, data_seed_);
}

double EmpiricalToyLoss::unit_loss(const Point& v) {
  double total = 0.0;
  for (double x : v) {
    const double a = std::abs(x - 1.0);
    const double b = std::abs(x + 1.0);
    total += a * a * std::sqrt(a) * b * b * b;
  }
  return 15.0 * total;
}

EmpiricalToyLoss::Point EmpiricalToyLoss::unit_gradient(const Point& v) {
  Point g{};
  for (std::size_t j = 0; j < kDim; ++j) {
    const double x = v[j];
    const double a = std::abs(x - 1.0);
    const double b = std::abs(x + 1.0);
    const double sa = (x > 1.0) ? 1.0 : (x < 1.0 ? -1.0 : 0.0);
    const double sb = (x > -1.0) ? 1.0 : (x < -1.0 ? -1.0 : 0.0);
    const double ra = std::sqrt(a);
    // d/dx |x-1|^2.5 |x+1|^3
    g[j] = 15.0 * (2.5 * a * ra * sa * b * b * b + 3.0 * a * a * ra * b * b * sb);
  }
  return g;
}

double EmpiricalToyLoss::loss(const Vector& w) const {
  require_dim(w, kDim, "EmpiricalToyLoss::loss");
  double total = 0.0;
  for (const auto& x : data_) total += unit_loss({w(0) - x[0], w(1) - x[1]});
  return scale_ * total / static_cast<double>(data_.size());
}

Vector EmpiricalToyLoss::gradient(const Vector& w) const {
  require_dim(w, kDim, "EmpiricalToyLoss::gradient");
  double g0 = 0.0, g1 = 0.0;
  for (const auto& x : data_) {
    const Point g = unit_gradient({w(0) - x[0], w(1) - x[1]});
    g0 += g[0];
    g1 += g[1];
  }
  const double f = scale_ / static_cast<double>(data_.size());
  return Vector{{g0 * f, g1 * f}};
}

EmpiricalToyLoss::Point EmpiricalToyLoss::sample_gradient(const Vector& w, std::size_t i) const {
  require_dim(w, kDim, "EmpiricalToyLoss::sample_gradient");
  Point g = unit_gradient({w(0) - data_.at(i)[0], w(1) - data_.at(i)[1]});
  g[0] *= scale_;
  g[1] *= scale_;
  return g;
}

Vector EmpiricalToyLoss::minibatch_gradient(const Vector& w, std::size_t batch_size,
                                            RngStream& rng) const {
  require_dim(w, kDim, "EmpiricalToyLoss::minibatch_gradient");
  const std::size_t n = data_.size();
  if (batch_size == 0 || batch_size > n) {
    std::ostringstream msg;
    msg << "minibatch_gradient: batch_size " << batch_size << " outside [1, " << n << "]";
    throw std::invalid_argument(msg.str());
  }
  if (batch_size == n) return gradient(w);

  // Floyd's sampling without replacement, then ascending-order summation.
  std::vector<bool> chosen(n, false);
  std::vector<std::size_t> idx;
  idx.reserve(batch_size);
  for (std::size_t j = n - batch_size; j < n; ++j) {
    const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
    const std::size_t pick = chosen[t] ? j : t;
    chosen[pick] = true;
    idx.push_back(pick);
  }
  std::sort(idx.begin(), idx.end());
  double g0 = 0.0, g1 = 0.0;
  for (std::size_t i : idx) {
    const Point g = unit_gradient({w(0) - data_[i][0], w(1) - data_[i][1]});
    g0 += g[0];
    g1 += g[1];
  }
  const double f = scale_ / static_cast<double>(batch_size);
  return Vector{{g0 * f, g1 * f}};
}

// ---------------------------------------------------------------------------
// DoubleWell1D

DoubleWell1D::DoubleWell1D(const Params& params) : params_(params) {
  const double ha = params_.curvature_a;
  const double hb = params_.curvature_b_abs;
  curvature_c_ = params_.curvature_c.value_or(ha);
  barrier_c_ = params_.barrier_c.value_or(params_.barrier);
  if (!(ha > 0.0) || !(hb > 0.0) || !(curvature_c_ > 0.0)) {
    throw std::invalid_argument("DoubleWell1D: curvatures must be positive");
  }
  if (!(params_.barrier > 0.0) || !(barrier_c_ > 0.0)) {
    throw std::invalid_argument("DoubleWell1D: barriers must be positive");
  }
  if (!std::isfinite(params_.min_a)) throw std::invalid_argument("DoubleWell1D: min_a not finite");

  // Left join: H_a u = |H_b| v (slopes) and H_a u^2/2 + |H_b| v^2/2 = dL (values).
  const double u = std::sqrt(2.0 * params_.barrier / (ha * (1.0 + ha / hb)));
  left_join_ = params_.min_a + u;
  saddle_b_ = left_join_ + ha * u / hb;
  const double uc = std::sqrt(2.0 * barrier_c_ / (curvature_c_ * (1.0 + curvature_c_ / hb)));
  right_join_ = saddle_b_ + curvature_c_ * uc / hb;
  min_c_ = right_join_ + uc;
}

double DoubleWell1D::loss(double w) const {
  if (w <= left_join_) {
    const double d = w - params_.min_a;
    return 0.5 * params_.curvature_a * d * d;
  }
  if (w <= right_join_) {
    const double d = w - saddle_b_;
    return params_.barrier - 0.5 * params_.curvature_b_abs * d * d;
  }
  const double d = w - min_c_;
  return params_.barrier - barrier_c_ + 0.5 * curvature_c_ * d * d;
}

double DoubleWell1D::derivative(double w) const {
  if (w <= left_join_) return params_.curvature_a * (w - params_.min_a);
  if (w <= right_join_) return -params_.curvature_b_abs * (w - saddle_b_);
  return curvature_c_ * (w - min_c_);
}

double DoubleWell1D::second_derivative(double w) const {
  if (w < left_join_) return params_.curvature_a;
  if (w <= right_join_) return -params_.curvature_b_abs;
  return curvature_c_;
}

double DoubleWell1D::loss(const Vector& w) const {
  require_dim(w, 1, "DoubleWell1D::loss");
  return loss(w(0));
}

Vector DoubleWell1D::gradient(const Vector& w) const {
  require_dim(w, 1, "DoubleWell1D::gradient");
  return Vector::Constant(1, derivative(w(0)));
}

// ---------------------------------------------------------------------------

std::size_t dimension(const Landscape& landscape) {
  return std::visit([](const auto& l) { return l.dim(); }, landscape);
}

double loss(const Landscape& landscape, const Vector& w) {
  return std::visit([&](const auto& l) { return l.loss(w); }, landscape);
}

Vector gradient(const Landscape& landscape, const Vector& w) {
  return std::visit([&](const auto& l) { return l.gradient(w); }, landscape);
}

Vector find_local_minimum(const Landscape& landscape, Vector start, double grad_tol,
                          std::size_t max_iterations) {
  Vector w = std::move(start);
  double f = loss(landscape, w);
  double step = 1e-2;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Vector g = gradient(landscape, w);
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) < grad_tol) return w;
    step *= 2.0;
    for (;;) {
      const Vector trial = w - step * g;
      const double ft = loss(landscape, trial);
      if (ft <= f - 1e-4 * step * gn2) {
        w = trial;
        f = ft;
        break;
      }
      step *= 0.5;
      if (step < 1e-300) return w;
    }
  }
  return w;
}

}  // namespace pld
