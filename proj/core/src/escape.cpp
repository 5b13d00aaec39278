// SPDX-License-Identifier: Apache-2.0
#include "pld/escape.hpp"

#include "pld/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pld {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

void EscapeProblem1D::validate() const {
  require_positive(h_a, "h_a");
  require_positive(h_b_abs, "h_b_abs");
  require_positive(delta_l, "delta_l");
  require_positive(eta, "eta");
  require_positive(sigma_g_a, "sigma_g_a");
  if (!(kappa > 0.5)) {
    throw std::invalid_argument("EscapeProblem1D: kappa must exceed 1/2");
  }
}

double EscapeProblem1D::temperature_ratio() const { return eta * sigma_g_a / delta_l; }

std::vector<std::string> EscapeProblem1D::warnings() const {
  std::vector<std::string> out;
  if (temperature_ratio() > 0.1) {
    std::ostringstream msg;
    msg << "eta * sigma_g_a / delta_l = " << temperature_ratio()
        << " exceeds 0.1; the low-temperature approximation may be poor";
    out.push_back(msg.str());
  }
  return out;
}

double tau_power_law_1d(const EscapeProblem1D& p) {
  p.validate();
  const double prefactor =
      2.0 * std::numbers::pi / ((1.0 - 1.0 / (2.0 * p.kappa)) * std::sqrt(p.h_a * p.h_b_abs));
  const double x = 2.0 * p.delta_l / (p.kappa * p.eta * p.sigma_g_a);
  return prefactor * std::exp((p.kappa - 0.5) * std::log1p(x));
}

double tau_langevin_1d(double h_a, double h_b_abs, double delta_l, double eta, double sigma) {
  require_positive(h_a, "h_a");
  require_positive(h_b_abs, "h_b_abs");
  require_positive(eta, "eta");
  require_positive(sigma, "sigma");
  if (!(delta_l >= 0.0)) throw std::invalid_argument("delta_l must be non-negative");
  return 2.0 * std::numbers::pi / std::sqrt(h_a * h_b_abs) * std::exp(2.0 * delta_l / (eta * sigma));
}

double tau_alpha_stable_1d(double alpha, double eta, double sigma, double width) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("alpha must lie in (0, 2]");
  require_positive(eta, "eta");
  require_positive(sigma, "sigma");
  require_positive(width, "width");
  return eta * alpha * std::pow(width / (eta * sigma), alpha);
}

EscapeProblemMulti::EscapeProblemMulti(Matrix hessian_a, Matrix hessian_b, double sigma_e,
                                       double delta_l, double eta, double kappa)
    : hessian_a_(std::move(hessian_a)),
      hessian_b_(std::move(hessian_b)),
      sigma_e_(sigma_e),
      delta_l_(delta_l),
      eta_(eta),
      kappa_(kappa) {
  const auto d = hessian_a_.rows();
  if (d == 0 || hessian_a_.cols() != d || hessian_b_.rows() != d || hessian_b_.cols() != d) {
    throw std::invalid_argument("EscapeProblemMulti: hessians must be square of equal size");
  }
  if (!is_symmetric(hessian_a_) || !is_symmetric(hessian_b_)) {
    throw std::invalid_argument("EscapeProblemMulti: hessians must be symmetric");
  }
  require_positive(sigma_e_, "sigma_e");
  require_positive(delta_l_, "delta_l");
  require_positive(eta_, "eta");
  if (!(kappa_ > 0.5 * static_cast<double>(d))) {
    throw std::invalid_argument("EscapeProblemMulti: kappa must exceed d/2");
  }

  const Vector ea = symmetric_eigenvalues(hessian_a_);
  const double tol = 1e-10 * std::max(1.0, ea.cwiseAbs().maxCoeff());
  if (ea(0) < -1e-10) {
    std::ostringstream msg;
    msg << "EscapeProblemMulti: hessian_a has negative eigenvalue " << ea(0);
    throw std::invalid_argument(msg.str());
  }
  double log_det_a = 0.0;
  int positive = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (ea(i) > tol) {
      log_det_a += std::log(ea(i));
      ++positive;
    }
  }
  if (positive == 0) throw std::invalid_argument("EscapeProblemMulti: hessian_a is zero");
  det_a_plus_ = std::exp(log_det_a);

  const Vector eb = symmetric_eigenvalues(hessian_b_);
  const auto negatives = (eb.array() < 0.0).count();
  if (negatives != 1) {
    std::ostringstream msg;
    msg << "EscapeProblemMulti: hessian_b must have exactly one negative eigenvalue, found "
        << negatives;
    throw std::invalid_argument(msg.str());
  }
  if ((eb.array() == 0.0).any()) {
    throw std::invalid_argument("EscapeProblemMulti: hessian_b is singular");
  }
  h_be_ = eb(0);
  det_b_ = eb.prod();
}

double tau_power_law_multi(const EscapeProblemMulti& p) {
  const double d = static_cast<double>(p.dim());
  const double prefactor = 2.0 * std::numbers::pi * std::sqrt(-p.det_b()) /
                           ((1.0 - d / (2.0 * p.kappa())) * std::sqrt(p.det_a_plus())) /
                           std::abs(p.h_be());
  const double x = p.delta_l() / (p.eta() * p.kappa() * p.sigma_e());
  return prefactor * std::exp((p.kappa() - 0.5) * std::log1p(x));
}

// ---------------------------------------------------------------------------

std::string_view to_string(EscapeMode mode) {
  return mode == EscapeMode::kLangevin ? "langevin" : "power_law";
}

EscapeMode parse_escape_mode(std::string_view text) {
  if (text == "langevin") return EscapeMode::kLangevin;
  if (text == "power_law") return EscapeMode::kPowerLaw;
  throw std::invalid_argument("unknown escape mode '" + std::string(text) + "'");
}

std::string_view to_string(EscapeCriterion criterion) {
  return criterion == EscapeCriterion::kSaddle ? "saddle" : "other_minimum";
}

EscapeCriterion parse_escape_criterion(std::string_view text) {
  if (text == "saddle") return EscapeCriterion::kSaddle;
  if (text == "other_minimum") return EscapeCriterion::kOtherMinimum;
  throw std::invalid_argument("unknown escape criterion '" + std::string(text) + "'");
}

void FirstPassageConfig::validate() const {
  require_positive(eta, "eta");
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  if (max_steps == 0) throw std::invalid_argument("max_steps must be >= 1");
}

FirstPassageStats mc_first_passage(const DoubleWell1D& landscape, const ScalarNoiseParams& noise,
                                   const FirstPassageConfig& config) {
  config.validate();
  if (!(noise.sigma_g >= 0.0) || !(noise.sigma_h >= 0.0)) {
    throw std::invalid_argument("mc_first_passage: noise variances must be non-negative");
  }
  const bool power_law = config.mode == EscapeMode::kPowerLaw;
  if (power_law) {
    if (!(noise.curvature > 0.0)) {
      throw std::invalid_argument("mc_first_passage: noise.curvature must be positive");
    }
    if (noise.eta != config.eta) {
      throw std::invalid_argument("mc_first_passage: noise.eta must equal the step size");
    }
  }

  const double eta = config.eta;
  const double start = landscape.min_a();
  const double base_loss = landscape.loss(start);
  const double target = config.criterion == EscapeCriterion::kSaddle ? landscape.saddle_b()
                                                                     : landscape.min_c();
  // C(w) = sigma_g + slope_coeff * (L(w) - L(a)); Langevin has slope_coeff = 0.
  const double slope_coeff = power_law ? 2.0 * noise.sigma_h / noise.curvature : 0.0;
  const double hk = (power_law && config.calculus == StochasticCalculus::kHanggiKlimontovich)
                        ? 0.5 * eta * slope_coeff
                        : 0.0;

  FirstPassageStats stats;
  stats.trials = config.trials;
  stats.passage_times.assign(config.trials, std::nullopt);

  parallel_for(config.trials, config.threads, [&](std::size_t trial) {
    RngStream rng(config.master_seed, derive_stream(kFirstPassageStream, trial));
    double w = start;
    for (std::size_t step = 1; step <= config.max_steps; ++step) {
      const double g = landscape.derivative(w);
      double c = noise.sigma_g;
      if (power_law) c += slope_coeff * (landscape.loss(w) - base_loss);
      if (!(c >= 0.0)) {
        std::ostringstream msg;
        msg << "mc_first_passage: trial " << trial << " step " << step
            << ": noise variance " << c << " is negative at w = " << w;
        throw std::domain_error(msg.str());
      }
      w += eta * (-g + hk * g) + eta * std::sqrt(c) * rng.normal();
      if (w >= target) {
        stats.passage_times[trial] = static_cast<double>(step) * eta;
        return;
      }
    }
  });

  double sum = 0.0;
  for (const auto& t : stats.passage_times) {
    if (t) {
      ++stats.escaped;
      sum += *t;
    }
  }
  stats.censored = stats.trials - stats.escaped;
  if (stats.escaped > 0) {
    const double mean = sum / static_cast<double>(stats.escaped);
    stats.mean_time = mean;
    if (stats.escaped > 1) {
      double ss = 0.0;
      for (const auto& t : stats.passage_times) {
        if (t) ss += (*t - mean) * (*t - mean);
      }
      const double n = static_cast<double>(stats.escaped);
      stats.ci95 = 1.96 * std::sqrt(ss / (n - 1.0) / n);
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------

bool EscapeBox::contains(const Vector& w) const {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > lower && w(i) < upper)) return false;
  }
  return true;
}

std::string_view to_string(ToyDynamics mode) {
  return mode == ToyDynamics::kSgd ? "sgd" : "toy_power_law";
}

ToyDynamics parse_toy_dynamics(std::string_view text) {
  if (text == "sgd") return ToyDynamics::kSgd;
  if (text == "toy_power_law") return ToyDynamics::kToyPowerLaw;
  throw std::invalid_argument("unknown toy dynamics '" + std::string(text) + "'");
}

void SuccessRateConfig::validate() const {
  require_positive(eta, "eta");
  if (runs == 0) throw std::invalid_argument("runs must be >= 1");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw std::invalid_argument("lambda1 and lambda2 must be non-negative");
  }
  if (mode == ToyDynamics::kSgd && batch_size == 0) {
    throw std::invalid_argument("batch_size must be >= 1");
  }
  if (!(region.lower < region.upper)) throw std::invalid_argument("empty escape region");
}

Vector toy_start_point(const EmpiricalToyLoss& landscape) {
  return find_local_minimum(Landscape{landscape}, Vector::Constant(2, 1.0));
}

SuccessRateResult success_rate(const EmpiricalToyLoss& landscape, const SuccessRateConfig& config) {
  return success_rate(landscape, config, toy_start_point(landscape));
}

SuccessRateResult success_rate(const EmpiricalToyLoss& landscape, const SuccessRateConfig& config,
                               const Vector& start) {
  config.validate();
  if (start.size() != 2) throw std::invalid_argument("success_rate: start must be a 2-vector");
  if (!config.region.contains(start)) {
    throw std::invalid_argument("success_rate: start lies outside the escape region");
  }
  if (config.mode == ToyDynamics::kSgd && config.batch_size > landscape.size()) {
    throw std::invalid_argument("success_rate: batch_size exceeds the data size");
  }

  SuccessRateResult result;
  result.runs = config.runs;
  result.start = start;
  result.escape_steps.assign(config.runs, std::nullopt);

  parallel_for(config.runs, config.threads, [&](std::size_t run) {
    RngStream rng(config.master_seed, derive_stream(kSuccessRateStream, run));
    Vector w = start;
    for (std::size_t step = 1; step <= config.steps; ++step) {
      if (config.mode == ToyDynamics::kSgd) {
        w = step_sgd(landscape, w, config.batch_size, rng, config.eta);
      } else {
        w = step_toy_power_law(landscape, w, config.lambda1, config.lambda2, config.eta, rng);
      }
      // Escaped trajectories can run off to huge values; stop at the exit.
      if (!config.region.contains(w)) {
        result.escape_steps[run] = step;
        return;
      }
    }
  });

  for (const auto& s : result.escape_steps) result.escaped += s.has_value();
  result.rate = static_cast<double>(result.escaped) / static_cast<double>(result.runs);
  return result;
}

}  // namespace pld
