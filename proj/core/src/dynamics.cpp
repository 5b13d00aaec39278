// SPDX-License-Identifier: Apache-2.0
#include "pld/dynamics.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pld {

std::string_view to_string(DynamicsMode mode) {
  switch (mode) {
    case DynamicsMode::kSgd: return "sgd";
    case DynamicsMode::kLangevin: return "langevin";
    case DynamicsMode::kPowerLaw: return "power_law";
    case DynamicsMode::kToyPowerLaw: return "toy_power_law";
  }
  return "unknown";
}

DynamicsMode parse_dynamics_mode(std::string_view text) {
  if (text == "sgd") return DynamicsMode::kSgd;
  if (text == "langevin") return DynamicsMode::kLangevin;
  if (text == "power_law") return DynamicsMode::kPowerLaw;
  if (text == "toy_power_law") return DynamicsMode::kToyPowerLaw;
  throw std::invalid_argument("unknown dynamics mode '" + std::string(text) + "'");
}

std::string_view to_string(StochasticCalculus calculus) {
  switch (calculus) {
    case StochasticCalculus::kHanggiKlimontovich: return "hanggi_klimontovich";
    case StochasticCalculus::kIto: return "ito";
  }
  return "unknown";
}

StochasticCalculus parse_stochastic_calculus(std::string_view text) {
  if (text == "hanggi_klimontovich") return StochasticCalculus::kHanggiKlimontovich;
  if (text == "ito") return StochasticCalculus::kIto;
  throw std::invalid_argument("unknown stochastic calculus '" + std::string(text) + "'");
}

void IntegratorConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be >= 0");
  if (record_every == 0) throw std::invalid_argument("record_every must be positive");
  if (steps / record_every >= std::numeric_limits<std::size_t>::max() / 2) {
    throw std::invalid_argument("steps / record_every overflows the trajectory length");
  }
  const bool toy = mode == DynamicsMode::kToyPowerLaw;
  if (toy != lambda1.has_value() || toy != lambda2.has_value()) {
    throw std::invalid_argument("lambda1/lambda2 must be given exactly for toy_power_law");
  }
  if (toy && (!(*lambda1 >= 0.0) || !(*lambda2 >= 0.0))) {
    throw std::invalid_argument("lambda1 and lambda2 must be >= 0");
  }
  const bool sgd = mode == DynamicsMode::kSgd;
  if (sgd != batch_size.has_value()) {
    throw std::invalid_argument("batch_size must be given exactly for sgd");
  }
}

std::string IntegratorConfig::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  mix(std::bit_cast<std::uint64_t>(eta));
  mix(steps);
  mix(static_cast<std::uint64_t>(mode));
  mix(master_seed);
  mix(stream_id);
  mix(record_every);
  mix(lambda1 ? std::bit_cast<std::uint64_t>(*lambda1) : ~0ull);
  mix(lambda2 ? std::bit_cast<std::uint64_t>(*lambda2) : ~0ull);
  mix(batch_size ? *batch_size : ~0ull);
  mix(static_cast<std::uint64_t>(calculus));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SimulationError::SimulationError(std::size_t step, const std::string& what)
    : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}

namespace {

Vector standard_normal(Eigen::Index d, RngStream& rng) {
  Vector xi(d);
  for (Eigen::Index i = 0; i < d; ++i) xi(i) = rng.normal();
  return xi;
}

}  // namespace

Vector step_sgd(const EmpiricalToyLoss& landscape, const Vector& w, std::size_t batch_size,
                RngStream& rng, double eta) {
  return w - eta * landscape.minibatch_gradient(w, batch_size, rng);
}

Vector step_langevin_factored(const Landscape& landscape, const Vector& w, const Matrix& factor,
                              double eta, RngStream& rng) {
  const Vector g = gradient(landscape, w);
  if (factor.rows() != w.size() || factor.cols() != w.size()) {
    throw std::invalid_argument("step_langevin: covariance dimension mismatch");
  }
  return w - eta * g + eta * (factor * standard_normal(w.size(), rng));
}

Vector step_langevin(const Landscape& landscape, const Vector& w, const Matrix& const_cov,
                     double eta, RngStream& rng) {
  if (const_cov.size() > 0 && const_cov.isZero(0.0)) {
    if (const_cov.rows() != w.size() || const_cov.cols() != w.size()) {
      throw std::invalid_argument("step_langevin: covariance dimension mismatch");
    }
    return w - eta * gradient(landscape, w);
  }
  return step_langevin_factored(landscape, w, diffusion_factor(const_cov), eta, rng);
}

Vector step_power_law(const Landscape& landscape, const Vector& w, const ScalarNoiseParams& noise,
                      double eta, RngStream& rng, StochasticCalculus calculus) {
  if (w.size() != 1) {
    throw std::invalid_argument("step_power_law: scalar noise model needs a 1-D landscape");
  }
  const double g = gradient(landscape, w)(0);
  const double c = variance_at(noise, w(0));
  if (c < 0.0 || !std::isfinite(c)) {
    std::ostringstream msg;
    msg << "step_power_law: noise variance " << c << " is not positive at w = " << w(0);
    throw std::invalid_argument(msg.str());
  }
  double drift = -g;
  if (calculus == StochasticCalculus::kHanggiKlimontovich) {
    drift += 0.5 * eta * variance_slope_at(noise, w(0));
  }
  const double xi = rng.normal();
  return Vector::Constant(1, w(0) + eta * drift + eta * std::sqrt(c) * xi);
}

Vector step_power_law(const Landscape& landscape, const Vector& w,
                      const MultivariateNoiseParams& noise, double eta, RngStream& rng,
                      StochasticCalculus calculus) {
  if (static_cast<std::size_t>(w.size()) != noise.dim()) {
    throw std::invalid_argument("step_power_law: noise dimension mismatch");
  }
  Vector drift = -gradient(landscape, w);
  const Matrix factor = diffusion_factor(covariance_at(noise, w));
  if (calculus == StochasticCalculus::kHanggiKlimontovich) {
    // div C = Sigma_g * grad q,  grad q = 2 H Sigma_g^-1 (w - w*) / (eta kappa)
    const Vector grad_q =
        (2.0 / (noise.eta() * noise.kappa())) * (noise.precision_shape() * (w - noise.center()));
    drift += 0.5 * eta * (noise.sigma_g() * grad_q);
  }
  return w + eta * drift + eta * (factor * standard_normal(w.size(), rng));
}

Vector step_toy_power_law(const EmpiricalToyLoss& landscape, const Vector& w, double lambda1,
                          double lambda2, double eta, RngStream& rng) {
  const Vector g = landscape.gradient(w);
  const double amp = lambda2 * std::sqrt(1.0 + lambda1 * landscape.loss(w));
  const double xi0 = rng.normal();
  const double xi1 = rng.normal();
  return Vector{{w(0) - eta * g(0) + eta * amp * xi0, w(1) - eta * g(1) + eta * amp * xi1}};
}

double match_lambda2(const EmpiricalToyLoss& landscape, const Vector& w_star,
                     std::size_t batch_size) {
  return std::sqrt(minibatch_gradient_covariance(landscape, w_star, batch_size).trace() / 2.0);
}

Trajectory run(const IntegratorConfig& config, const Landscape& landscape, const NoiseSpec& noise,
               const Vector& w0) {
  config.validate();
  if (static_cast<std::size_t>(w0.size()) != dimension(landscape)) {
    throw std::invalid_argument("run: initial state dimension does not match landscape");
  }
  const auto* toy = std::get_if<EmpiricalToyLoss>(&landscape);
  if ((config.mode == DynamicsMode::kSgd || config.mode == DynamicsMode::kToyPowerLaw) && !toy) {
    throw std::invalid_argument("run: sgd and toy_power_law need an EmpiricalToyLoss landscape");
  }

  Matrix langevin_factor;
  bool langevin_zero = false;
  if (config.mode == DynamicsMode::kLangevin) {
    const auto* cov = std::get_if<Matrix>(&noise);
    if (!cov) throw std::invalid_argument("run: langevin needs a constant covariance matrix");
    if (cov->rows() != w0.size() || cov->cols() != w0.size()) {
      throw std::invalid_argument("run: covariance dimension does not match landscape");
    }
    langevin_zero = cov->isZero(0.0);
    if (!langevin_zero) langevin_factor = diffusion_factor(*cov);
  }
  if (config.mode == DynamicsMode::kPowerLaw && !std::holds_alternative<ScalarNoiseParams>(noise) &&
      !std::holds_alternative<MultivariateNoiseParams>(noise)) {
    throw std::invalid_argument("run: power_law needs a scalar or multivariate noise model");
  }
  if (const auto* sp = std::get_if<ScalarNoiseParams>(&noise)) sp->validate();

  RngStream rng(config.master_seed, config.stream_id);
  Trajectory traj;
  traj.config_hash = config.digest();
  const std::size_t length = config.steps / config.record_every + 1;
  traj.states.reserve(length);
  traj.losses.reserve(length);
  traj.states.push_back(w0);
  traj.losses.push_back(loss(landscape, w0));

  Vector w = w0;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    try {
      switch (config.mode) {
        case DynamicsMode::kSgd:
          w = step_sgd(*toy, w, *config.batch_size, rng, config.eta);
          break;
        case DynamicsMode::kLangevin:
          w = langevin_zero ? Vector(w - config.eta * gradient(landscape, w))
                            : step_langevin_factored(landscape, w, langevin_factor, config.eta, rng);
          break;
        case DynamicsMode::kPowerLaw:
          if (const auto* sp = std::get_if<ScalarNoiseParams>(&noise)) {
            w = step_power_law(landscape, w, *sp, config.eta, rng, config.calculus);
          } else {
            w = step_power_law(landscape, w, std::get<MultivariateNoiseParams>(noise), config.eta,
                               rng, config.calculus);
          }
          break;
        case DynamicsMode::kToyPowerLaw:
          w = step_toy_power_law(*toy, w, *config.lambda1, *config.lambda2, config.eta, rng);
          break;
      }
    } catch (const std::exception& e) {
      throw SimulationError(step, e.what());
    }
    if (step % config.record_every == 0) {
      traj.states.push_back(w);
      traj.losses.push_back(loss(landscape, w));
    }
  }
  return traj;
}

}  // namespace pld
