// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pld/landscape.hpp"
#include "pld/linalg.hpp"
#include "pld/noise_model.hpp"
#include "pld/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pld {

enum class DynamicsMode { kSgd, kLangevin, kPowerLaw, kToyPowerLaw };

std::string_view to_string(DynamicsMode mode);
DynamicsMode parse_dynamics_mode(std::string_view text);

/// How the state-dependent diffusion is read.
///
/// kHanggiKlimontovich integrates the SDE whose density obeys
///   dp/dt = d/dw (p g) + (eta/2) d/dw (C dp/dw),
/// i.e. the Ito step plus the noise-induced drift (eta/2) div C(w) dt. Its
/// stationary law for C(w) = sigma_g + sigma_h (w - w*)^2 around a quadratic
/// basin is (1 + sigma_h/sigma_g (w - w*)^2)^-kappa.
///
/// kIto is the bare update w - eta g + eta M(w) xi, whose stationary law has
/// exponent -(kappa + 1) instead.
enum class StochasticCalculus { kHanggiKlimontovich, kIto };

std::string_view to_string(StochasticCalculus calculus);
StochasticCalculus parse_stochastic_calculus(std::string_view text);

struct IntegratorConfig {
  double eta = 0.01;
  std::size_t steps = 0;
  DynamicsMode mode = DynamicsMode::kPowerLaw;
  std::uint64_t master_seed = 0;
  /// Stream id within master_seed; lets callers run many seeded trajectories.
  std::uint64_t stream_id = 0;
  std::size_t record_every = 1;
  std::optional<double> lambda1;          // kToyPowerLaw only
  std::optional<double> lambda2;          // kToyPowerLaw only
  std::optional<std::size_t> batch_size;  // kSgd only
  StochasticCalculus calculus = StochasticCalculus::kHanggiKlimontovich;  // kPowerLaw only

  /// Checks positivity, overflow of the recorded length and that mode-specific
  /// fields are present iff the mode needs them.
  void validate() const;
  /// Stable 64-bit FNV-1a digest of every field, rendered as 16 hex digits.
  std::string digest() const;
};

struct Trajectory {
  std::vector<Vector> states;
  std::vector<double> losses;
  std::string config_hash;
};

/// Noise source for run(): constant covariance (Langevin) or one of the
/// state-dependent models (power law). monostate for SGD / toy dynamics.
using NoiseSpec = std::variant<std::monostate, Matrix, ScalarNoiseParams, MultivariateNoiseParams>;

/// Raised by run() when a step fails; carries the failing step index.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::size_t step, const std::string& what);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// w - eta * minibatch_gradient(w).
Vector step_sgd(const EmpiricalToyLoss& landscape, const Vector& w, std::size_t batch_size,
                RngStream& rng, double eta);

/// Euler-Maruyama step of dw = -g dt + sqrt(eta) C^(1/2) dB with dt = eta:
/// w - eta g(w) + eta L xi, L the Cholesky factor of const_cov. An all-zero
/// covariance gives plain gradient descent.
Vector step_langevin(const Landscape& landscape, const Vector& w, const Matrix& const_cov,
                     double eta, RngStream& rng);

/// Same as step_langevin with the covariance already factored.
Vector step_langevin_factored(const Landscape& landscape, const Vector& w, const Matrix& factor,
                              double eta, RngStream& rng);

/// Power-law step w - eta g(w) + eta M(w) xi with M(w) M(w)^T = C(w) taken at
/// the pre-step state, plus eta * (eta/2) div C(w) under kHanggiKlimontovich.
/// The scalar model requires a one-dimensional landscape.
Vector step_power_law(const Landscape& landscape, const Vector& w, const ScalarNoiseParams& noise,
                      double eta, RngStream& rng,
                      StochasticCalculus calculus = StochasticCalculus::kHanggiKlimontovich);
Vector step_power_law(const Landscape& landscape, const Vector& w,
                      const MultivariateNoiseParams& noise, double eta, RngStream& rng,
                      StochasticCalculus calculus = StochasticCalculus::kHanggiKlimontovich);

/// The toy-model discretization
///   w - eta g(w) + eta lambda2 sqrt(1 + lambda1 L(w)) (.) xi,  xi ~ N(0, I2).
Vector step_toy_power_law(const EmpiricalToyLoss& landscape, const Vector& w, double lambda1,
                          double lambda2, double eta, RngStream& rng);

/// lambda2 = sqrt(Tr(C) / 2), so that Tr Cov(lambda2 xi) equals the trace of
/// the exact minibatch-gradient covariance at w_star.
double match_lambda2(const EmpiricalToyLoss& landscape, const Vector& w_star,
                     std::size_t batch_size);

/// Iterates the configured step `steps` times from w0, recording every
/// `record_every` steps (plus the initial state). Bit-deterministic given the
/// config's (master_seed, stream_id).
Trajectory run(const IntegratorConfig& config, const Landscape& landscape, const NoiseSpec& noise,
               const Vector& w0);

}  // namespace pld
