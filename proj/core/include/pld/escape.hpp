// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pld/dynamics.hpp"
#include "pld/landscape.hpp"
#include "pld/linalg.hpp"
#include "pld/noise_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pld {

/// Inputs of the one-dimensional mean escaping time.
struct EscapeProblem1D {
  double h_a = 1.0;
  double h_b_abs = 1.0;
  double delta_l = 1.0;
  double eta = 0.01;
  double sigma_g_a = 1.0;
  double kappa = 2.0;

  void validate() const;
  /// eta sigma_g_a / delta_l; the formulas assume this is small.
  double temperature_ratio() const;
  /// Human-readable notes, e.g. when temperature_ratio() exceeds 0.1.
  std::vector<std::string> warnings() const;
};

/// (2 pi / ((1 - 1/(2 kappa)) sqrt(H_a |H_b|))) (1 + 2 dL / (kappa eta sigma_g_a))^(kappa - 1/2)
double tau_power_law_1d(const EscapeProblem1D& p);

/// (2 pi / sqrt(H_a |H_b|)) exp(2 dL / (eta sigma)), the kappa -> infinity limit of
/// tau_power_law_1d.
double tau_langevin_1d(double h_a, double h_b_abs, double delta_l, double eta, double sigma);

/// eta alpha (width / (eta sigma))^alpha, an order-of-magnitude estimate with unit prefactor.
double tau_alpha_stable_1d(double alpha, double eta, double sigma, double width);

/// Inputs of the d-dimensional escape time through a single saddle.
class EscapeProblemMulti {
 public:
  EscapeProblemMulti(Matrix hessian_a, Matrix hessian_b, double sigma_e, double delta_l,
                     double eta, double kappa);

  std::size_t dim() const { return static_cast<std::size_t>(hessian_a_.rows()); }
  const Matrix& hessian_a() const { return hessian_a_; }
  const Matrix& hessian_b() const { return hessian_b_; }
  double sigma_e() const { return sigma_e_; }
  double delta_l() const { return delta_l_; }
  double eta() const { return eta_; }
  double kappa() const { return kappa_; }

  /// Product of the positive eigenvalues of H_a.
  double det_a_plus() const { return det_a_plus_; }
  /// det H_b (negative).
  double det_b() const { return det_b_; }
  /// The single negative eigenvalue of H_b.
  double h_be() const { return h_be_; }

 private:
  Matrix hessian_a_, hessian_b_;
  double sigma_e_, delta_l_, eta_, kappa_;
  double det_a_plus_ = 0.0, det_b_ = 0.0, h_be_ = 0.0;
};

/// 2 pi sqrt(-det H_b) / ((1 - d/(2 kappa)) sqrt(det H_a+)) / |H_be|
///   * (1 + dL / (eta kappa sigma_e))^(kappa - 1/2)
double tau_power_law_multi(const EscapeProblemMulti& p);

// ---------------------------------------------------------------------------
// Monte Carlo first passage on a double well

enum class EscapeMode { kLangevin, kPowerLaw };

/// kSaddle stops at the first step with w >= saddle_b. kOtherMinimum stops at
/// the first step with w >= min_c, i.e. after the full transition.
enum class EscapeCriterion { kSaddle, kOtherMinimum };

std::string_view to_string(EscapeMode mode);
EscapeMode parse_escape_mode(std::string_view text);
std::string_view to_string(EscapeCriterion criterion);
EscapeCriterion parse_escape_criterion(std::string_view text);

struct FirstPassageConfig {
  double eta = 0.01;
  std::size_t max_steps = 10'000'000;
  std::size_t trials = 1000;
  std::uint64_t master_seed = 0;
  EscapeMode mode = EscapeMode::kPowerLaw;
  EscapeCriterion criterion = EscapeCriterion::kSaddle;
  StochasticCalculus calculus = StochasticCalculus::kHanggiKlimontovich;
  unsigned threads = 0;

  void validate() const;
};

struct FirstPassageStats {
  std::size_t trials = 0;
  std::size_t escaped = 0;
  std::size_t censored = 0;
  /// Mean of step * eta over escaped trials; empty when nothing escaped.
  std::optional<double> mean_time;
  /// 1.96 standard errors of mean_time (0 with a single escape).
  double ci95 = 0.0;
  /// Per trial, in trial order; empty entries are censored trials.
  std::vector<std::optional<double>> passage_times;
};

/// Runs `trials` independent scalar trajectories from min_a.
///
/// kLangevin uses the constant variance noise.sigma_g. kPowerLaw uses the
/// loss-form variance C(w) = sigma_g + (2 sigma_h / H)(L(w) - L(a)), with H =
/// noise.curvature; noise.eta must equal config.eta. Trial i draws from stream
/// derive_stream(kFirstPassageStream, i) of master_seed, so results do not
/// depend on the thread count.
FirstPassageStats mc_first_passage(const DoubleWell1D& landscape, const ScalarNoiseParams& noise,
                                   const FirstPassageConfig& config);

inline constexpr std::uint64_t kFirstPassageStream = 0x6573636170650001ull;

// ---------------------------------------------------------------------------
// Success rate of escaping on the two-dimensional toy loss

/// Open axis-aligned box; a run escapes once any coordinate leaves it.
struct EscapeBox {
  double lower = 0.0;
  double upper = 2.0;
  bool contains(const Vector& w) const;
};

enum class ToyDynamics { kSgd, kToyPowerLaw };

std::string_view to_string(ToyDynamics mode);
ToyDynamics parse_toy_dynamics(std::string_view text);

struct SuccessRateConfig {
  ToyDynamics mode = ToyDynamics::kToyPowerLaw;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t batch_size = 1;  // kSgd only
  double eta = 0.025;
  std::size_t steps = 500;
  std::size_t runs = 100;
  std::uint64_t master_seed = 0;
  EscapeBox region;
  unsigned threads = 0;

  void validate() const;
};

struct SuccessRateResult {
  std::size_t runs = 0;
  std::size_t escaped = 0;
  double rate = 0.0;
  Vector start;
  /// First step at which each run left the box; empty if it never did.
  std::vector<std::optional<std::size_t>> escape_steps;
};

/// Starting point used by success_rate: the local minimum reached by
/// gradient descent from (1, 1).
Vector toy_start_point(const EmpiricalToyLoss& landscape);

/// Fraction of runs whose trajectory leaves `config.region` within
/// `config.steps` steps. Run r uses stream derive_stream(kSuccessRateStream, r)
/// of master_seed for every mode, lambda and scale, so sweeps are paired.
SuccessRateResult success_rate(const EmpiricalToyLoss& landscape, const SuccessRateConfig& config);

/// Same, with an explicit start point.
SuccessRateResult success_rate(const EmpiricalToyLoss& landscape, const SuccessRateConfig& config,
                               const Vector& start);

inline constexpr std::uint64_t kSuccessRateStream = 0x7375636365737301ull;

}  // namespace pld
