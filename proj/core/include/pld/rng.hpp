// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace pld {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Maps a 128-bit counter under a 64-bit key to 128
/// pseudo-random bits.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter encrypt(Counter ctr, Key key) noexcept;
};

/// Mixes a parent stream id with a child index (SplitMix64 finalizer).
/// Used to give every trial / draw / sweep point its own stream.
std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index) noexcept;

/// A reproducible random stream.
///
/// The Philox key is the 64-bit master seed; the counter is
/// (block index, stream id). Two streams with the same (master_seed,
/// stream_id) produce identical sequences regardless of which thread
/// consumes them, so parallel Monte Carlo results depend only on seeds.
///
/// All variate transforms are implemented here (no std:: distributions),
/// which keeps sequences identical across standard libraries.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;
  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  /// Standard normal via Box-Muller (the second variate is cached).
  double normal() noexcept;
  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 boosts to shape + 1
  /// and scales by U^(1/shape).
  double gamma(double shape);
  /// Student-t with `dof` degrees of freedom: Z / sqrt(chi2_dof / dof).
  double student_t(double dof);
  /// Uniform integer in [0, n) by rejection (unbiased). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pld
