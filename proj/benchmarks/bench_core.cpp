// SPDX-License-Identifier: Apache-2.0
#include "pld/dynamics.hpp"
#include "pld/escape.hpp"
#include "pld/landscape.hpp"
#include "pld/pacbayes.hpp"
#include "pld/rng.hpp"
#include "pld/stationary.hpp"
#include "pld/tailfit.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>

namespace {

void BM_Philox_Normal(benchmark::State& state) {
  pld::RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_Philox_Normal);

void BM_Philox_StudentT(benchmark::State& state) {
  pld::RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.student_t(3.0));
}
BENCHMARK(BM_Philox_StudentT);

void BM_StepPowerLaw_1D(benchmark::State& state) {
  const pld::Landscape basin =
      pld::QuadraticBasin(pld::Vector::Zero(1), pld::Matrix::Constant(1, 1, 1.0));
  pld::ScalarNoiseParams noise;
  noise.sigma_h = 1.0 / (0.05 * 3.0);
  noise.eta = 0.05;
  pld::RngStream rng(2, 0);
  pld::Vector w = pld::Vector::Constant(1, 0.1);
  for (auto _ : state) {
    w = pld::step_power_law(basin, w, noise, 0.05, rng);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_StepPowerLaw_1D);

void BM_StepSgd_Toy(benchmark::State& state) {
  const auto toy = pld::EmpiricalToyLoss::generate(1000, 1);
  pld::RngStream rng(3, 0);
  pld::Vector w{{1.0, 1.0}};
  const auto batch = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pld::step_sgd(toy, w, batch, rng, 0.001).data());
  }
}
BENCHMARK(BM_StepSgd_Toy)->Arg(1)->Arg(32);

void BM_Sample1D(benchmark::State& state) {
  const pld::PowerLawKappa1D dist(2.0, 1.0, 1.0);
  pld::RngStream rng(4, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pld::sample_1d(dist, static_cast<std::size_t>(state.range(0)), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sample1D)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_CdfAtSorted(benchmark::State& state) {
  const pld::PowerLawKappa1D dist(2.0, 1.0, 1.0);
  pld::RngStream rng(5, 0);
  auto xs = pld::sample_1d(dist, static_cast<std::size_t>(state.range(0)), rng);
  std::sort(xs.begin(), xs.end());
  for (auto _ : state) benchmark::DoNotOptimize(pld::cdf_at_sorted(xs, dist));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CdfAtSorted)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_FitKappa(benchmark::State& state) {
  pld::RngStream rng(6, 0);
  const auto xs = pld::sample_1d(pld::PowerLawKappa1D::from_scale(3.0, 1.0, 0.0),
                                 static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(pld::fit_power_law_kappa(xs));
}
BENCHMARK(BM_FitKappa)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_QuadratureNormalizer(benchmark::State& state) {
  const pld::PowerLawKappa1D dist(1.5, 2.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(dist.quadrature_normalizer());
}
BENCHMARK(BM_QuadratureNormalizer);

void BM_TauPowerLaw(benchmark::State& state) {
  const pld::EscapeProblem1D p{1.0, 0.5, 1.0, 0.01, 10.0, 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(pld::tau_power_law_1d(p));
}
BENCHMARK(BM_TauPowerLaw);

void BM_KlUpperBound(benchmark::State& state) {
  const auto d = static_cast<int>(state.range(0));
  pld::BoundInputs in;
  in.hessian = 2.0 * pld::Matrix::Identity(d, d);
  in.sigma_g = pld::Matrix::Identity(d, d);
  in.eta = 0.1;
  in.kappa = d + 1.0;
  in.n_samples = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(pld::kl_upper_bound(in));
}
BENCHMARK(BM_KlUpperBound)->Arg(2)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
