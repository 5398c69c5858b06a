// Copyright 2026 The BSM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "bsm/array_model.h"
#include "bsm/design.h"
#include "bsm/hrtf.h"
#include "bsm/imagls.h"
#include "bsm/render.h"

namespace {

using namespace bsm;

// Design problem on a reduced grid with `bins` frequencies in 1.5-20 kHz.
DesignProblem bench_problem(int bins, int n_theta, int n_phi) {
  std::vector<double> freqs(static_cast<std::size_t>(bins));
  for (int i = 0; i < bins; ++i) freqs[static_cast<std::size_t>(i)] = 1500.0 + 18500.0 * i / bins;
  const auto grid = gauss_product_grid(n_theta, n_phi);
  const SyntheticHead head;
  const auto hrtf = synthetic_sphere_hrtf(head, grid, freqs);
  const auto ring = synthetic_sphere_hrtf(head, horizontal_ring(72), freqs);
  return make_design_problem(ArrayGeometry::semicircular6(), hrtf, 1e-4, &ring);
}

void BM_SteeringMatrix(benchmark::State& state) {
  const auto geometry = ArrayGeometry::semicircular6();
  const auto grid = gauss_product_grid(20, 25);
  const double f = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(steering_matrix(geometry, f, grid.directions).entries.data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_SteeringMatrix)->Arg(1000)->Arg(8000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_MaglsSingleBin(benchmark::State& state) {
  const auto problem = bench_problem(1, 20, 25);
  MaglsOptions opts;
  opts.max_iter = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(magls_filters(problem, opts).coeffs.front().data());
}
BENCHMARK(BM_MaglsSingleBin)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ImaglsObjectiveGradient(benchmark::State& state) {
  const auto problem = bench_problem(static_cast<int>(state.range(0)), 20, 25);
  ImaglsConfig cfg;
  cfg.lambda = 0.035;
  cfg.magnitude_weighting = MagnitudeWeighting::kErbRate;
  cfg.ild_spec = make_ild_spec(1500.0, 20000.0, 1.0, problem.horizontal.directions);
  const ImaglsObjective objective(problem, cfg);
  const RealVector x = objective.pack(mse_filters(problem));
  RealVector grad(x.size());
  for (auto _ : state) benchmark::DoNotOptimize(objective.evaluate(x, &grad).total);
}
BENCHMARK(BM_ImaglsObjectiveGradient)->Arg(100)->Arg(790)->Unit(benchmark::kMillisecond);

void BM_RenderBinaural(benchmark::State& state) {
  FilterBank bank;
  bank.frequencies_hz = dft_frequency_grid(kDefaultSampleRate, kDefaultDftSize);
  for (std::size_t f = 0; f < bank.frequencies_hz.size(); ++f) bank.coeffs.push_back(ComplexMatrix::Ones(6, 2));
  const auto fir = filters_to_fir(bank, kDefaultTaps);
  MultichannelAudio mics;
  mics.samples = RealMatrix::Random(6, 48000);
  for (auto _ : state) benchmark::DoNotOptimize(render_binaural(mics, fir).data());
  state.SetItemsProcessed(state.iterations() * mics.frames());
}
BENCHMARK(BM_RenderBinaural)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
