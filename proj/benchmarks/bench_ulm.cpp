// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The ulmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "ulm/beamform.hpp"
#include "ulm/localize.hpp"
#include "ulm/rfsim.hpp"

namespace {

using namespace ulm;

std::vector<double> random_channels(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

void BM_DmasFactored(benchmark::State& state) {
  const auto v = random_channels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dmas_pixel(v));
}
BENCHMARK(BM_DmasFactored)->Arg(64)->Arg(128)->Arg(256);

void BM_DmasPairwise(benchmark::State& state) {
  const auto v = random_channels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) sum += v[i] * v[j];
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_DmasPairwise)->Arg(64)->Arg(128)->Arg(256);

struct FrameFixture {
  Probe probe;
  RfFrame frame;
  BeamGrid grid;

  FrameFixture() {
    const double lambda = probe.wavelength();
    frame = simulate_scatterers({{0.0, 10e-3}, {0.4e-3, 9.6e-3}}, probe, 1700, 5);
    grid = BeamGrid::span(-1.6e-3, 2.4e-3, 8.5e-3, 11.5e-3, lambda, lambda / 16.0);
  }
};

const FrameFixture& fixture() {
  static const FrameFixture f;
  return f;
}

void BM_DasFrame(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(das_image(f.frame, f.grid, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.grid.nx * f.grid.nz));
}
BENCHMARK(BM_DasFrame)->Unit(benchmark::kMillisecond);

void BM_FdmasFrame(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(fdmas_image(f.frame, f.grid, {}, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.grid.nx * f.grid.nz));
}
BENCHMARK(BM_FdmasFrame)->Unit(benchmark::kMillisecond);

void BM_Envelope(benchmark::State& state) {
  const auto& f = fixture();
  const auto rf = das_image(f.frame, f.grid, {});
  for (auto _ : state) benchmark::DoNotOptimize(envelope(rf));
}
BENCHMARK(BM_Envelope)->Unit(benchmark::kMillisecond);

Patch gaussian_patch(double x0, double z0, double sigma) {
  Patch p;
  for (std::size_t r = 0; r < Patch::kSize; ++r)
    for (std::size_t c = 0; c < Patch::kSize; ++c) {
      const double dx = static_cast<double>(c) - 2.0 - x0;
      const double dz = static_cast<double>(r) - 2.0 - z0;
      p.values[r][c] = std::exp(-(dx * dx + dz * dz) / (2.0 * sigma * sigma));
    }
  p.pitch_x = 1.0;
  p.pitch_z = 1.0;
  return p;
}

void BM_Localize(benchmark::State& state) {
  const auto method = static_cast<Localizer>(state.range(0));
  const Patch patch = gaussian_patch(0.3, -0.2, 1.2);
  for (auto _ : state) benchmark::DoNotOptimize(localize_patch(patch, method));
  state.SetLabel(to_string(method));
}
BENCHMARK(BM_Localize)
    ->Arg(static_cast<int>(Localizer::SpInterp))
    ->Arg(static_cast<int>(Localizer::GaussFit))
    ->Arg(static_cast<int>(Localizer::WA))
    ->Arg(static_cast<int>(Localizer::RS));

}  // namespace

BENCHMARK_MAIN();
