// Copyright 2026 The metachan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "metachan/channel.hpp"
#include "metachan/nv_model.hpp"
#include "metachan/rng.hpp"
#include "metachan/trajectory.hpp"

using namespace metachan;

namespace {

// Steps per second for one NV trajectory under photon-count readout.
void BM_WeakReadoutSteps(benchmark::State& state) {
  SimConfig cfg;
  cfg.m = state.range(0);
  cfg.readout = WeakReadout{};
  cfg.record = RecordMode::Binned;
  const TrajectorySimulator sim(rim_kraus(nv::make_model(nv::NVParams{})), cfg);
  int i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim.run(i++));
  state.SetItemsProcessed(state.iterations() * cfg.m);
}
BENCHMARK(BM_WeakReadoutSteps)->Arg(60000);

void BM_ProbeSteps(benchmark::State& state) {
  SimConfig cfg;
  cfg.m = 60000;
  cfg.record = RecordMode::Full;
  const TrajectorySimulator sim(rim_kraus(nv::make_model(nv::NVParams{})), cfg);
  int i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim.run(i++));
  state.SetItemsProcessed(state.iterations() * cfg.m);
}
BENCHMARK(BM_ProbeSteps);

void BM_ExactEnumeration(benchmark::State& state) {
  const auto ch = rim_kraus(nv::make_model(nv::NVParams{}));
  const ComplexMatrix rho0 = ComplexMatrix::Identity(3, 3) / 3.0;
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    double total = 0.0;
    enumerate_exact(ch, rho0, m, [&](const std::vector<std::uint8_t>&, double p, const ComplexMatrix&) { total += p; });
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_ExactEnumeration)->Arg(12)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
