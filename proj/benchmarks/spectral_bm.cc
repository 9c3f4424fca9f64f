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
#include "metachan/spectral.hpp"

using namespace metachan;

namespace {

QuantumChannel nv_channel() { return rim_kraus(nv::make_model(nv::NVParams{})); }

void BM_NaturalRepresentation(benchmark::State& state) {
  const auto ch = nv_channel();
  for (auto _ : state) benchmark::DoNotOptimize(natural_representation(ch));
}
BENCHMARK(BM_NaturalRepresentation);

void BM_GeneralEig(benchmark::State& state) {
  const ComplexMatrix phi = natural_representation(nv_channel()).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(general_eig(phi));
}
BENCHMARK(BM_GeneralEig);

// Full spectrum, classification and EMS, what `metachan spectrum` does per point.
void BM_DecomposeAndEms(benchmark::State& state) {
  const auto ch = nv_channel();
  for (auto _ : state) {
    const auto spec = decompose(ch);
    benchmark::DoNotOptimize(ems_1d(spec));
  }
}
BENCHMARK(BM_DecomposeAndEms);

void BM_ChannelPower(benchmark::State& state) {
  const auto phi = natural_representation(nv_channel());
  for (auto _ : state) benchmark::DoNotOptimize(phi.pow(state.range(0)));
}
BENCHMARK(BM_ChannelPower)->Arg(1000)->Arg(600000);

}  // namespace

BENCHMARK_MAIN();
