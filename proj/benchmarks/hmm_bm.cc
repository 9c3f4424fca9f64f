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

#include <random>
#include <vector>

#include "metachan/hmm.hpp"
#include "metachan/stats.hpp"

using namespace metachan;

namespace {

std::vector<std::int64_t> telegraph(int n) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::int64_t> counts(n);
  int s = 0;
  for (int i = 0; i < n; ++i) {
    if (u(gen) < 0.006) s = 1 - s;
    counts[i] = std::poisson_distribution<std::int64_t>(s ? 300.0 : 150.0)(gen);
  }
  return counts;
}

void BM_BaumWelch(benchmark::State& state) {
  const auto counts = telegraph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(baum_welch(counts, 2));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BaumWelch)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_Viterbi(benchmark::State& state) {
  const auto counts = telegraph(50000);
  const auto model = baum_welch(counts, 2).model;
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(model, counts));
}
BENCHMARK(BM_Viterbi)->Unit(benchmark::kMillisecond);

void BM_MixtureFit(benchmark::State& state) {
  std::mt19937_64 gen(4);
  std::vector<std::int64_t> samples(300);
  for (size_t i = 0; i < samples.size(); ++i)
    samples[i] = std::poisson_distribution<std::int64_t>(i % 2 ? 3544.0 : 2940.0)(gen);
  const auto hist = make_histogram(samples);
  for (auto _ : state) benchmark::DoNotOptimize(fit_mixture(hist, 4));
}
BENCHMARK(BM_MixtureFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
