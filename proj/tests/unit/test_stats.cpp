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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "metachan/nv_model.hpp"
#include "metachan/stats.hpp"
#include "test_util.hpp"

using namespace metachan;
using namespace metachan::testing;

namespace {

std::vector<std::int64_t> poisson_samples(std::mt19937_64& gen, const std::vector<PoissonComponent>& comps, int n) {
  std::vector<double> w;
  for (const auto& c : comps) w.push_back(c.weight);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  std::vector<std::int64_t> out(n);
  for (auto& x : out) {
    std::poisson_distribution<std::int64_t> pd(comps[pick(gen)].mean);
    x = pd(gen);
  }
  return out;
}

}  // namespace

TEST_CASE("polarization") {
  const std::vector<std::uint8_t> a{0, 1, 0, 1};
  const std::vector<std::uint8_t> b(10, 1);
  const std::vector<std::uint8_t> c{0, 0, 0, 1, 0, 1, 0, 0, 1, 1};
  CHECK(polarization(a) == doctest::Approx(0.0));
  CHECK(polarization(std::vector<std::uint8_t>(8, 0)) == doctest::Approx(0.5));
  CHECK(polarization(b) == doctest::Approx(-0.5));
  CHECK(polarization(c) == doctest::Approx(0.1));
  CHECK_THROWS(polarization(std::vector<std::uint8_t>{}));
}

TEST_CASE("bin_trace") {
  const std::vector<std::uint8_t> o{1, 0, 2, 0, 0, 1, 3};
  const auto t = bin_trace(o, 3, 1e-6);
  REQUIRE(t.counts.size() == 2);
  CHECK(t.counts[0] == 3);
  CHECK(t.counts[1] == 1);
  CHECK(t.window == 3);
  CHECK(bin_trace(o, 1).counts.size() == 7);
  CHECK(bin_trace(o, 8).counts.empty());
  CHECK_THROWS(bin_trace(o, 0));
}

TEST_CASE("histogram") {
  const std::vector<std::int64_t> s{3, 1, 3, 0, 3};
  const auto h = make_histogram(s);
  CHECK(h.values == std::vector<std::int64_t>{0, 1, 3});
  CHECK(h.weights == std::vector<double>{1, 1, 3});
  CHECK(h.total() == 5.0);
}

TEST_CASE("expected photon rate") {
  const auto ch = rim_kraus(nv::make_model(nv::NVParams{}));
  const WeakReadout ro{0.065, 0.049};
  const ComplexMatrix mixed = ComplexMatrix::Identity(3, 3) / 3.0;
  const double p1 = measurement_probability(ch, mixed, 1);
  CHECK(expected_photon_rate(ch, ro, mixed) == doctest::Approx(0.065 * (1 - p1) + 0.049 * p1).epsilon(1e-12));
  const auto qnd = rim_kraus({1.0 * pauli_z(), 0.0 * pauli_z(), 0.0, 3.141592653589793});
  CHECK(expected_photon_rate(qnd, ro, basis_projector(2, 0)) == doctest::Approx(0.065).epsilon(1e-9));
}

TEST_CASE("fixed point frequency") {
  const auto ch = rim_kraus({0.9 * pauli_z(), 0.3 * pauli_z(), 0.5, 0.4});
  CHECK(fixed_point_frequency(ch, basis_projector(2, 0)) ==
        doctest::Approx(std::pow(std::cos(0.45 + 0.2), 2)).epsilon(1e-12));
  const auto nvch = rim_kraus(nv::make_model(nv::NVParams{}));
  const ComplexMatrix mixed = ComplexMatrix::Identity(3, 3) / 3.0;
  CHECK(fixed_point_frequency(nvch, mixed) == doctest::Approx(measurement_probability(nvch, mixed, 1)).epsilon(1e-12));
}

TEST_CASE("poisson helpers") {
  CHECK(poisson_cdf(0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(poisson_cdf(2, 2.0) == doctest::Approx(5.0 * std::exp(-2.0)).epsilon(1e-13));
  CHECK(poisson_cdf(-1, 2.0) == 0.0);
  CHECK(poisson_log_pmf(3, 1.5) == doctest::Approx(3 * std::log(1.5) - 1.5 - std::log(6.0)).epsilon(1e-13));
  double s = 0.0;
  for (int k = 0; k < 200; ++k) s += std::exp(poisson_log_pmf(k, 40.0));
  CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("mixture fit recovers a single Poisson") {
  std::mt19937_64 gen(1);
  const auto samples = poisson_samples(gen, {{1.0, 30.0}}, 5000);
  const auto fit = fit_mixture(make_histogram(samples), 3);
  CHECK(fit.k == 1);
  CHECK(std::abs(fit.best.components[0].mean - 30.0) / 30.0 <= 0.03);
  for (size_t k = 1; k < fit.log_likelihood.size(); ++k) CHECK(fit.log_likelihood[k] >= fit.log_likelihood[k - 1] - 1e-6);
}

TEST_CASE("mixture fit separates two components") {
  std::mt19937_64 gen(2);
  const auto samples = poisson_samples(gen, {{0.5, 20.0}, {0.5, 40.0}}, 5000);
  const auto fit = fit_mixture(make_histogram(samples), 4);
  CHECK(fit.k == 2);
  REQUIRE(fit.best.components.size() == 2);
  CHECK(std::abs(fit.best.components[0].mean - 20.0) / 20.0 <= 0.05);
  CHECK(std::abs(fit.best.components[1].mean - 40.0) / 40.0 <= 0.05);
  CHECK(std::abs(fit.best.components[0].weight - 0.5) <= 0.05);

  // Histogram order does not matter.
  std::vector<std::int64_t> shuffled = samples;
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  const auto again = fit_mixture(make_histogram(shuffled), 4);
  CHECK(again.k == fit.k);
  CHECK(again.best.components[0].mean == fit.best.components[0].mean);
}

TEST_CASE("mixture input validation") {
  CHECK_THROWS(fit_mixture(Histogram{}, 2));
  const std::vector<std::int64_t> s{1, 2, 3};
  CHECK_THROWS(fit_mixture(make_histogram(s), 0));
  CHECK_THROWS(fit_mixture(make_histogram(s), 5));
}

TEST_CASE("threshold fidelity") {
  PoissonMixture same{{{0.5, 30.0}, {0.5, 30.0}}};
  const auto best_same = optimal_threshold(same);
  CHECK(best_same.F == doctest::Approx(0.5).epsilon(1e-9));

  PoissonMixture far{{{0.5, 5.0}, {0.5, 200.0}}};
  CHECK(optimal_threshold(far).F >= 0.999999);

  PoissonMixture mix{{{0.5, 20.0}, {0.5, 40.0}}};
  const auto t = threshold_fidelity(mix, 29);
  std::mt19937_64 gen(3);
  std::poisson_distribution<int> d(20.0), b(40.0);
  const int n = 1000000;
  int dark_ok = 0, bright_ok = 0;
  for (int i = 0; i < n; ++i) {
    dark_ok += d(gen) <= 29;
    bright_ok += b(gen) > 29;
  }
  const double sim = 0.5 * (dark_ok + bright_ok) / static_cast<double>(n);
  CHECK(std::abs(t.F - sim) <= 0.005);
  CHECK(t.F_dark == doctest::Approx(poisson_cdf(29, 20.0)).epsilon(1e-12));

  const auto opt = optimal_threshold(mix);
  CHECK(opt.F >= t.F - 1e-12);
  CHECK(opt.threshold >= 20);
  CHECK(opt.threshold <= 40);

  PoissonMixture three{{{0.4, 10.0}, {0.3, 50.0}, {0.3, 60.0}}};
  const auto t3 = threshold_fidelity(three, 30);
  const double fb = (0.3 * (1 - poisson_cdf(30, 50.0)) + 0.3 * (1 - poisson_cdf(30, 60.0))) / 0.6;
  CHECK(t3.F_bright == doctest::Approx(fb).epsilon(1e-12));
}
