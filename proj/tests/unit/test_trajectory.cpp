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

#include <cmath>
#include <map>

#include "doctest.h"
#include "metachan/nv_model.hpp"
#include "metachan/stats.hpp"
#include "metachan/trajectory.hpp"
#include "test_util.hpp"

using namespace metachan;
using namespace metachan::testing;

namespace {

const double kPi = std::acos(-1.0);

QuantumChannel commuting_qubit() { return rim_kraus({0.9 * pauli_z(), 0.3 * pauli_z(), 0.5, 0.4}); }

double binom_pmf(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                  (n - k) * std::log1p(-p));
}

}  // namespace

TEST_CASE("strong step on an eigenstate of a commuting model") {
  const auto ch = commuting_qubit();
  SimConfig cfg;
  cfg.m = 1;
  const TrajectorySimulator sim(ch, cfg);
  SplitMix64 rng(5);
  for (int k = 0; k < 2; ++k) {
    const double bk = k == 0 ? 0.9 : -0.9;
    const double p1 = std::pow(std::cos(bk * 0.5 + 0.2), 2);
    ComplexMatrix rho = basis_projector(2, k);
    int ones = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const auto [out, p] = sim.step(rho, rng);
      ones += out;
      CHECK(p > 0.0);
    }
    CHECK(max_abs(rho - basis_projector(2, k)) < 1e-12);
    CHECK(std::abs(ones / static_cast<double>(n) - p1) < 4.0 * std::sqrt(p1 * (1 - p1) / n));
  }
}

TEST_CASE("dark readout always reports zero photons") {
  SplitMix64 rng(6);
  const auto ch = rim_kraus({random_hermitian(3, rng), random_hermitian(3, rng), 0.7, 0.3});
  SimConfig cfg;
  cfg.m = 1;
  cfg.readout = WeakReadout{0.0, 0.0};
  const TrajectorySimulator sim(ch, cfg);
  for (int i = 0; i < 20; ++i) {
    const ComplexMatrix rho0 = random_state(3, rng);
    ComplexMatrix rho = rho0;
    const auto [n, p] = sim.step(rho, rng);
    CHECK(n == 0);
    CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_abs(rho - ch.apply(rho0)) <= 1e-12);
  }
}

TEST_CASE("weak readout sum rule") {
  SplitMix64 rng(7);
  const auto ch = rim_kraus({random_hermitian(3, rng), random_hermitian(3, rng), 0.4, 1.1});
  const auto weak = weak_kraus(ch, WeakReadout{0.065, 0.049});
  for (int i = 0; i < 20; ++i) {
    const ComplexMatrix rho = random_state(3, rng);
    double s = 0.0;
    for (int n = 0; n < weak.num_outcomes(); ++n) s += weak.apply_outcome(n, rho).trace().real();
    CHECK(std::abs(s - 1.0) <= 1e-10);
  }
}

TEST_CASE("zero-length trajectory") {
  SimConfig cfg;
  cfg.m = 0;
  const TrajectorySimulator sim(commuting_qubit(), cfg);
  const auto t = sim.run(0);
  CHECK(t.outcomes.empty());
  CHECK(max_abs(t.final_state - ComplexMatrix::Identity(2, 2) / 2.0) == 0.0);
  CHECK(t.snapshots.size() == 1);
}

TEST_CASE("QND trajectories keep the starting projector") {
  SimConfig cfg;
  cfg.m = 2000;
  cfg.initial_state = basis_projector(2, 1);
  cfg.dark_ref = basis_projector(2, 1);
  cfg.bright_ref = basis_projector(2, 0);
  const TrajectorySimulator sim(commuting_qubit(), cfg);
  const auto t = sim.run(3);
  for (const auto& s : t.snapshots) CHECK(s.F_D == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("batch determinism") {
  SimConfig cfg;
  cfg.m = 3000;
  cfg.n_traj = 8;
  cfg.readout = WeakReadout{};
  cfg.master_seed = 42;
  const TrajectorySimulator sim(rim_kraus(nv::make_model(nv::NVParams{})), cfg);
  const auto one = sim.run_batch(1);
  const auto four = sim.run_batch(4);
  REQUIRE(one.size() == 8);
  for (size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].outcomes == four[i].outcomes);
    CHECK(one[i].log_weight == four[i].log_weight);
    CHECK(one[i].seed == four[i].seed);
  }
  CHECK(sim.run(0).outcomes == one[0].outcomes);
  CHECK(one[0].outcomes != one[1].outcomes);

  SimConfig single = cfg;
  single.n_traj = 1;
  const TrajectorySimulator s1(rim_kraus(nv::make_model(nv::NVParams{})), single);
  CHECK(s1.run_batch().front().outcomes == one[0].outcomes);
}

TEST_CASE("binned recording drops the partial window") {
  SimConfig full;
  full.m = 1050;
  full.readout = WeakReadout{};
  full.master_seed = 9;
  SimConfig binned = full;
  binned.record = RecordMode::Binned;
  binned.bin_window = 100;
  const auto ch = rim_kraus(nv::make_model(nv::NVParams{}));
  const auto a = TrajectorySimulator(ch, full).run(2);
  const auto b = TrajectorySimulator(ch, binned).run(2);
  const auto trace = bin_trace(a.outcomes, 100);
  CHECK(b.bins == trace.counts);
  CHECK(b.bins.size() == 10);
}

TEST_CASE("exact enumeration") {
  const auto ch = commuting_qubit();
  const ComplexMatrix rho0 = ComplexMatrix::Identity(2, 2) / 2.0;

  const auto one = enumerate_exact(ch, rho0, 1);
  REQUIRE(one.size() == 2);
  CHECK(one[0].probability == doctest::Approx(measurement_probability(ch, rho0, 0)).epsilon(1e-14));
  CHECK(one[1].probability == doctest::Approx(measurement_probability(ch, rho0, 1)).epsilon(1e-14));

  const int m = 12;
  const auto branches = enumerate_exact(ch, rho0, m);
  double total = 0.0;
  ComplexMatrix sum = ComplexMatrix::Zero(2, 2);
  std::map<int, double> ones_dist;
  for (const auto& b : branches) {
    total += b.probability;
    sum += b.state;
    int ones = 0;
    for (auto o : b.outcomes) ones += o;
    ones_dist[ones] += b.probability;
  }
  CHECK(std::abs(total - 1.0) <= 1e-9);
  CHECK(max_abs(sum - apply_channel(ch, rho0, m)) <= 1e-10);

  double tv = 0.0;
  for (int k = 0; k <= m; ++k) {
    double expect = 0.0;
    for (int j = 0; j < 2; ++j) expect += 0.5 * binom_pmf(m, k, measurement_probability(ch, basis_projector(2, j), 1));
    tv += std::abs(ones_dist[k] - expect);
  }
  CHECK(0.5 * tv <= 1e-9);

  CHECK_THROWS(enumerate_exact(ch, rho0, 30));
}

TEST_CASE("Monte Carlo mean state converges to the channel") {
  nv::NVParams p;
  const auto ch = rim_kraus(nv::make_model(p));
  SimConfig cfg;
  cfg.m = 50;
  cfg.n_traj = 4000;
  cfg.readout = WeakReadout{};
  cfg.initial_state = ComplexMatrix::Zero(3, 3);
  cfg.initial_state(0, 0) = 0.5;
  cfg.initial_state(1, 1) = 0.5;
  cfg.initial_state(0, 1) = cfg.initial_state(1, 0) = 0.3;
  cfg.master_seed = 77;
  const TrajectorySimulator sim(ch, cfg);
  const auto trajs = sim.run_batch(1);
  ComplexMatrix mean = ComplexMatrix::Zero(3, 3);
  for (const auto& t : trajs) {
    mean += t.final_state;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(t.final_state, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    CHECK(std::abs(t.final_state.trace() - 1.0) <= 1e-8);
  }
  mean /= static_cast<double>(trajs.size());
  CHECK(trace_distance(mean, apply_channel(ch, cfg.initial_state, cfg.m)) <= 3.0 / std::sqrt(4000.0));
}

TEST_CASE("interleaved rotations") {
  nv::NVParams p;
  const auto ch = rim_kraus(nv::make_model(p));
  SimConfig base;
  base.m = 400;
  base.readout = WeakReadout{};
  base.master_seed = 5;
  base.initial_state = nv::dark_state();
  const auto plain = TrajectorySimulator(ch, base).run(0);

  SimConfig ident = base;
  ident.interleave = Interleave{ComplexMatrix::Identity(3, 3), 10};
  CHECK(TrajectorySimulator(ch, ident).run(0).outcomes == plain.outcomes);

  SimConfig flip = base;
  flip.interleave = Interleave{rf_rotation(3, 0, 1, kPi), 400};
  const auto flipped = TrajectorySimulator(ch, flip).run(0);
  CHECK(std::real(flipped.final_state(0, 0)) < 0.05);
  CHECK(flipped.snapshots.back().F_B > flipped.snapshots.back().F_D);

  SimConfig full = base;
  full.interleave = Interleave{rf_rotation(3, 0, 1, 2.0 * kPi), 400};
  const auto restored = TrajectorySimulator(ch, full).run(0);
  CHECK(std::real(restored.final_state(0, 0)) > 0.9);
  CHECK(restored.snapshots.back().F_D > restored.snapshots.back().F_B);

  SimConfig bad = base;
  bad.interleave = Interleave{2.0 * ComplexMatrix::Identity(3, 3), 1};
  CHECK_THROWS_AS(TrajectorySimulator(ch, bad), NumericalError);
}

TEST_CASE("ensemble fidelity bookkeeping") {
  SimConfig cfg;
  cfg.m = 600;
  cfg.n_traj = 6;
  cfg.readout = WeakReadout{};
  cfg.store_states = true;
  cfg.snapshot_stride = 200;
  const TrajectorySimulator sim(rim_kraus(nv::make_model(nv::NVParams{})), cfg);
  const auto trajs = sim.run_batch(1);
  REQUIRE(trajs.front().snapshots.size() == 4);
  const auto ens = ensemble_fidelity(trajs, nv::dark_state(), nv::bright_state(), 0.05);
  REQUIRE(ens.size() == 4);
  CHECK(ens[0].F_D_mean == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-9));
  CHECK(ens[0].F_B_mean == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-9));
  for (const auto& e : ens) {
    CHECK(e.frac_dark >= 0.0);
    CHECK(e.frac_dark <= 1.0);
    CHECK(e.combined_class <= 1.0 + 1e-12);
  }
  CHECK(reach_fraction(trajs, 0, 600, 0.0) == 1.0);
  CHECK(reach_fraction(trajs, 0, 600, 1.1) == 0.0);
}
