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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "metachan/channel.hpp"
#include "metachan/rng.hpp"

namespace metachan {

struct Interleave {
  ComplexMatrix unitary;
  long long every_k = 1;
};

enum class RecordMode {
  Full,    // every outcome kept
  Binned,  // outcomes summed over bin_window steps; partial last bin dropped
};

struct SimConfig {
  long long m = 0;
  int n_traj = 1;
  long long snapshot_stride = 0;  // 0 selects max(1, m / 200)
  std::optional<WeakReadout> readout;  // absent: outcomes are probe results
  ComplexMatrix initial_state;         // empty selects I / d
  std::uint64_t master_seed = 0;
  std::optional<Interleave> interleave;
  RecordMode record = RecordMode::Full;
  long long bin_window = 3000;
  bool store_states = false;
  // Fidelity references; empty selects the NV dark/bright states when d == 3.
  ComplexMatrix dark_ref;
  ComplexMatrix bright_ref;

  long long effective_stride() const;
};

struct Snapshot {
  long long step = 0;
  double F_D = 0.0;
  double F_B = 0.0;
  long long cumulative_photons = 0;
  ComplexMatrix state;  // only when SimConfig::store_states
};

struct Trajectory {
  int index = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> outcomes;  // RecordMode::Full
  std::vector<std::int64_t> bins;      // RecordMode::Binned
  std::vector<Snapshot> snapshots;
  double log_weight = 0.0;
  long long total_photons = 0;
  ComplexMatrix final_state;
};

class TrajectorySimulator {
 public:
  // probe_channel is the two-outcome RIM channel; the readout in cfg (if any)
  // is attached here.
  TrajectorySimulator(const QuantumChannel& probe_channel, SimConfig cfg);
  ~TrajectorySimulator();
  TrajectorySimulator(const TrajectorySimulator&) = delete;
  TrajectorySimulator& operator=(const TrajectorySimulator&) = delete;

  const SimConfig& config() const { return cfg_; }
  const QuantumChannel& instrument() const { return instrument_; }

  // One measurement: samples an outcome, overwrites rho with the normalized
  // post-measurement state and returns the outcome and its probability.
  std::pair<int, double> step(ComplexMatrix& rho, SplitMix64& rng) const;

  Trajectory run(int index) const;
  // workers = 0 uses the hardware concurrency.
  std::vector<Trajectory> run_batch(int workers = 0) const;
  std::vector<Trajectory> run_indices(const std::vector<int>& indices, int workers = 0) const;

 private:
  SimConfig cfg_;
  QuantumChannel instrument_;
  ComplexMatrix rho0_;
};

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

struct Branch {
  std::vector<std::uint8_t> outcomes;
  double probability = 0.0;
  ComplexMatrix state;  // unnormalized: probability * normalized state
};

using BranchVisitor = std::function<void(const std::vector<std::uint8_t>&, double, const ComplexMatrix&)>;

// Depth-first walk of every outcome sequence of length m. Zero-probability
// branches are skipped. Throws when alphabet^m exceeds max_branches.
void enumerate_exact(const QuantumChannel& instrument, const ComplexMatrix& rho0, int m, const BranchVisitor& visit,
                     double max_branches = 1e7);
std::vector<Branch> enumerate_exact(const QuantumChannel& instrument, const ComplexMatrix& rho0, int m,
                                    double max_branches = 1e7);

// exp(-i angle/2 (|a><b| + |b><a|)) on a d-level system.
ComplexMatrix rf_rotation(int d, int a, int b, double angle);

struct EnsemblePoint {
  long long step = 0;
  double F_D_mean = 0.0;      // fidelities of the ensemble-averaged state
  double F_B_mean = 0.0;
  double mean_max_F = 0.0;    // trajectory average of max(F_D, F_B)
  double F_D_class = 0.0;     // dark-classified sub-ensemble vs dark state
  double F_B_class = 0.0;     // bright-classified sub-ensemble vs bright state
  double combined_class = 0.0;
  double frac_dark = 0.0;
};

// Per-snapshot ensemble statistics. Trajectories are classified dark when
// their running mean photon count per step is below rate_threshold.
// Requires stored states and identical snapshot grids.
std::vector<EnsemblePoint> ensemble_fidelity(const std::vector<Trajectory>& trajs, const ComplexMatrix& dark,
                                             const ComplexMatrix& bright, double rate_threshold);

// Fraction of trajectories whose max(F_D, F_B) reaches f_min at some snapshot
// with step in [lo, hi].
double reach_fraction(const std::vector<Trajectory>& trajs, double lo, double hi, double f_min);

}  // namespace metachan
