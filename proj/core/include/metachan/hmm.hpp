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
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace metachan {

// Hidden Markov model with Poisson emissions on binned photon counts.
struct HMMModel {
  int k = 0;
  std::vector<double> rates;  // mean counts per window
  Eigen::MatrixXd trans;      // row-stochastic
  Eigen::VectorXd init;

  void validate() const;
};

// Forward algorithm in log space. Returns -infinity when the trace is
// impossible under the model.
double log_likelihood(const HMMModel& model, std::span<const std::int64_t> counts);

struct BaumWelchOptions {
  int max_iter = 300;
  double tol = 1e-8;       // relative log-likelihood improvement
  double stay_init = 0.99;
};

struct BaumWelchResult {
  HMMModel model;  // states ordered by ascending rate
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;  // LL never dropped by more than 1e-9 (relative)
  std::vector<double> history;
};

// Initial rates at the (j+1)/(k+1) quantiles of the counts (25/50/75 % for
// k = 3); transitions start at stay_init on the diagonal.
BaumWelchResult baum_welch(std::span<const std::int64_t> counts, int k, const BaumWelchOptions& opt = {});

std::vector<int> viterbi(const HMMModel& model, std::span<const std::int64_t> counts);

// Log-probability of a state path jointly with the observations.
double path_log_probability(const HMMModel& model, std::span<const std::int64_t> counts, std::span<const int> path);

struct Jump {
  std::size_t bin = 0;  // first bin in the new state
  int from = 0;
  int to = 0;
};

std::vector<Jump> jumps(std::span<const int> path);

struct DwellTime {
  int state = 0;
  bool visited = false;
  int segments = 0;
  double empirical_mean = 0.0;  // seconds, mean of completed runs (all runs if none completed)
  double implied = 0.0;         // window * rim_time / (1 - stay); infinity when absorbing
  bool absorbing = false;
};

std::vector<DwellTime> dwell_times(std::span<const int> path, const HMMModel& model, double rim_time, long long window);

struct StateClass {
  std::vector<int> members;
  double rate = 0.0;  // occupancy-weighted mean rate
  double occupancy = 0.0;
};

// Groups states whose rates differ by less than rel_tol (relative) into one
// class; classes are ordered by ascending rate, so the first is dark.
std::vector<StateClass> merge_states(const HMMModel& model, std::span<const int> path, double rel_tol = 0.05);

}  // namespace metachan
