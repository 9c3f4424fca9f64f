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
#include <span>
#include <vector>

#include "metachan/channel.hpp"

namespace metachan {

// X = (m0 - m1) / (2m) = 1/2 - f1 over binary outcomes.
double polarization(std::span<const std::uint8_t> outcomes);

// Asymptotic frequency of probe outcome 1 for a (meta)stable state.
double fixed_point_frequency(const QuantumChannel& probe_channel, const ComplexMatrix& rho_fix);

// Mean photons per RIM: sum_alpha n_alpha p(alpha | rho).
double expected_photon_rate(const QuantumChannel& probe_channel, const WeakReadout& ro, const ComplexMatrix& rho);

struct PLTrace {
  std::vector<std::int64_t> counts;  // summed photons per window
  long long window = 1;              // RIMs per bin
  double rim_time = 0.0;             // seconds per RIM
};

// Sums consecutive windows of outcomes; a trailing partial window is dropped.
PLTrace bin_trace(std::span<const std::uint8_t> outcomes, long long window, double rim_time = 0.0);

struct Histogram {
  std::vector<std::int64_t> values;  // distinct counts, ascending
  std::vector<double> weights;       // occurrences
  double total() const;
};

Histogram make_histogram(std::span<const std::int64_t> samples);

struct PoissonComponent {
  double weight = 0.0;
  double mean = 0.0;
};

struct PoissonMixture {
  std::vector<PoissonComponent> components;  // sorted by mean
  double log_pmf(std::int64_t x) const;
};

struct MixtureFit {
  PoissonMixture best;
  int k = 0;
  std::vector<PoissonMixture> fits;  // index k - 1
  std::vector<double> log_likelihood;
  std::vector<double> bic;
  std::vector<int> iterations;
  std::vector<bool> converged;
};

struct MixtureOptions {
  int max_iter = 500;
  double tol = 1e-10;  // relative log-likelihood improvement
};

// EM fits for k = 1..k_max with quantile-spaced initial means; k chosen by
// BIC = -2 LL + (2k - 1) ln N.
MixtureFit fit_mixture(const Histogram& hist, int k_max, const MixtureOptions& opt = {});

struct ThresholdFidelity {
  std::int64_t threshold = 0;
  double F = 0.0;
  double F_dark = 0.0;    // P(count <= threshold | dark)
  double F_bright = 0.0;  // P(count > threshold | bright)
};

// Dark is the lowest-mean component; the remaining components form the
// bright class with their relative weights.
ThresholdFidelity threshold_fidelity(const PoissonMixture& mix, std::int64_t threshold);
ThresholdFidelity optimal_threshold(const PoissonMixture& mix);

// P(X <= k) for X ~ Poisson(mu).
double poisson_cdf(std::int64_t k, double mu);
double poisson_log_pmf(std::int64_t k, double mu);

}  // namespace metachan
