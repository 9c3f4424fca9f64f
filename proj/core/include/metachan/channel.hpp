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

#include <vector>

#include "metachan/linalg.hpp"

namespace metachan {

// Generic pure-dephasing coupling sigma_z (x) B + I (x) C between a probe qubit
// and a bath; Hamiltonians in rad/us, tau in us.
struct PureDephasingModel {
  ComplexMatrix B;
  ComplexMatrix C;
  double tau = 0.0;
  double delta_phi = 0.0;

  int dim() const { return static_cast<int>(B.rows()); }
  void validate() const;
};

// A quantum instrument built from operators M_k and a non-negative weight
// matrix w (outcomes x operators):
//   W_n(rho) = sum_k w(n, k) M_k rho M_k^dagger.
// A plain Kraus channel is the special case w = identity.
class QuantumChannel {
 public:
  QuantumChannel() = default;
  QuantumChannel(std::vector<ComplexMatrix> ops, Eigen::MatrixXd weights);
  static QuantumChannel from_kraus(std::vector<ComplexMatrix> kraus);

  int dim() const { return d_; }
  int num_outcomes() const { return static_cast<int>(w_.rows()); }
  int num_operators() const { return static_cast<int>(ops_.size()); }
  const std::vector<ComplexMatrix>& operators() const { return ops_; }
  const Eigen::MatrixXd& weights() const { return w_; }
  bool is_plain_kraus() const;

  // Unnormalized post-measurement state for outcome n.
  ComplexMatrix apply_outcome(int n, const ComplexMatrix& rho) const;
  // Full (outcome-averaged) channel.
  ComplexMatrix apply(const ComplexMatrix& rho) const;
  // Max entry of sum_n sum_k w(n,k) M_k^dagger M_k - I.
  double cptp_error() const;

  Superoperator outcome_superoperator(int n) const;

 private:
  std::vector<ComplexMatrix> ops_;
  Eigen::MatrixXd w_;
  int d_ = 0;
};

enum class PhotonTruncation {
  FoldTail,  // Poisson over 0..max_photons with the tail mass folded into the last bin
  Binary,    // two-outcome linearization: p(1|a) = n_a, p(0|a) = 1 - n_a
};

struct WeakReadout {
  double n0 = 0.065;
  double n1 = 0.049;
  int max_photons = 5;
  PhotonTruncation truncation = PhotonTruncation::FoldTail;

  void validate() const;
  // p(n | probe outcome alpha) over the readout alphabet.
  std::vector<double> photon_distribution(int alpha) const;
  int alphabet_size() const { return truncation == PhotonTruncation::Binary ? 2 : max_photons + 1; }
};

inline constexpr double kCptpTolerance = 1e-10;

QuantumChannel rim_kraus(const PureDephasingModel& model);

Superoperator natural_representation(const QuantumChannel& ch);

// Phi^m(rho) by repeated squaring of the natural representation.
ComplexMatrix apply_channel(const QuantumChannel& ch, const ComplexMatrix& rho, long long m);

double measurement_probability(const QuantumChannel& ch, const ComplexMatrix& rho, int outcome);

// Photon-count instrument W_n from a two-outcome probe channel.
QuantumChannel weak_kraus(const QuantumChannel& ch, const WeakReadout& ro);

}  // namespace metachan
