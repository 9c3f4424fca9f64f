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

#include "metachan/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace metachan {

void PureDephasingModel::validate() const {
  if (B.rows() != B.cols() || C.rows() != C.cols() || B.rows() != C.rows() || B.rows() == 0) {
    throw DimensionError("dephasing model: B and C must be square with equal dimension");
  }
  if (hermiticity_error(B) > 1e-10 || hermiticity_error(C) > 1e-10) {
    throw NumericalError("dephasing model: B and C must be Hermitian");
  }
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error("dephasing model: tau must be finite and >= 0");
  if (!std::isfinite(delta_phi)) throw Error("dephasing model: delta_phi must be finite");
}

QuantumChannel::QuantumChannel(std::vector<ComplexMatrix> ops, Eigen::MatrixXd weights)
    : ops_(std::move(ops)), w_(std::move(weights)) {
  if (ops_.empty()) throw DimensionError("channel needs at least one operator");
  d_ = static_cast<int>(ops_.front().rows());
  for (const auto& m : ops_) {
    if (m.rows() != d_ || m.cols() != d_) throw DimensionError("channel operators must share a square shape");
  }
  if (w_.cols() != static_cast<Eigen::Index>(ops_.size()) || w_.rows() == 0) {
    throw DimensionError("channel weight matrix must have one column per operator");
  }
  if ((w_.array() < 0.0).any() || !w_.allFinite()) throw NumericalError("channel weights must be finite and >= 0");
}

QuantumChannel QuantumChannel::from_kraus(std::vector<ComplexMatrix> kraus) {
  const auto n = static_cast<Eigen::Index>(kraus.size());
  return QuantumChannel(std::move(kraus), Eigen::MatrixXd::Identity(n, n));
}

bool QuantumChannel::is_plain_kraus() const {
  return w_.rows() == w_.cols() && w_.isIdentity(0.0);
}

ComplexMatrix QuantumChannel::apply_outcome(int n, const ComplexMatrix& rho) const {
  if (n < 0 || n >= num_outcomes()) throw Error("outcome label out of range");
  ComplexMatrix out = ComplexMatrix::Zero(d_, d_);
  for (size_t k = 0; k < ops_.size(); ++k) {
    const double w = w_(n, static_cast<Eigen::Index>(k));
    if (w != 0.0) out.noalias() += w * (ops_[k] * rho * ops_[k].adjoint());
  }
  return out;
}

ComplexMatrix QuantumChannel::apply(const ComplexMatrix& rho) const {
  const Eigen::VectorXd colsum = w_.colwise().sum();
  ComplexMatrix out = ComplexMatrix::Zero(d_, d_);
  for (size_t k = 0; k < ops_.size(); ++k) out.noalias() += colsum(static_cast<Eigen::Index>(k)) * (ops_[k] * rho * ops_[k].adjoint());
  return out;
}

double QuantumChannel::cptp_error() const {
  const Eigen::VectorXd colsum = w_.colwise().sum();
  ComplexMatrix s = -ComplexMatrix::Identity(d_, d_);
  for (size_t k = 0; k < ops_.size(); ++k) s.noalias() += colsum(static_cast<Eigen::Index>(k)) * (ops_[k].adjoint() * ops_[k]);
  return max_abs(s);
}

Superoperator QuantumChannel::outcome_superoperator(int n) const {
  if (n < 0 || n >= num_outcomes()) throw Error("outcome label out of range");
  ComplexMatrix s = ComplexMatrix::Zero(d_ * d_, d_ * d_);
  for (size_t k = 0; k < ops_.size(); ++k) {
    const double w = w_(n, static_cast<Eigen::Index>(k));
    if (w != 0.0) s += w * kron(ops_[k], ops_[k].conjugate());
  }
  return Superoperator(std::move(s));
}

void WeakReadout::validate() const {
  if (!(n0 >= 0.0) || !(n1 >= 0.0) || !std::isfinite(n0) || !std::isfinite(n1)) {
    throw Error("readout: photon rates must be finite and >= 0");
  }
  if (max_photons < 1) throw Error("readout: max_photons must be >= 1");
  if (truncation == PhotonTruncation::Binary && (n0 > 1.0 || n1 > 1.0)) {
    throw Error("readout: binary truncation requires rates <= 1");
  }
}

std::vector<double> WeakReadout::photon_distribution(int alpha) const {
  const double mu = alpha == 0 ? n0 : n1;
  if (truncation == PhotonTruncation::Binary) return {1.0 - mu, mu};
  std::vector<double> p(static_cast<size_t>(max_photons) + 1);
  double term = std::exp(-mu);
  double acc = 0.0;
  for (int n = 0; n < max_photons; ++n) {
    p[n] = term;
    acc += term;
    term *= mu / (n + 1);
  }
  p[max_photons] = std::max(0.0, 1.0 - acc);
  return p;
}

QuantumChannel rim_kraus(const PureDephasingModel& model) {
  model.validate();
  const ComplexMatrix u0 = hermitian_exp(model.B + model.C, model.tau);
  const ComplexMatrix u1 = hermitian_exp(-model.B + model.C, model.tau);
  const cplx e = std::polar(1.0, model.delta_phi);
  std::vector<ComplexMatrix> kraus{0.5 * (u0 - e * u1), 0.5 * (u0 + e * u1)};
  QuantumChannel ch = QuantumChannel::from_kraus(std::move(kraus));
  const double err = ch.cptp_error();
  if (err > kCptpTolerance) {
    std::ostringstream os;
    os << "rim_kraus: completeness violated by " << err;
    throw NumericalError(os.str());
  }
  return ch;
}

Superoperator natural_representation(const QuantumChannel& ch) {
  const int d = ch.dim();
  const Eigen::VectorXd colsum = ch.weights().colwise().sum();
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  for (int k = 0; k < ch.num_operators(); ++k) {
    const auto& m = ch.operators()[k];
    s += colsum(k) * kron(m, m.conjugate());
  }
  return Superoperator(std::move(s));
}

ComplexMatrix apply_channel(const QuantumChannel& ch, const ComplexMatrix& rho, long long m) {
  validate_state(rho);
  if (rho.rows() != ch.dim()) throw DimensionError("apply_channel: state dimension mismatch");
  if (m < 0) throw Error("apply_channel: negative repetition count");
  if (m == 0) return rho;
  return natural_representation(ch).pow(m).apply(rho);
}

double measurement_probability(const QuantumChannel& ch, const ComplexMatrix& rho, int outcome) {
  return std::clamp(ch.apply_outcome(outcome, rho).trace().real(), 0.0, 1.0);
}

QuantumChannel weak_kraus(const QuantumChannel& ch, const WeakReadout& ro) {
  ro.validate();
  if (ch.num_operators() != 2 || !ch.is_plain_kraus()) {
    throw Error("weak_kraus: needs a plain two-outcome probe channel");
  }
  const int n = ro.alphabet_size();
  Eigen::MatrixXd w(n, 2);
  for (int alpha = 0; alpha < 2; ++alpha) {
    const auto p = ro.photon_distribution(alpha);
    for (int k = 0; k < n; ++k) w(k, alpha) = p[k];
  }
  return QuantumChannel(ch.operators(), std::move(w));
}

}  // namespace metachan
