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

#include "metachan/nv_model.hpp"

#include <cmath>
#include <cstdlib>

namespace metachan::nv {

namespace {
constexpr double kDeg = 3.14159265358979323846 / 180.0;

int level_index(int m) {
  if (m < -1 || m > 1) throw Error("spin-1 level must be -1, 0 or +1");
  return 1 - m;
}
}  // namespace

void NVParams::validate() const {
  if (!(D > 0.0)) throw Error("NV parameters: D must be > 0");
  if (!(B_mag >= 0.0)) throw Error("NV parameters: B_mag must be >= 0");
  if (!(theta >= 0.0 && theta < 90.0)) throw Error("NV parameters: theta must lie in [0, 90)");
  if (!(tau >= 0.0)) throw Error("NV parameters: tau must be >= 0");
  if (gamma_n_sign != 1 && gamma_n_sign != -1) throw Error("NV parameters: gamma_n_sign must be +1 or -1");
  for (int lvl : probe_levels) level_index(lvl);
  if (probe_levels[0] == probe_levels[1]) throw Error("NV parameters: probe levels must differ");
  for (double v : {D, A_zz, A_perp, Q, gamma_e, gamma_n, B_mag, theta, phi_azimuth, tau, delta_phi}) {
    if (!std::isfinite(v)) throw Error("NV parameters: all values must be finite");
  }
}

std::array<double, 3> NVParams::field() const {
  const double th = theta * kDeg, ph = phi_azimuth * kDeg;
  return {B_mag * std::sin(th) * std::cos(ph), B_mag * std::sin(th) * std::sin(ph), B_mag * std::cos(th)};
}

Spin1Operators spin1_operators() {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  Spin1Operators op;
  op.Ix = ComplexMatrix::Zero(3, 3);
  op.Iy = ComplexMatrix::Zero(3, 3);
  op.Iz = ComplexMatrix::Zero(3, 3);
  op.Ix(0, 1) = op.Ix(1, 0) = op.Ix(1, 2) = op.Ix(2, 1) = s;
  op.Iy(0, 1) = -i * s;
  op.Iy(1, 0) = i * s;
  op.Iy(1, 2) = -i * s;
  op.Iy(2, 1) = i * s;
  op.Iz(0, 0) = 1.0;
  op.Iz(2, 2) = -1.0;
  return op;
}

ComplexMatrix perturbation_term(const NVParams& p, int alpha) {
  level_index(alpha);
  const auto [bx, by, bz] = p.field();
  (void)bz;
  const auto op = spin1_operators();
  const double pref = p.gamma_e * (2.0 - 3.0 * std::abs(alpha)) / (2.0 * p.D);
  const ComplexMatrix inner = -p.gamma_e * (bx * bx + by * by) * ComplexMatrix::Identity(3, 3) +
                              2.0 * p.A_perp * (bx * op.Ix + by * op.Iy);
  return pref * inner;
}

ComplexMatrix nuclear_hamiltonian_mhz(const NVParams& p, int alpha) {
  const auto [bx, by, bz] = p.field();
  const auto op = spin1_operators();
  const ComplexMatrix zeeman = bx * op.Ix + by * op.Iy + bz * op.Iz;
  return static_cast<double>(alpha) * p.A_zz * op.Iz + p.Q * op.Iz * op.Iz +
         static_cast<double>(p.gamma_n_sign) * p.gamma_n * zeeman + perturbation_term(p, alpha);
}

ConditionalHamiltonians conditional_hamiltonians(const NVParams& p) {
  p.validate();
  ConditionalHamiltonians h;
  h.H0 = kTwoPi * nuclear_hamiltonian_mhz(p, p.probe_levels[0]);
  h.H1 = kTwoPi * nuclear_hamiltonian_mhz(p, p.probe_levels[1]);
  h.H0 = hermitize(h.H0);
  h.H1 = hermitize(h.H1);
  return h;
}

PureDephasingModel to_dephasing_model(const ConditionalHamiltonians& h, double tau, double delta_phi) {
  PureDephasingModel m;
  m.B = 0.5 * (h.H0 - h.H1);
  m.C = 0.5 * (h.H0 + h.H1);
  m.tau = tau;
  m.delta_phi = delta_phi;
  m.validate();
  return m;
}

PureDephasingModel make_model(const NVParams& p) {
  return to_dephasing_model(conditional_hamiltonians(p), p.tau, p.delta_phi);
}

ComplexMatrix projector(int m) {
  ComplexMatrix pr = ComplexMatrix::Zero(3, 3);
  pr(level_index(m), level_index(m)) = 1.0;
  return pr;
}

ComplexMatrix dark_state() { return projector(+1); }

ComplexMatrix bright_state() { return 0.5 * (projector(0) + projector(-1)); }

}  // namespace metachan::nv
