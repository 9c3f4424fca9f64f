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

#include <array>

#include "metachan/channel.hpp"

namespace metachan::nv {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// NV electron spin probe coupled to the 14N nuclear spin (I = 1).
// Frequencies in MHz, field in gauss, angles in degrees, tau in us.
struct NVParams {
  double D = 2870.0;
  double A_zz = -2.16;
  double A_perp = -2.63;
  double Q = -4.95;
  double gamma_e = 2.8025;
  double gamma_n = 3.077e-4;
  double B_mag = 108.4;
  double theta = 8.8;
  double phi_azimuth = 0.0;
  double tau = 0.374;
  double delta_phi = 1.5707963267948966;
  std::array<int, 2> probe_levels{0, -1};
  // Sign s of the nuclear Zeeman term s * gamma_n * B . I.
  int gamma_n_sign = +1;

  void validate() const;
  std::array<double, 3> field() const;  // (Bx, By, Bz) in gauss
};

struct ConditionalHamiltonians {
  ComplexMatrix H0;  // nuclear Hamiltonian for probe level probe_levels[0], rad/us
  ComplexMatrix H1;  // for probe_levels[1], rad/us
};

struct Spin1Operators {
  ComplexMatrix Ix, Iy, Iz;
};

// Basis ordering {|+1>, |0>, |-1>}.
Spin1Operators spin1_operators();

// Closed-form second-order correction in MHz for electron level alpha.
ComplexMatrix perturbation_term(const NVParams& p, int alpha);

// Full nuclear Hamiltonian in MHz for electron level alpha.
ComplexMatrix nuclear_hamiltonian_mhz(const NVParams& p, int alpha);

ConditionalHamiltonians conditional_hamiltonians(const NVParams& p);

// B = (H0 - H1) / 2, C = (H0 + H1) / 2.
PureDephasingModel to_dephasing_model(const ConditionalHamiltonians& h, double tau, double delta_phi);

PureDephasingModel make_model(const NVParams& p);

inline double mhz_to_rad_per_us(double f) { return kTwoPi * f; }
inline double rad_per_us_to_mhz(double w) { return w / kTwoPi; }

ComplexMatrix dark_state();    // |+1><+1|
ComplexMatrix bright_state();  // (|0><0| + |-1><-1|) / 2
ComplexMatrix projector(int m);  // |m><m| for m in {+1, 0, -1}

}  // namespace metachan::nv
