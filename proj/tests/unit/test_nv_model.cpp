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

#include "doctest.h"
#include "metachan/nv_model.hpp"
#include "metachan/spectral.hpp"
#include "test_util.hpp"

using namespace metachan;
using namespace metachan::nv;

TEST_CASE("spin-1 operators") {
  const auto op = spin1_operators();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(op.Iz);
  CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0));
  CHECK(es.eigenvalues()(1) == doctest::Approx(0.0));
  CHECK(es.eigenvalues()(2) == doctest::Approx(1.0));
  CHECK(std::abs(op.Iz(0, 0) - 1.0) == 0.0);
  CHECK(std::abs(op.Iz(2, 2) + 1.0) == 0.0);

  const ComplexMatrix casimir = op.Ix * op.Ix + op.Iy * op.Iy + op.Iz * op.Iz;
  CHECK(max_abs(casimir - 2.0 * ComplexMatrix::Identity(3, 3)) <= 1e-12);

  const cplx i(0.0, 1.0);
  CHECK(max_abs(commutator(op.Ix, op.Iy) - i * op.Iz) <= 1e-12);
  CHECK(max_abs(commutator(op.Iy, op.Iz) - i * op.Ix) <= 1e-12);
  CHECK(max_abs(commutator(op.Iz, op.Ix) - i * op.Iy) <= 1e-12);
}

TEST_CASE("perturbation term") {
  NVParams p;
  p.theta = 0.0;
  CHECK(max_abs(perturbation_term(p, 0)) == 0.0);
  CHECK(max_abs(perturbation_term(p, -1)) == 0.0);

  p.theta = 8.8;
  const ComplexMatrix h0 = perturbation_term(p, 0), h1 = perturbation_term(p, -1);
  CHECK(hermiticity_error(h0) <= 1e-12);
  // alpha = 0 prefactor gamma_e / D, alpha = -1 prefactor -gamma_e / (2D).
  CHECK(max_abs(h1 + 0.5 * h0) <= 1e-14);

  const double b_perp = p.B_mag * std::sin(8.8 * std::acos(-1.0) / 180.0);
  const double scalar = p.gamma_e * p.gamma_e * b_perp * b_perp / p.D;
  CHECK(std::abs(h0(1, 1)) == doctest::Approx(scalar).epsilon(1e-12));
  CHECK(scalar == doctest::Approx(0.752).epsilon(0.005));

  // Halving the transverse field quarters the scalar part; the spin part
  // falls linearly because it contains one power of B_perp times A_perp.
  NVParams half = p;
  half.B_mag = p.B_mag / 2.0;
  const ComplexMatrix hh = perturbation_term(half, 0);
  CHECK(std::abs(hh(1, 1) / h0(1, 1) - 0.25) <= 1e-10);
}

TEST_CASE("conditional Hamiltonians") {
  NVParams p;
  p.theta = 0.0;
  const auto h = conditional_hamiltonians(p);
  CHECK(hermiticity_error(h.H0) <= 1e-12);
  CHECK(hermiticity_error(h.H1) <= 1e-12);
  CHECK(max_abs(h.H0 - ComplexMatrix(h.H0.diagonal().asDiagonal())) == 0.0);
  // |0> <-> |+1> gap: |Q + s gamma_n B_z| in MHz.
  const double gap = rad_per_us_to_mhz(std::abs(h.H0(0, 0) - h.H0(1, 1)));
  CHECK(gap == doctest::Approx(std::abs(p.Q + p.gamma_n * p.B_mag)).epsilon(1e-12));
  CHECK(std::abs(gap - 4.973) / 4.973 <= 0.02);

  NVParams nohf = p;
  nohf.A_zz = 0.0;
  const auto hn = conditional_hamiltonians(nohf);
  CHECK(max_abs(hn.H0 - hn.H1) <= 1e-12);

  CHECK(mhz_to_rad_per_us(rad_per_us_to_mhz(1.2345)) == doctest::Approx(1.2345).epsilon(1e-15));

  NVParams flipped = p;
  flipped.gamma_n_sign = -1;
  const auto hf = conditional_hamiltonians(flipped);
  CHECK(rad_per_us_to_mhz(std::abs(hf.H0(0, 0) - hf.H0(1, 1))) ==
        doctest::Approx(std::abs(p.Q - p.gamma_n * p.B_mag)).epsilon(1e-12));
}

TEST_CASE("dephasing model reduction") {
  SplitMix64 rng(1);
  const ComplexMatrix h = testing::random_hermitian(3, rng);
  const auto m = to_dephasing_model({h, h}, 0.3, 0.2);
  CHECK(max_abs(m.B) == 0.0);
  CHECK(max_abs(m.C - h) == 0.0);

  NVParams p;
  p.theta = 0.0;
  const auto flat = make_model(p);
  CHECK(max_abs(commutator(flat.B, flat.C)) <= 1e-10);

  p.theta = 8.8;
  const auto tilted = make_model(p);
  CHECK(max_abs(commutator(tilted.B, tilted.C)) > 1e-6);
  const ComplexMatrix c_off = tilted.C - ComplexMatrix(tilted.C.diagonal().asDiagonal());
  CHECK(c_off.norm() / tilted.B.norm() < 0.1);

  const auto hc = conditional_hamiltonians(p);
  CHECK(max_abs(tilted.B + tilted.C - hc.H0) <= 1e-12);
  CHECK(max_abs(tilted.C - tilted.B - hc.H1) <= 1e-12);
  CHECK(max_abs(hermitian_exp(tilted.B + tilted.C, p.tau) - hermitian_exp(hc.H0, p.tau)) <= 1e-12);
}

TEST_CASE("fixed-point count follows the field tilt") {
  NVParams p;
  p.theta = 0.0;
  CHECK(decompose(rim_kraus(make_model(p))).num_fixed == 3);
  for (double th : {3.5, 8.8, 15.0}) {
    p.theta = th;
    const auto spec = decompose(rim_kraus(make_model(p)));
    CHECK(spec.num_fixed == 1);
    CHECK(trace_distance(stationary_states(spec).front(), ComplexMatrix::Identity(3, 3) / 3.0) <= 1e-6);
  }
}

TEST_CASE("parameter validation") {
  NVParams p;
  p.theta = 95.0;
  CHECK_THROWS(p.validate());
  p = NVParams{};
  p.probe_levels = {0, 0};
  CHECK_THROWS(p.validate());
  p = NVParams{};
  p.gamma_n_sign = 2;
  CHECK_THROWS(p.validate());
}
