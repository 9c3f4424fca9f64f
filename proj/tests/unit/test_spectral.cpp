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
using namespace metachan::testing;

namespace {


QuantumChannel unitary_channel(double theta) {
  return QuantumChannel::from_kraus({hermitian_exp(pauli_z(), theta)});
}

QuantumChannel nv_channel(double theta = 8.8) {
  nv::NVParams p;
  p.theta = theta;
  return rim_kraus(nv::make_model(p));
}

}  // namespace

TEST_CASE("commuting qubit model has projector fixed points") {
  const auto ch = rim_kraus({1.1 * pauli_z(), 0.4 * pauli_z(), 0.6, 0.3});
  const auto spec = decompose(ch);
  CHECK(spec.num_fixed == 2);
  const auto states = stationary_states(spec);
  REQUIRE(states.size() == 2);
  CHECK(trace_distance(states[0], basis_projector(2, 0)) < 1e-10);
  CHECK(trace_distance(states[1], basis_projector(2, 1)) < 1e-10);
}

TEST_CASE("commuting three-level model") {
  PureDephasingModel m;
  m.B = ComplexMatrix::Zero(3, 3);
  m.C = ComplexMatrix::Zero(3, 3);
  m.B.diagonal() << 0.9, -0.2, 1.7;
  m.C.diagonal() << 0.1, 0.5, -0.3;
  m.tau = 0.7;
  m.delta_phi = 1.0;
  const auto spec = decompose(rim_kraus(m));
  CHECK(spec.num_fixed == 3);
  const auto states = stationary_states(spec);
  REQUIRE(states.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(trace_distance(states[k], basis_projector(3, k)) < 1e-9);
}

TEST_CASE("unitary channel has rotating points") {
  const auto spec = decompose(unitary_channel(0.3));
  CHECK(spec.num_fixed == 2);
  CHECK(spec.num_rotating == 2);
  CHECK(std::abs(spec.points[0].value - std::polar(1.0, 0.6)) < 1e-9);
  CHECK(std::abs(spec.points[3].value - std::polar(1.0, -0.6)) < 1e-9);
}

TEST_CASE("NV spectrum structure") {
  const auto ch = nv_channel();
  const auto spec = decompose(ch);
  CHECK(spec.num_fixed == 1);
  CHECK(spec.num_metastable == 2);
  CHECK(spec.num_decaying == 6);
  CHECK(spec.q == 3);
  for (const auto& p : spec.points) {
    CHECK(std::abs(p.value) <= 1.0 + 1e-9);
    if (p.cls == PointClass::Metastable || p.cls == PointClass::Decaying) CHECK(std::abs(p.right.trace()) <= 1e-8);
  }
  const auto states = stationary_states(spec);
  REQUIRE(states.size() == 1);
  const ComplexMatrix mixed = ComplexMatrix::Identity(3, 3) / 3.0;
  CHECK(trace_distance(states[0], mixed) <= 1e-6);
  CHECK(max_abs(ch.apply(states[0]) - states[0]) <= 1e-9);

  // Trace functional is a left fixed point.
  const HSVector id = vectorize(ComplexMatrix::Identity(3, 3));
  CHECK(max_abs(natural_representation(ch).matrix().adjoint() * id - id) <= 1e-9);
}

TEST_CASE("classification is stable under tiny perturbations") {
  nv::NVParams p;
  const auto a = decompose(rim_kraus(nv::make_model(p)));
  p.tau *= 1.0 + 1e-10;
  const auto b = decompose(rim_kraus(nv::make_model(p)));
  REQUIRE(a.points.size() == b.points.size());
  for (size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].cls == b.points[i].cls);
}

TEST_CASE("commuting NV model has three fixed points") {
  const auto spec = decompose(nv_channel(0.0));
  CHECK(spec.num_fixed == 3);
}

TEST_CASE("metastable window arithmetic") {
  ChannelSpectrum s;
  for (double v : {1.0, 0.99999, 0.99}) {
    SpectralPoint p;
    p.value = v;
    p.right = ComplexMatrix::Identity(1, 1);
    p.left = ComplexMatrix::Identity(1, 1);
    s.points.push_back(p);
  }
  s.points[0].cls = PointClass::Fixed;
  s.points[1].cls = PointClass::Metastable;
  s.points[2].cls = PointClass::Decaying;
  s.num_fixed = 1;
  s.num_metastable = 1;
  s.num_decaying = 1;
  s.q = 2;
  const auto w = metastable_window(s);
  CHECK(w.m_hi == doctest::Approx(99999.5).epsilon(1e-6));
  CHECK(w.m_lo == doctest::Approx(99.5).epsilon(1e-3));
  CHECK(w.m_hi_approx == doctest::Approx(1e5).epsilon(1e-9));

  for (double x : {0.9999, 0.99995, 0.999999}) {
    const double exact = 1.0 / std::abs(std::log(x)), approx = 1.0 / (1.0 - x);
    CHECK(std::abs(exact - approx) / approx <= 1e-4);
  }

  s.points[1].cls = PointClass::Decaying;
  s.num_metastable = 0;
  CHECK_THROWS(metastable_window(s));
}

TEST_CASE("NV windows") {
  const auto spec = decompose(nv_channel());
  const auto full = metastable_window(spec);
  const auto one_d = metastable_window(spec, 2);
  CHECK(full.q == 3);
  CHECK(full.m_lo < full.m_hi);
  CHECK(one_d.m_lo == doctest::Approx(full.m_hi));
  CHECK(one_d.m_hi > one_d.m_lo);
}

TEST_CASE("EMS of a weakly perturbed commuting qubit") {
  ComplexMatrix c = 0.02 * pauli_x();
  const auto ch = rim_kraus({1.0 * pauli_z(), c, 0.6, 0.5});
  const auto spec = decompose(ch);
  REQUIRE(spec.num_fixed == 1);
  REQUIRE(spec.num_metastable == 1);
  const auto [up, lo] = ems_1d(spec);
  for (const auto* e : {&up, &lo}) {
    CHECK(std::abs(e->matrix.trace() - 1.0) <= 1e-8);
    CHECK(hermiticity_error(e->matrix) <= 1e-12);
  }
  const double d00 = std::min(trace_distance(up.matrix, basis_projector(2, 0)), trace_distance(lo.matrix, basis_projector(2, 0)));
  const double d11 = std::min(trace_distance(up.matrix, basis_projector(2, 1)), trace_distance(lo.matrix, basis_projector(2, 1)));
  CHECK(d00 <= 0.02);
  CHECK(d11 <= 0.02);
}

TEST_CASE("NV EMS construction invariants") {
  const auto spec = decompose(nv_channel());
  const auto [up, lo] = ems_1d(spec);
  const ComplexMatrix fix = stationary_states(spec).front();
  for (const auto* e : {&up, &lo}) {
    CHECK(std::abs(e->matrix.trace() - 1.0) <= 1e-8);
    CHECK(std::abs((e->matrix - fix).trace()) <= 1e-8);
    CHECK(hermiticity_error(e->matrix) <= 1e-12);
  }
  CHECK(trace_distance(up.matrix, lo.matrix) > 0.5);
}

TEST_CASE("NV EMS are the dark state and the bright mixture") {
  // Known to miss at these parameters (see README, "Known deviations").
  const auto spec = decompose(nv_channel());
  const auto [up, lo] = ems_1d(spec);
  const ComplexMatrix dark = nv::dark_state(), bright = nv::bright_state();
  const bool up_is_dark = trace_distance(up.matrix, dark) < trace_distance(lo.matrix, dark);
  CHECK(trace_distance(up_is_dark ? up.matrix : lo.matrix, dark) <= 0.05);
  CHECK(trace_distance(up_is_dark ? lo.matrix : up.matrix, bright) <= 0.05);
}

TEST_CASE("MM coordinates") {
  const auto spec = decompose(nv_channel());
  const auto [up, lo] = ems_1d(spec);
  const std::vector<ExtremeMetastableState> ems{up, lo};

  const auto self = mm_coordinates(spec, ems, up.matrix);
  CHECK(self.weights[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(self.weights[1]) <= 1e-6);

  SplitMix64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = mm_coordinates(spec, ems, random_state(3, rng));
    CHECK(std::abs(c.weights[0] + c.weights[1] - 1.0) <= 1e-8);
  }
}

TEST_CASE("MM coordinates of the maximally mixed state") {
  // Expected 1/3 dark and 2/3 bright; the EMS mismatch of this Hamiltonian
  // shifts the split (see README, "Known deviations").
  const auto spec = decompose(nv_channel());
  const auto [up, lo] = ems_1d(spec);
  const bool up_is_dark = std::real(up.matrix(0, 0)) > std::real(lo.matrix(0, 0));
  const auto c = mm_coordinates(spec, {up, lo}, ComplexMatrix::Identity(3, 3) / 3.0);
  const double dark = up_is_dark ? c.weights[0] : c.weights[1];
  CHECK(std::abs(dark - 1.0 / 3.0) <= 0.05);
}
