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
#include "metachan/linalg.hpp"
#include "test_util.hpp"

using namespace metachan;
using namespace metachan::testing;

namespace {

ComplexMatrix taylor_exp(const ComplexMatrix& a) {
  int s = 0;
  double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (nrm > 0.5) {
    nrm /= 2.0;
    ++s;
  }
  const ComplexMatrix x = a / std::pow(2.0, s);
  ComplexMatrix term = ComplexMatrix::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = (term * x / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
  return sum;
}

}  // namespace

TEST_CASE("vectorize is row-major") {
  HSVector v = vectorize(ComplexMatrix::Identity(2, 2));
  CHECK(v.size() == 4);
  CHECK(v(0) == cplx(1.0));
  CHECK(v(1) == cplx(0.0));
  CHECK(v(2) == cplx(0.0));
  CHECK(v(3) == cplx(1.0));

  ComplexMatrix e01 = ComplexMatrix::Zero(2, 2);
  e01(0, 1) = 1.0;
  v = vectorize(e01);
  CHECK(v(1) == cplx(1.0));
  CHECK(v.cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("vectorize round trip is exact") {
  SplitMix64 rng(11);
  for (int d = 1; d <= 4; ++d) {
    const ComplexMatrix x = random_matrix(d, rng);
    CHECK((devectorize(vectorize(x)).array() == x.array()).all());
  }
  CHECK_THROWS_AS(devectorize(HSVector::Zero(5)), DimensionError);
  CHECK_THROWS_AS(vectorize(ComplexMatrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("sandwich superoperator") {
  CHECK(max_abs(sandwich_superoperator(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)).matrix() -
                ComplexMatrix::Identity(4, 4)) == 0.0);

  const ComplexMatrix flipped = sandwich_superoperator(pauli_x(), pauli_x()).apply(basis_projector(2, 0));
  CHECK(max_abs(flipped - basis_projector(2, 1)) < 1e-15);

  SplitMix64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 3;
    const ComplexMatrix a = random_matrix(d, rng), b = random_matrix(d, rng), rho = random_matrix(d, rng);
    const HSVector lhs = sandwich_superoperator(a, b).apply(vectorize(rho));
    CHECK(max_abs(lhs - vectorize(a * rho * b)) <= 1e-13);
  }
  CHECK_THROWS_AS(sandwich_superoperator(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)),
                  DimensionError);
}

TEST_CASE("hermitian_exp") {
  CHECK(max_abs(hermitian_exp(ComplexMatrix::Zero(3, 3), 2.5) - ComplexMatrix::Identity(3, 3)) < 1e-15);

  const double pi = std::acos(-1.0);
  const ComplexMatrix u = hermitian_exp(pi * pauli_z(), 1.0);
  CHECK(max_abs(u + ComplexMatrix::Identity(2, 2)) < 1e-14);

  SplitMix64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix h = random_hermitian(3, rng);
    const double t = 0.1 + rng.uniform() * 3.0;
    const ComplexMatrix e = hermitian_exp(h, t);
    const cplx mi(0.0, -1.0);
    CHECK(max_abs(e - taylor_exp(mi * t * h)) <= 1e-10);
    CHECK(max_abs(e.adjoint() * e - ComplexMatrix::Identity(3, 3)) <= 1e-11);
    const ComplexMatrix ep = hermitian_exp(h, t, ExpSign::Plus);
    CHECK(max_abs(ep * e - ComplexMatrix::Identity(3, 3)) <= 1e-11);
    const double t2 = rng.uniform();
    CHECK(max_abs(hermitian_exp(h, t + t2) - hermitian_exp(h, t) * hermitian_exp(h, t2)) <= 1e-10);
  }

  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_exp(bad, 1.0), NumericalError);
}

TEST_CASE("fidelity closed forms") {
  const ComplexMatrix p0 = basis_projector(2, 0), p1 = basis_projector(2, 1);
  CHECK(fidelity(p0, p0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(p0, p1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fidelity(p0, ComplexMatrix::Identity(2, 2) / 2.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  SplitMix64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 3;
    const ComplexMatrix a = random_state(d, rng), b = random_state(d, rng);
    const double fab = fidelity(a, b), fba = fidelity(b, a);
    CHECK(std::abs(fab - fba) <= 1e-9);
    CHECK(fab >= 0.0);
    CHECK(fab <= 1.0 + 1e-9);
    CHECK(std::abs(fidelity(a, a) - 1.0) <= 1e-9);
  }

  CHECK_THROWS_AS(fidelity(2.0 * p0, p0), InvalidStateError);
  ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(fidelity(neg, p0), InvalidStateError);
}

TEST_CASE("trace distance") {
  const ComplexMatrix p0 = basis_projector(2, 0), p1 = basis_projector(2, 1);
  CHECK(trace_distance(p0, p1) == doctest::Approx(1.0));
  CHECK(trace_distance(p0, ComplexMatrix::Identity(2, 2) / 2.0) == doctest::Approx(0.5));
}

TEST_CASE("general_eig on a diagonal matrix") {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  a(0, 0) = 0.1;
  a(1, 1) = 1.0;
  a(2, 2) = 0.5;
  const auto eig = general_eig(a);
  REQUIRE(eig.size() == 3);
  CHECK(std::abs(eig[0].value - 1.0) < 1e-14);
  CHECK(std::abs(eig[1].value - 0.5) < 1e-14);
  CHECK(std::abs(eig[2].value - 0.1) < 1e-14);
  CHECK(std::abs(eig[0].right(1) - 1.0) < 1e-14);
  CHECK(std::abs(eig[1].right(2) - 1.0) < 1e-14);
  CHECK(std::abs(eig[2].right(0) - 1.0) < 1e-14);
}

TEST_CASE("general_eig on a unitary superoperator") {
  const double theta = 0.4;
  const ComplexMatrix u = hermitian_exp(pauli_z(), theta);
  const auto eig = general_eig(kron(u, u.conjugate()));
  REQUIRE(eig.size() == 4);
  // Equal moduli: ordering by imaginary part puts e^{2i theta} first.
  CHECK(std::abs(eig[0].value - std::polar(1.0, 2 * theta)) < 1e-12);
  CHECK(std::abs(eig[1].value - 1.0) < 1e-12);
  CHECK(std::abs(eig[2].value - 1.0) < 1e-12);
  CHECK(std::abs(eig[3].value - std::polar(1.0, -2 * theta)) < 1e-12);
}

TEST_CASE("general_eig reconstruction and biorthonormality") {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = random_matrix(9, rng);
    const auto eig = general_eig(a);
    ComplexMatrix rec = ComplexMatrix::Zero(9, 9);
    for (const auto& t : eig) rec += t.value * t.right * t.left.adjoint();
    CHECK(max_abs(rec - a) <= 1e-8);
    for (size_t i = 0; i < eig.size(); ++i) {
      CHECK(max_abs(ComplexMatrix(a * eig[i].right - eig[i].value * eig[i].right)) <= 1e-10);
      CHECK(max_abs(ComplexMatrix(a.adjoint() * eig[i].left - std::conj(eig[i].value) * eig[i].left)) <= 1e-9);
      for (size_t j = 0; j < eig.size(); ++j)
        CHECK(std::abs(eig[i].left.dot(eig[j].right) - (i == j ? 1.0 : 0.0)) <= 1e-8);
    }
    for (size_t i = 1; i < eig.size(); ++i) CHECK(std::abs(eig[i - 1].value) >= std::abs(eig[i].value) - 1e-12);
  }
}

TEST_CASE("general_eig with a degenerate block") {
  // Non-normal but diagonalizable: eigenvalue 1 twice, 0.3 once.
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 1.0;
  d(2, 2) = 0.3;
  ComplexMatrix s(3, 3);
  s << 1.0, 0.5, 0.2, 0.0, 1.0, 0.7, 0.3, 0.0, 1.0;
  const ComplexMatrix a = s * d * s.inverse();
  const auto eig = general_eig(a);
  ComplexMatrix rec = ComplexMatrix::Zero(3, 3);
  for (const auto& t : eig) rec += t.value * t.right * t.left.adjoint();
  CHECK(max_abs(rec - a) <= 1e-10);
}

TEST_CASE("general_eig rejects a Jordan block") {
  ComplexMatrix j = ComplexMatrix::Zero(2, 2);
  j(0, 0) = j(1, 1) = 0.5;
  j(0, 1) = 1.0;
  CHECK_THROWS_AS(general_eig(j), DefectiveSpectrumError);
}

TEST_CASE("superoperator power") {
  SplitMix64 rng(2);
  const ComplexMatrix a = random_matrix(4, rng) * 0.3;
  const Superoperator s(a);
  CHECK(s.bath_dim() == 2);
  CHECK(max_abs(s.pow(0).matrix() - ComplexMatrix::Identity(4, 4)) == 0.0);
  CHECK(max_abs(s.pow(5).matrix() - a * a * a * a * a) < 1e-14);
  CHECK_THROWS_AS(Superoperator(ComplexMatrix::Zero(3, 3)), DimensionError);
}
