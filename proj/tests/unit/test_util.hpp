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

#include "metachan/linalg.hpp"
#include "metachan/rng.hpp"

namespace metachan::testing {

inline ComplexMatrix random_matrix(int d, SplitMix64& rng) {
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  return m;
}

inline ComplexMatrix random_hermitian(int d, SplitMix64& rng) {
  const ComplexMatrix a = random_matrix(d, rng);
  return (a + a.adjoint()) * 0.5;
}

inline ComplexMatrix random_state(int d, SplitMix64& rng) {
  const ComplexMatrix a = random_matrix(d, rng);
  ComplexMatrix r = a * a.adjoint();
  return r / r.trace();
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}
inline ComplexMatrix pauli_y() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = cplx(0, -1);
  m(1, 0) = cplx(0, 1);
  return m;
}
inline ComplexMatrix pauli_z() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

inline ComplexMatrix basis_projector(int d, int k) {
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  p(k, k) = 1.0;
  return p;
}

}  // namespace metachan::testing
