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

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace metachan {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using HSVector = Eigen::VectorXcd;

// Error hierarchy shared by every module.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class NumericalError : public Error {
 public:
  using Error::Error;
};
class InvalidStateError : public Error {
 public:
  using Error::Error;
};
class DefectiveSpectrumError : public NumericalError {
 public:
  DefectiveSpectrumError(const std::string& what, std::vector<int> group)
      : NumericalError(what), group_(std::move(group)) {}
  const std::vector<int>& group() const { return group_; }

 private:
  std::vector<int> group_;
};

// A d^2 x d^2 map acting on row-major vectorized d x d operators.
class Superoperator {
 public:
  Superoperator() = default;
  explicit Superoperator(ComplexMatrix m);

  const ComplexMatrix& matrix() const { return m_; }
  int bath_dim() const { return d_; }

  ComplexMatrix apply(const ComplexMatrix& rho) const;
  HSVector apply(const HSVector& v) const { return m_ * v; }
  Superoperator pow(long long m) const;
  Superoperator adjoint() const { return Superoperator(m_.adjoint()); }

 private:
  ComplexMatrix m_;
  int d_ = 0;
};

// Row-major stacking: X(i, j) lands at index i * d + j.
HSVector vectorize(const ComplexMatrix& x);
ComplexMatrix devectorize(const HSVector& v);

// A (.) B  ->  A kron B^T under row-major vectorization.
Superoperator sandwich_superoperator(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// HS inner product <<A|B>> = Tr(A^dagger B).
cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

enum class ExpSign { Minus, Plus };

// exp(-i H t) for ExpSign::Minus, exp(+i H t) for ExpSign::Plus.
ComplexMatrix hermitian_exp(const ComplexMatrix& h, double t, ExpSign sign = ExpSign::Minus);

double max_abs(const ComplexMatrix& a);
double hermiticity_error(const ComplexMatrix& a);
ComplexMatrix hermitize(const ComplexMatrix& a);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// Throws InvalidStateError unless rho is Hermitian, PSD (eigenvalues >= -tol_psd)
// and has unit trace within tol_trace.
void validate_state(const ComplexMatrix& rho, double tol_psd = 1e-10, double tol_trace = 1e-9);

// Square root of a PSD Hermitian matrix; eigenvalues in [-1e-10, 0) are clipped.
ComplexMatrix psd_sqrt(const ComplexMatrix& a);

// Root fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)).
double fidelity(const ComplexMatrix& rho, const ComplexMatrix& sigma);

double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma);

struct EigenTriple {
  cplx value;
  HSVector right;
  HSVector left;
};

struct EigOptions {
  double degeneracy_tol = 1e-9;
  double biorth_tol = 1e-8;
};

// Full eigensystem with biorthonormal left/right vectors, <l_i|r_j> = delta_ij,
// sorted by descending |lambda|. Gauge: the largest-magnitude component of each
// right eigenvector is real and positive.
std::vector<EigenTriple> general_eig(const ComplexMatrix& a, const EigOptions& opt = {});

}  // namespace metachan
