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

#include "metachan/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace metachan {

namespace {

int perfect_square_root(Eigen::Index n) {
  const auto r = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (r * r != n) {
    throw DimensionError("length " + std::to_string(n) + " is not a perfect square");
  }
  return static_cast<int>(r);
}

void require_square(const ComplexMatrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError(std::string(who) + ": matrix must be square and non-empty");
  }
}

// Larger |lambda| first; ties broken by imaginary then real part so the order
// does not depend on the eigensolver.
bool spectral_less(const cplx& a, const cplx& b) {
  const double da = std::abs(a), db = std::abs(b);
  if (std::abs(da - db) > 1e-12) return da > db;
  if (std::abs(a.imag() - b.imag()) > 1e-12) return a.imag() > b.imag();
  return a.real() > b.real();
}

}  // namespace

Superoperator::Superoperator(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionError("superoperator must be square");
  d_ = perfect_square_root(m_.rows());
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& rho) const {
  if (rho.rows() != d_ || rho.cols() != d_) throw DimensionError("superoperator/state dimension mismatch");
  return devectorize(m_ * vectorize(rho));
}

Superoperator Superoperator::pow(long long m) const {
  if (m < 0) throw Error("negative superoperator power");
  ComplexMatrix result = ComplexMatrix::Identity(m_.rows(), m_.cols());
  ComplexMatrix base = m_;
  while (m > 0) {
    if (m & 1) result = (result * base).eval();
    m >>= 1;
    if (m > 0) base = (base * base).eval();
  }
  return Superoperator(std::move(result));
}

HSVector vectorize(const ComplexMatrix& x) {
  require_square(x, "vectorize");
  const Eigen::Index d = x.rows();
  HSVector v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = x(i, j);
  return v;
}

ComplexMatrix devectorize(const HSVector& v) {
  const int d = perfect_square_root(v.size());
  ComplexMatrix x(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = v(i * d + j);
  return x;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

Superoperator sandwich_superoperator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(a, "sandwich_superoperator");
  require_square(b, "sandwich_superoperator");
  if (a.rows() != b.rows()) throw DimensionError("sandwich_superoperator: dimension mismatch");
  return Superoperator(kron(a, b.transpose()));
}

cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("hs_inner: shape mismatch");
  return (a.adjoint() * b).trace();
}

double max_abs(const ComplexMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double hermiticity_error(const ComplexMatrix& a) { return max_abs(a - a.adjoint()); }

ComplexMatrix hermitize(const ComplexMatrix& a) { return (a + a.adjoint()) * 0.5; }

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

ComplexMatrix hermitian_exp(const ComplexMatrix& h, double t, ExpSign sign) {
  require_square(h, "hermitian_exp");
  const double herr = hermiticity_error(h);
  if (herr > 1e-10) {
    std::ostringstream os;
    os << "hermitian_exp: generator is not Hermitian (max |H - H^dagger| = " << herr << ")";
    throw NumericalError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(h));
  if (es.info() != Eigen::Success) throw NumericalError("hermitian_exp: eigensolver failed");
  const double s = sign == ExpSign::Minus ? -1.0 : 1.0;
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::polar(1.0, s * es.eigenvalues()(k) * t);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

void validate_state(const ComplexMatrix& rho, double tol_psd, double tol_trace) {
  require_square(rho, "state");
  if (!rho.allFinite()) throw InvalidStateError("state has non-finite entries");
  if (hermiticity_error(rho) > 1e-9) throw InvalidStateError("state is not Hermitian");
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > tol_trace) {
    std::ostringstream os;
    os << "state trace " << tr.real() << " deviates from 1";
    throw InvalidStateError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(rho), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol_psd) {
    std::ostringstream os;
    os << "state is not positive semidefinite (min eigenvalue " << es.eigenvalues().minCoeff() << ")";
    throw InvalidStateError(os.str());
  }
}

ComplexMatrix psd_sqrt(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(a));
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) < -1e-10) throw InvalidStateError("psd_sqrt: matrix has a negative eigenvalue");
    ev(k) = std::sqrt(std::max(ev(k), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  validate_state(rho);
  validate_state(sigma);
  if (rho.rows() != sigma.rows()) throw DimensionError("fidelity: dimension mismatch");
  const ComplexMatrix s = psd_sqrt(rho);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(s * sigma * s), Eigen::EigenvaluesOnly);
  double f = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) f += std::sqrt(std::max(es.eigenvalues()(k), 0.0));
  return std::min(f, 1.0);
}

double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) throw DimensionError("trace_distance: shape mismatch");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(rho - sigma), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::vector<EigenTriple> general_eig(const ComplexMatrix& a, const EigOptions& opt) {
  require_square(a, "general_eig");
  if (!a.allFinite()) throw NumericalError("general_eig: non-finite input");
  const Eigen::Index n = a.rows();

  Eigen::ComplexEigenSolver<ComplexMatrix> right_solver(a, true);
  Eigen::ComplexEigenSolver<ComplexMatrix> left_solver(a.adjoint(), true);
  if (right_solver.info() != Eigen::Success || left_solver.info() != Eigen::Success) {
    throw NumericalError("general_eig: eigensolver did not converge");
  }

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& lam = right_solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return spectral_less(lam(i), lam(j)); });

  // Union-find over nearly equal eigenvalues.
  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const cplx li = lam(order[i]), lj = lam(order[j]);
      if (std::abs(li - lj) < opt.degeneracy_tol * std::max(1.0, std::abs(li))) parent[find(j)] = find(i);
    }

  std::vector<EigenTriple> out(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i].value = lam(order[i]);
    out[i].right = right_solver.eigenvectors().col(order[i]).normalized();
  }

  std::vector<bool> used(static_cast<size_t>(n), false);
  const auto& mu = left_solver.eigenvalues();
  std::vector<bool> done(static_cast<size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::vector<int> group;
    for (Eigen::Index j = i; j < n; ++j)
      if (find(static_cast<int>(j)) == find(static_cast<int>(i))) group.push_back(static_cast<int>(j));
    const cplx centre = out[i].value;
    const auto g = static_cast<Eigen::Index>(group.size());

    // Pick the g left eigenvectors whose conjugated eigenvalue is closest.
    std::vector<int> cand;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!used[j]) cand.push_back(static_cast<int>(j));
    std::partial_sort(cand.begin(), cand.begin() + g, cand.end(), [&](int x, int y) {
      return std::abs(std::conj(mu(x)) - centre) < std::abs(std::conj(mu(y)) - centre);
    });

    ComplexMatrix rg(n, g), lg(n, g);
    for (Eigen::Index k = 0; k < g; ++k) {
      rg.col(k) = out[group[k]].right;
      lg.col(k) = left_solver.eigenvectors().col(cand[k]);
      used[cand[k]] = true;
    }
    const ComplexMatrix overlap = lg.adjoint() * rg;
    Eigen::JacobiSVD<ComplexMatrix> svd(overlap);
    const double smin = svd.singularValues().minCoeff();
    if (smin < 1e-10 * std::max(1.0, svd.singularValues().maxCoeff())) {
      std::ostringstream os;
      os << "general_eig: cannot biorthonormalize eigenvalue group near " << centre << " (size " << g << ")";
      throw DefectiveSpectrumError(os.str(), group);
    }
    const ComplexMatrix pinv = overlap.completeOrthogonalDecomposition().pseudoInverse();
    const ComplexMatrix lnew = lg * pinv.adjoint();
    for (Eigen::Index k = 0; k < g; ++k) {
      out[group[k]].left = lnew.col(k);
      done[group[k]] = true;
    }
  }

  // Gauge: largest-magnitude component of each right vector real positive.
  for (auto& t : out) {
    Eigen::Index imax = 0;
    t.right.cwiseAbs().maxCoeff(&imax);
    const cplx ph = t.right(imax) / std::abs(t.right(imax));
    t.right /= ph;
    t.left *= std::conj(ph);
  }

  double err = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const cplx ov = out[i].left.dot(out[j].right);
      err = std::max(err, std::abs(ov - (i == j ? 1.0 : 0.0)));
    }
  if (err > opt.biorth_tol) {
    std::ostringstream os;
    os << "general_eig: biorthonormality error " << err << " exceeds tolerance";
    throw DefectiveSpectrumError(os.str(), {});
  }
  return out;
}

}  // namespace metachan
