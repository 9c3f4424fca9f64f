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

#include "metachan/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace metachan {

const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::Fixed: return "fixed";
    case PointClass::Rotating: return "rotating";
    case PointClass::Metastable: return "metastable";
    case PointClass::Decaying: return "decaying";
  }
  return "unknown";
}

ChannelSpectrum decompose(const QuantumChannel& ch, const ClassificationOptions& opt) {
  const Superoperator phi = natural_representation(ch);
  const auto triples = general_eig(phi.matrix());

  ChannelSpectrum spec;
  spec.points.reserve(triples.size());
  for (const auto& t : triples) {
    SpectralPoint p;
    p.value = t.value;
    p.right = devectorize(t.right);
    p.left = devectorize(t.left);
    spec.points.push_back(std::move(p));
  }

  std::vector<int> candidates;
  for (size_t i = 0; i < spec.points.size(); ++i) {
    auto& p = spec.points[i];
    const double mag = std::abs(p.value);
    if (mag > 1.0 + 1e-9) {
      std::ostringstream os;
      os << "decompose: eigenvalue " << p.value << " lies outside the unit disk";
      throw NumericalError(os.str());
    }
    if (std::abs(p.value - 1.0) <= opt.eps_fix) {
      p.cls = PointClass::Fixed;
      ++spec.num_fixed;
    } else if (mag >= 1.0 - opt.eps_fix && std::abs(std::arg(p.value)) > opt.eps_phase) {
      p.cls = PointClass::Rotating;
      ++spec.num_rotating;
    } else {
      p.cls = PointClass::Decaying;
      candidates.push_back(static_cast<int>(i));
    }
  }
  if (spec.num_fixed == 0) throw NumericalError("decompose: no eigenvalue equal to 1; channel is not trace preserving");

  auto gap = [&](int i) { return std::max(1.0 - std::abs(spec.points[i].value), 1e-300); };
  int n_meta = 0;
  if (opt.metastable_threshold) {
    for (int i : candidates)
      if (gap(i) < *opt.metastable_threshold) ++n_meta;
  } else if (candidates.size() >= 2) {
    double best = 0.0;
    int best_i = -1;
    for (size_t k = 0; k + 1 < candidates.size(); ++k) {
      const double ratio = gap(candidates[k + 1]) / gap(candidates[k]);
      if (ratio > best) {
        best = ratio;
        best_i = static_cast<int>(k);
      }
    }
    if (best >= opt.gap_ratio) n_meta = best_i + 1;
  }
  for (size_t k = 0; k < candidates.size(); ++k) {
    auto& p = spec.points[candidates[k]];
    if (static_cast<int>(k) < n_meta) {
      p.cls = PointClass::Metastable;
      spec.q = candidates[k] + 1;
    }
  }
  spec.num_metastable = n_meta;
  spec.num_decaying = static_cast<int>(candidates.size()) - n_meta;

  // Unit-trace fixed points where the solver returned a traceful representative.
  for (auto& p : spec.points) {
    if (p.cls != PointClass::Fixed) continue;
    const cplx tr = p.right.trace();
    if (std::abs(tr) > 1e-8) {
      p.right /= tr;
      p.left *= std::conj(tr);
    }
  }
  return spec;
}

namespace {

// Hermitian elements spanning the same real space as the given matrices,
// orthonormal under Re Tr(A B).
std::vector<ComplexMatrix> hermitian_span(const std::vector<ComplexMatrix>& mats) {
  std::vector<ComplexMatrix> basis;
  const cplx i_unit(0.0, 1.0);
  for (const auto& m : mats) {
    for (ComplexMatrix h : {ComplexMatrix((m + m.adjoint()) * 0.5), ComplexMatrix((m - m.adjoint()) / (2.0 * i_unit))}) {
      for (const auto& b : basis) h -= hs_inner(b, h).real() * b;
      const double nrm = std::sqrt(std::max(hs_inner(h, h).real(), 0.0));
      if (nrm > 1e-8) basis.push_back(hermitize(h / nrm));
    }
  }
  return basis;
}

double span_residual(const std::vector<ComplexMatrix>& basis, const ComplexMatrix& x) {
  ComplexMatrix r = x;
  for (const auto& b : basis) r -= hs_inner(b, r).real() * b;
  return r.norm();
}

Eigen::Index dominant_diagonal(const ComplexMatrix& m) {
  Eigen::Index idx = 0;
  m.diagonal().real().maxCoeff(&idx);
  return idx;
}

}  // namespace

std::vector<ComplexMatrix> stationary_states(const ChannelSpectrum& spec) {
  std::vector<ComplexMatrix> fixed;
  for (const auto& p : spec.points)
    if (p.cls == PointClass::Fixed) fixed.push_back(p.right);
  const auto basis = hermitian_span(fixed);
  if (basis.empty()) throw NumericalError("stationary_states: empty fixed-point space");

  std::vector<ComplexMatrix> states;
  if (basis.size() == 1) {
    const cplx tr = basis[0].trace();
    if (std::abs(tr) < 1e-12) throw NumericalError("stationary_states: fixed point has zero trace");
    states.push_back(hermitize(basis[0] / tr.real()));
    return states;
  }

  // The fixed-point set of a unital channel is an algebra: the spectral
  // projectors of a generic Hermitian element are its minimal projectors.
  const int d = spec.dim();
  ComplexMatrix x = ComplexMatrix::Zero(d, d);
  for (size_t k = 0; k < basis.size(); ++k) x += basis[k] / (static_cast<double>(k) + std::sqrt(2.0));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(x));
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<ComplexMatrix> candidates;
  for (Eigen::Index i = 0; i < ev.size();) {
    Eigen::Index j = i + 1;
    while (j < ev.size() && ev(j) - ev(j - 1) < 1e-8 * scale) ++j;
    const auto v = es.eigenvectors().middleCols(i, j - i);
    candidates.push_back(v * v.adjoint() / static_cast<double>(j - i));
    i = j;
  }
  bool ok = candidates.size() == basis.size();
  for (const auto& c : candidates) ok = ok && span_residual(basis, c) < 1e-7;
  if (ok) {
    states = std::move(candidates);
  } else {
    for (const auto& b : basis) {
      const double tr = b.trace().real();
      states.push_back(std::abs(tr) > 1e-8 ? ComplexMatrix(b / tr) : b);
    }
  }
  std::stable_sort(states.begin(), states.end(), [](const ComplexMatrix& a, const ComplexMatrix& b) {
    return dominant_diagonal(a) < dominant_diagonal(b);
  });
  return states;
}

MetastableWindow metastable_window(const ChannelSpectrum& spec) {
  if (spec.num_metastable == 0) throw Error("metastable_window: spectrum has no metastable points");
  return metastable_window(spec, spec.q);
}

MetastableWindow metastable_window(const ChannelSpectrum& spec, int q_kept) {
  const int n = static_cast<int>(spec.points.size());
  if (q_kept < 1 || q_kept > n || spec.points[q_kept - 1].cls != PointClass::Metastable) {
    throw Error("metastable_window: point " + std::to_string(q_kept) + " is not metastable");
  }
  auto inv_log = [](double x) { return x <= 0.0 ? 0.0 : 1.0 / std::abs(std::log(x)); };
  auto inv_gap = [](double x) { return 1.0 / (1.0 - x); };
  MetastableWindow w;
  w.q = q_kept;
  const double hi = std::abs(spec.points[q_kept - 1].value);
  w.m_hi = inv_log(hi);
  w.m_hi_approx = inv_gap(hi);
  if (q_kept < n) {
    const double lo = std::abs(spec.points[q_kept].value);
    w.m_lo = inv_log(lo);
    w.m_lo_approx = inv_gap(lo);
  }
  return w;
}

std::pair<ComplexMatrix, ComplexMatrix> hermitian_gauge(const SpectralPoint& p) {
  if (std::abs(p.value.imag()) > 1e-9 * std::max(1.0, std::abs(p.value))) {
    throw Error("hermitian_gauge: eigenvalue is not real");
  }
  Eigen::Index i = 0, j = 0;
  p.right.cwiseAbs().maxCoeff(&i, &j);
  const cplx rij = p.right(i, j);
  cplx phase = std::conj(p.right(j, i)) / rij;
  phase /= std::abs(phase);
  const cplx half = std::sqrt(phase);
  ComplexMatrix r = hermitize(p.right * half);
  ComplexMatrix l = hermitize(p.left * half);
  const double ov = hs_inner(l, r).real();
  if (std::abs(ov) < 1e-12) throw NumericalError("hermitian_gauge: Hermitian parts are not biorthogonal");
  l /= ov;
  return {r, l};
}

std::pair<ExtremeMetastableState, ExtremeMetastableState> ems_1d(const ChannelSpectrum& spec) {
  if (spec.num_fixed != 1 || spec.num_metastable < 1) {
    throw Error("ems_1d: needs exactly one fixed point and at least one metastable point");
  }
  const ComplexMatrix rho_fix = stationary_states(spec).front();
  const SpectralPoint* slow = nullptr;
  for (const auto& p : spec.points)
    if (p.cls == PointClass::Metastable) {
      slow = &p;
      break;
    }
  const auto [r, l] = hermitian_gauge(*slow);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(l, Eigen::EigenvaluesOnly);
  const double c_max = es.eigenvalues().maxCoeff();
  const double c_min = es.eigenvalues().minCoeff();
  ExtremeMetastableState upper{hermitize(rho_fix + c_max * r), "upper"};
  ExtremeMetastableState lower{hermitize(rho_fix + c_min * r), "lower"};
  return {upper, lower};
}

MMCoordinates mm_coordinates(const ChannelSpectrum& spec, const std::vector<ExtremeMetastableState>& ems,
                             const ComplexMatrix& rho) {
  const auto q = static_cast<Eigen::Index>(ems.size());
  if (q == 0 || q > static_cast<Eigen::Index>(spec.points.size())) throw Error("mm_coordinates: bad EMS count");
  Eigen::MatrixXd a(q, q);
  Eigen::VectorXd b(q);
  for (Eigen::Index i = 0; i < q; ++i) {
    const ComplexMatrix l = hermitian_gauge(spec.points[i]).second;
    for (Eigen::Index mu = 0; mu < q; ++mu) a(i, mu) = hs_inner(l, ems[mu].matrix).real();
    b(i) = hs_inner(l, rho).real();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.rank() < q || lu.rcond() < 1e-12) throw NumericalError("mm_coordinates: singular dual system");
  const Eigen::VectorXd p = lu.solve(b);
  MMCoordinates out;
  out.weights.assign(p.data(), p.data() + q);
  out.min_weight = p.minCoeff();
  out.negative = out.min_weight < 0.0;
  return out;
}

}  // namespace metachan
