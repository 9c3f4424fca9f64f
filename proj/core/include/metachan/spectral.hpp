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

#include <optional>
#include <string>
#include <vector>

#include "metachan/channel.hpp"

namespace metachan {

enum class PointClass { Fixed, Rotating, Metastable, Decaying };

const char* to_string(PointClass c);

struct SpectralPoint {
  cplx value;
  ComplexMatrix right;  // R_i, d x d
  ComplexMatrix left;   // L_i, d x d, <<L_i|R_j>> = delta_ij
  PointClass cls = PointClass::Decaying;
};

struct ClassificationOptions {
  double eps_fix = 1e-9;
  double eps_phase = 1e-7;
  double gap_ratio = 10.0;
  // When set, non-fixed, non-rotating points with 1 - |lambda| below this
  // value are metastable and the gap search is skipped.
  std::optional<double> metastable_threshold;
};

struct ChannelSpectrum {
  std::vector<SpectralPoint> points;  // descending |lambda|
  int num_fixed = 0;                  // r
  int num_rotating = 0;
  int num_metastable = 0;
  int num_decaying = 0;
  int q = 0;  // 1-based index of the last metastable point (0 if none)
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().right.rows()); }
};

struct MetastableWindow {
  double m_lo = 0.0;         // 1 / |ln|lambda_{q+1}||
  double m_hi = 0.0;         // 1 / |ln|lambda_q||
  double m_lo_approx = 0.0;  // 1 / (1 - |lambda_{q+1}|)
  double m_hi_approx = 0.0;  // 1 / (1 - |lambda_q|)
  int q = 0;
};

struct ExtremeMetastableState {
  ComplexMatrix matrix;
  std::string label;
};

struct MMCoordinates {
  std::vector<double> weights;
  double min_weight = 0.0;
  bool negative = false;  // some weight below zero (still >= -0.05)
};

ChannelSpectrum decompose(const QuantumChannel& ch, const ClassificationOptions& opt = {});

// Hermitian, trace-normalized basis of the fixed-point space.
std::vector<ComplexMatrix> stationary_states(const ChannelSpectrum& spec);

MetastableWindow metastable_window(const ChannelSpectrum& spec);
// Window of the manifold that keeps only points up to 1-based index q_kept;
// the next point is treated as the first decaying one.
MetastableWindow metastable_window(const ChannelSpectrum& spec, int q_kept);

// Rotate a point with real eigenvalue so that R and L are Hermitian,
// keeping <<L|R>> = 1.
std::pair<ComplexMatrix, ComplexMatrix> hermitian_gauge(const SpectralPoint& p);

// Two extreme states of a manifold spanned by one fixed point and the slowest
// metastable point. Faster metastable points are discarded. Labels are
// "upper" and "lower" by the extreme eigenvalue of L used.
std::pair<ExtremeMetastableState, ExtremeMetastableState> ems_1d(const ChannelSpectrum& spec);

// Barycentric weights of rho with respect to a set of extreme states, solved
// from <<L_i|rho>> = sum_mu p_mu <<L_i|EMS_mu>> over the first ems.size() points.
MMCoordinates mm_coordinates(const ChannelSpectrum& spec, const std::vector<ExtremeMetastableState>& ems,
                             const ComplexMatrix& rho);

}  // namespace metachan
