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

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metachan/app/config.hpp"
#include "metachan/app/output.hpp"
#include "metachan/hmm.hpp"
#include "metachan/spectral.hpp"
#include "metachan/stats.hpp"
#include "metachan/trajectory.hpp"

namespace metachan::app {

struct RunContext {
  int threads = 0;                                // 0: hardware concurrency
  std::function<void(const std::string&)> log;    // progress messages, may be empty
  void note(const std::string& msg) const {
    if (log) log(msg);
  }
};

// Thread count from METACHAN_THREADS, falling back to the hardware.
int threads_from_env();

// ---- spectrum ----

struct SpectrumReport {
  ChannelSpectrum spectrum;
  std::vector<ComplexMatrix> stationary;
  std::optional<MetastableWindow> window;      // whole metastable manifold
  std::optional<MetastableWindow> window_1d;   // slowest metastable point alone
  std::vector<ExtremeMetastableState> ems;
  std::vector<double> ems_rate;                // photons (or outcome-1 frequency) per RIM
  int dark_ems = -1;                           // index of the lower-rate EMS
  std::string note;                            // why EMS/windows are missing
};

SpectrumReport compute_spectrum(const RunConfig& cfg);
std::string class_summary(const ChannelSpectrum& s);
std::string spectrum_table(const SpectrumReport& r);
nlohmann::json spectrum_json(const SpectrumReport& r);

// Dark/bright split used to classify trajectories by running photon rate.
double rate_threshold(const RunConfig& cfg, const SpectrumReport* report);

// ---- simulate ----

struct SimulationOutput {
  std::vector<Trajectory> trajectories;  // ordered by index
  std::vector<EnsemblePoint> ensemble;   // empty without stored states or references
  double rate_threshold = 0.0;
  std::optional<MetastableWindow> window_1d;
  std::optional<double> reach_fraction;  // max(F_D, F_B) >= f_min inside window_1d
};

struct CheckpointOptions {
  std::filesystem::path path;  // empty: no checkpointing
  bool resume = false;
};

SimulationOutput simulate(const RunConfig& cfg, const RunContext& ctx, const CheckpointOptions& ckpt = {});
void write_simulation(const std::filesystem::path& dir, const RunConfig& cfg, const SimulationOutput& out);
TraceTable to_trace_table(const SimulationOutput& out, const RunConfig& cfg);

// ---- analyze ----

struct HistogramPoint {
  long long m = 0;    // requested point
  long long bin = 0;  // 0-based index of the last bin ending at or before m
  Histogram histogram;
  MixtureFit fit;
  std::optional<ThresholdFidelity> fidelity;
};

struct HmmOutput {
  int trajectory = 0;
  BaumWelchResult fit;
  std::vector<int> path;
  std::vector<Jump> jumps;
  std::vector<DwellTime> dwell;
  std::vector<StateClass> classes;
};

struct AnalysisOutput {
  long long window = 0;
  std::vector<HistogramPoint> points;
  std::optional<HmmOutput> hmm;
  std::string hmm_note;
  std::string input_hash;
};

AnalysisOutput analyze(const TraceTable& traces, const RunConfig& cfg);
void write_analysis(const std::filesystem::path& dir, const RunConfig& cfg, const AnalysisOutput& out);

// ---- sweep ----

struct SweepRow {
  double value = 0.0;
  std::optional<double> value2;
  int num_fixed = 0;
  int num_rotating = 0;
  int num_metastable = 0;
  int num_decaying = 0;
  std::optional<MetastableWindow> window;
  std::optional<MetastableWindow> window_1d;
  long long at_m = 0;
  std::optional<int> peak_k;
  std::optional<ThresholdFidelity> fidelity;
};

// cfg with one sweep coordinate applied.
RunConfig sweep_point(const RunConfig& cfg, const std::string& parameter, double value);
std::vector<SweepRow> sweep(const RunConfig& cfg, const RunContext& ctx);
std::string sweep_csv(const RunConfig& cfg, const std::vector<SweepRow>& rows);

}  // namespace metachan::app
