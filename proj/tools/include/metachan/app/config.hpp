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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metachan/app/toml.hpp"
#include "metachan/channel.hpp"
#include "metachan/nv_model.hpp"
#include "metachan/trajectory.hpp"

namespace metachan::app {

std::string tool_version();

struct InterleaveSpec {
  int level_a = 0;
  int level_b = 1;
  double angle_deg = 180.0;
  long long every = 1;
};

struct AnalysisOptions {
  long long window = 3000;                // RIMs per bin
  int k_max = 4;
  std::vector<long long> histogram_at;    // empty: the last complete bin
  // "cumulative": photons summed over the first m measurements;
  // "bin": the single window ending at m.
  std::string histogram_mode = "bin";
  bool hmm = true;
  int hmm_states = 2;
  int hmm_trajectory = 0;
  double rim_time_us = 10.0;              // wall time per RIM, for dwell times
  std::optional<double> rate_threshold;   // photons per RIM; default from the EMS rates
  double f_min = 0.95;
};

struct SweepSpec {
  std::string parameter;                  // theta | tau | m
  std::vector<double> values;
  std::string parameter2;
  std::vector<double> values2;
  bool simulate = true;
};

struct RunConfig {
  std::optional<nv::NVParams> nv;
  std::optional<PureDephasingModel> generic;

  long long m = 60000;
  int n_traj = 300;
  long long snapshot_stride = 0;
  std::uint64_t seed = 1;
  std::string initial = "mixed";          // mixed | dark | bright
  bool store_states = true;
  std::optional<WeakReadout> readout = WeakReadout{};
  std::optional<InterleaveSpec> interleave;

  AnalysisOptions analysis;
  SweepSpec sweep;
  std::string output_dir = "out";

  RunConfig() : nv(nv::NVParams{}) {}

  void validate() const;
  int dim() const;
  PureDephasingModel model() const;
  QuantumChannel channel() const;
  SimConfig sim_config() const;
  std::vector<long long> histogram_points() const;
};

// Overlays the keys of doc onto base. Unknown keys are rejected.
RunConfig apply_toml(TomlDocument& doc, RunConfig base = {});
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

const std::vector<std::string>& preset_names();
const std::string& preset_text(const std::string& name);
RunConfig preset(const std::string& name);

// Canonical form of everything that affects results (output_dir excluded).
nlohmann::json to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

}  // namespace metachan::app
