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

#include "metachan/app/config.hpp"

#include <cmath>
#include <cstdio>
#include <map>

namespace metachan::app {

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p{
      {"fig2-desk", R"(# Two-peak metastable regime at desk scale.
[nv]
theta = 8.8
tau = 374.0

[sim]
m = 60000
n_traj = 300
seed = 1

[readout]
n0 = 0.065
n1 = 0.049

[analysis]
window = 3000
histogram_at = [6000, 30000, 60000]
)"},
      {"fig2-full", R"(# Full-length run: 3000 trajectories of 600k measurements.
[nv]
theta = 8.8
tau = 374.0

[sim]
m = 600000
n_traj = 3000
seed = 1

[readout]
n0 = 0.065
n1 = 0.049

[analysis]
window = 3000
histogram_at = [6000, 60000, 249000, 600000]
)"},
      {"edf2-a", R"(# Small tilt: slow relaxation, long-lived peaks.
[nv]
theta = 3.5
tau = 374.0

[sim]
m = 600000
n_traj = 300
seed = 1

[readout]
n0 = 0.065
n1 = 0.049

[analysis]
window = 3000
histogram_at = [60000, 300000, 600000]
)"},
      {"edf2-b", R"(# Large tilt: the peaks merge well before 600k measurements.
[nv]
theta = 15.0
tau = 374.0

[sim]
m = 600000
n_traj = 300
seed = 1

[readout]
n0 = 0.065
n1 = 0.049

[analysis]
window = 3000
histogram_at = [6000, 60000, 600000]
)"},
      {"edf2-c", R"(# Strong readout: one photon per bright outcome, none per dark.
[nv]
theta = 8.8
tau = 374.0

[sim]
m = 60000
n_traj = 300
seed = 1

[readout]
n0 = 0.0
n1 = 1.0

[analysis]
window = 3000
histogram_at = [6000, 30000, 60000]
)"},
      {"edf3", R"(# Near-aligned field: three long-lived levels, single long trace for the HMM.
[nv]
theta = 2.0
tau = 350.0

[sim]
m = 3000000
n_traj = 1
seed = 1
store_states = false

[readout]
n0 = 0.065
n1 = 0.049

[analysis]
window = 3000
hmm_states = 3
)"},
  };
  return p;
}

ComplexMatrix matrix_from(TomlDocument& doc, const std::string& key, int dim) {
  int rows = 0, cols = 0;
  const auto re = doc.get_flat(key, &rows, &cols);
  int r_im = 0, c_im = 0;
  const auto im = doc.get_flat(key + "_im", &r_im, &c_im);
  if (re.empty()) throw ConfigError("missing matrix", 0, key);
  if (rows == 0) rows = cols = static_cast<int>(std::lround(std::sqrt(static_cast<double>(re.size()))));
  if (rows != cols || rows * cols != static_cast<int>(re.size()))
    throw ConfigError("matrix must be square", 0, key);
  if (dim > 0 && rows != dim) throw ConfigError("matrix dimension does not match 'dim'", 0, key);
  if (!im.empty() && im.size() != re.size()) throw ConfigError("imaginary part has the wrong size", 0, key + "_im");
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const size_t k = static_cast<size_t>(i * cols + j);
      m(i, j) = cplx(re[k], im.empty() ? 0.0 : im[k]);
    }
  return m;
}

nlohmann::json matrix_json(const ComplexMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ConfigError(std::string(what) + " must be finite");
}

}  // namespace

std::string tool_version() {
#ifdef METACHAN_VERSION
  return METACHAN_VERSION;
#else
  return "0.0.0";
#endif
}

void RunConfig::validate() const {
  if (nv.has_value() == generic.has_value()) throw ConfigError("exactly one of [nv] or [generic] must be given");
  if (nv) {
    try {
      nv->validate();
    } catch (const metachan::Error& e) {
      throw ConfigError(e.what(), 0, "nv");
    }
  } else {
    try {
      generic->validate();
    } catch (const metachan::Error& e) {
      throw ConfigError(e.what(), 0, "generic");
    }
  }
  if (m < 0) throw ConfigError("must be >= 0", 0, "sim.m");
  if (n_traj < 1) throw ConfigError("must be >= 1", 0, "sim.n_traj");
  if (snapshot_stride < 0) throw ConfigError("must be >= 0", 0, "sim.snapshot_stride");
  if (initial != "mixed" && initial != "dark" && initial != "bright")
    throw ConfigError("must be one of mixed, dark, bright", 0, "sim.initial");
  if (initial != "mixed" && !nv) throw ConfigError("dark/bright initial states need the [nv] model", 0, "sim.initial");
  if (readout) {
    try {
      readout->validate();
    } catch (const metachan::Error& e) {
      throw ConfigError(e.what(), 0, "readout");
    }
  }
  if (interleave) {
    const int d = dim();
    if (interleave->level_a < 0 || interleave->level_b < 0 || interleave->level_a >= d || interleave->level_b >= d ||
        interleave->level_a == interleave->level_b)
      throw ConfigError("levels must be two distinct basis indices", 0, "interleave.levels");
    if (interleave->every < 1) throw ConfigError("must be >= 1", 0, "interleave.every");
    check_finite(interleave->angle_deg, "interleave.angle");
  }
  const auto& a = analysis;
  if (a.window < 1) throw ConfigError("must be >= 1", 0, "analysis.window");
  if (a.k_max < 1 || a.k_max > 4) throw ConfigError("must lie in [1, 4]", 0, "analysis.k_max");
  if (a.hmm_states < 1 || a.hmm_states > 4) throw ConfigError("must lie in [1, 4]", 0, "analysis.hmm_states");
  if (a.hmm_trajectory < 0 || a.hmm_trajectory >= n_traj)
    throw ConfigError("must index a simulated trajectory", 0, "analysis.hmm_trajectory");
  if (!(a.rim_time_us > 0.0) || !std::isfinite(a.rim_time_us)) throw ConfigError("must be > 0", 0, "analysis.rim_time_us");
  for (long long x : a.histogram_at)
    if (x < a.window || x > m) throw ConfigError("points must lie in [window, m]", 0, "analysis.histogram_at");
  if (a.histogram_mode != "cumulative" && a.histogram_mode != "bin")
    throw ConfigError("must be cumulative or bin", 0, "analysis.histogram_mode");
  if (a.rate_threshold) check_finite(*a.rate_threshold, "analysis.rate_threshold");
  const auto check_param = [](const std::string& p, const std::string& key) {
    if (!p.empty() && p != "theta" && p != "tau" && p != "m") throw ConfigError("must be theta, tau or m", 0, key);
  };
  check_param(sweep.parameter, "sweep.parameter");
  check_param(sweep.parameter2, "sweep.parameter2");
  if (!sweep.parameter.empty() && sweep.values.empty()) throw ConfigError("needs values", 0, "sweep.values");
  if (!sweep.parameter2.empty() && sweep.values2.empty()) throw ConfigError("needs values", 0, "sweep.values2");
  if (!sweep.parameter2.empty() && sweep.parameter2 == sweep.parameter)
    throw ConfigError("must differ from sweep.parameter", 0, "sweep.parameter2");
  if (generic && (sweep.parameter == "theta" || sweep.parameter2 == "theta"))
    throw ConfigError("theta sweeps need the [nv] model", 0, "sweep.parameter");
  for (const auto* vals : {&sweep.values, &sweep.values2})
    for (double v : *vals) check_finite(v, "sweep values");
}

int RunConfig::dim() const { return generic ? static_cast<int>(generic->dim()) : 3; }

PureDephasingModel RunConfig::model() const { return generic ? *generic : nv::make_model(*nv); }

QuantumChannel RunConfig::channel() const { return rim_kraus(model()); }

SimConfig RunConfig::sim_config() const {
  SimConfig s;
  s.m = m;
  s.n_traj = n_traj;
  s.snapshot_stride = snapshot_stride;
  s.readout = readout;
  s.master_seed = seed;
  s.record = RecordMode::Binned;
  s.bin_window = analysis.window;
  s.store_states = store_states;
  if (initial == "dark") s.initial_state = nv::dark_state();
  if (initial == "bright") s.initial_state = nv::bright_state();
  if (interleave)
    s.interleave = Interleave{rf_rotation(dim(), interleave->level_a, interleave->level_b, interleave->angle_deg * kDeg),
                              interleave->every};
  return s;
}

std::vector<long long> RunConfig::histogram_points() const {
  if (!analysis.histogram_at.empty()) return analysis.histogram_at;
  if (m < analysis.window) return {};
  return {(m / analysis.window) * analysis.window};
}

RunConfig apply_toml(TomlDocument& doc, RunConfig c) {
  const bool has_nv = doc.has_table("nv");
  const bool has_generic = doc.has_table("generic");
  if (has_nv && has_generic) throw ConfigError("exactly one of [nv] or [generic] must be given");
  if (has_generic) {
    PureDephasingModel g;
    const int dim = static_cast<int>(doc.get_int("generic.dim", 0));
    g.B = matrix_from(doc, "generic.B", dim);
    g.C = matrix_from(doc, "generic.C", static_cast<int>(g.B.rows()));
    g.tau = doc.get_double("generic.tau", 1.0);
    g.delta_phi = doc.get_double("generic.delta_phi", 90.0) * kDeg;
    c.generic = g;
    c.nv.reset();
  }
  if (has_nv || c.nv) {
    nv::NVParams p = c.nv.value_or(nv::NVParams{});
    p.D = doc.get_double("nv.D", p.D);
    p.A_zz = doc.get_double("nv.A_zz", p.A_zz);
    p.A_perp = doc.get_double("nv.A_perp", p.A_perp);
    p.Q = doc.get_double("nv.Q", p.Q);
    p.gamma_e = doc.get_double("nv.gamma_e", p.gamma_e);
    p.gamma_n = doc.get_double("nv.gamma_n", p.gamma_n);
    p.B_mag = doc.get_double("nv.B_mag", p.B_mag);
    p.theta = doc.get_double("nv.theta", p.theta);
    p.phi_azimuth = doc.get_double("nv.phi_azimuth", p.phi_azimuth);
    p.tau = doc.get_double("nv.tau", p.tau * 1000.0) / 1000.0;
    p.delta_phi = doc.get_double("nv.delta_phi", p.delta_phi / kDeg) * kDeg;
    p.gamma_n_sign = static_cast<int>(doc.get_int("nv.gamma_n_sign", p.gamma_n_sign));
    if (doc.has("nv.probe_levels")) {
      const auto lv = doc.get_doubles("nv.probe_levels");
      if (lv.size() != 2) throw ConfigError("needs two levels", 0, "nv.probe_levels");
      p.probe_levels = {static_cast<int>(lv[0]), static_cast<int>(lv[1])};
    }
    c.nv = p;
    c.generic.reset();
  }

  c.m = doc.get_int("sim.m", c.m);
  c.n_traj = static_cast<int>(doc.get_int("sim.n_traj", c.n_traj));
  c.snapshot_stride = doc.get_int("sim.snapshot_stride", c.snapshot_stride);
  const long long seed = doc.get_int("sim.seed", static_cast<long long>(c.seed));
  if (seed < 0) throw ConfigError("must be >= 0", 0, "sim.seed");
  c.seed = static_cast<std::uint64_t>(seed);
  c.initial = doc.get_string("sim.initial", c.initial);
  c.store_states = doc.get_bool("sim.store_states", c.store_states);

  if (doc.has_table("readout")) {
    const bool enabled = doc.get_bool("readout.enabled", true);
    WeakReadout r = c.readout.value_or(WeakReadout{});
    r.n0 = doc.get_double("readout.n0", r.n0);
    r.n1 = doc.get_double("readout.n1", r.n1);
    r.max_photons = static_cast<int>(doc.get_int("readout.max_photons", r.max_photons));
    const std::string trunc =
        doc.get_string("readout.truncation", r.truncation == PhotonTruncation::Binary ? "binary" : "fold");
    if (trunc != "fold" && trunc != "binary") throw ConfigError("must be fold or binary", 0, "readout.truncation");
    r.truncation = trunc == "binary" ? PhotonTruncation::Binary : PhotonTruncation::FoldTail;
    c.readout = enabled ? std::optional<WeakReadout>(r) : std::nullopt;
  }

  if (doc.has_table("interleave")) {
    InterleaveSpec s = c.interleave.value_or(InterleaveSpec{});
    if (doc.has("interleave.levels")) {
      const auto lv = doc.get_doubles("interleave.levels");
      if (lv.size() != 2) throw ConfigError("needs two levels", 0, "interleave.levels");
      s.level_a = static_cast<int>(lv[0]);
      s.level_b = static_cast<int>(lv[1]);
    }
    s.angle_deg = doc.get_double("interleave.angle", s.angle_deg);
    s.every = doc.get_int("interleave.every", s.every);
    c.interleave = s;
  }

  auto& a = c.analysis;
  a.window = doc.get_int("analysis.window", a.window);
  a.k_max = static_cast<int>(doc.get_int("analysis.k_max", a.k_max));
  if (doc.has("analysis.histogram_at")) {
    a.histogram_at.clear();
    for (double x : doc.get_doubles("analysis.histogram_at")) a.histogram_at.push_back(std::llround(x));
  }
  a.histogram_mode = doc.get_string("analysis.histogram_mode", a.histogram_mode);
  a.hmm = doc.get_bool("analysis.hmm", a.hmm);
  a.hmm_states = static_cast<int>(doc.get_int("analysis.hmm_states", a.hmm_states));
  a.hmm_trajectory = static_cast<int>(doc.get_int("analysis.hmm_trajectory", a.hmm_trajectory));
  a.rim_time_us = doc.get_double("analysis.rim_time_us", a.rim_time_us);
  if (doc.has("analysis.rate_threshold")) a.rate_threshold = doc.get_double("analysis.rate_threshold", 0.0);
  a.f_min = doc.get_double("analysis.f_min", a.f_min);

  auto& s = c.sweep;
  s.parameter = doc.get_string("sweep.parameter", s.parameter);
  if (doc.has("sweep.values")) s.values = doc.get_doubles("sweep.values");
  s.parameter2 = doc.get_string("sweep.parameter2", s.parameter2);
  if (doc.has("sweep.values2")) s.values2 = doc.get_doubles("sweep.values2");
  s.simulate = doc.get_bool("sweep.simulate", s.simulate);

  c.output_dir = doc.get_string("output_dir", c.output_dir);
  doc.reject_unused();
  c.validate();
  return c;
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  auto doc = TomlDocument::parse(text);
  return apply_toml(doc, std::move(base));
}

RunConfig load_config(const std::string& path, RunConfig base) {
  auto doc = TomlDocument::parse_file(path);
  return apply_toml(doc, std::move(base));
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : presets()) n.push_back(k);
    return n;
  }();
  return names;
}

const std::string& preset_text(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

RunConfig preset(const std::string& name) { return parse_config(preset_text(name)); }

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  if (c.nv) {
    const auto& p = *c.nv;
    j["model"] = {{"kind", "nv"},
                  {"D", p.D},
                  {"A_zz", p.A_zz},
                  {"A_perp", p.A_perp},
                  {"Q", p.Q},
                  {"gamma_e", p.gamma_e},
                  {"gamma_n", p.gamma_n},
                  {"gamma_n_sign", p.gamma_n_sign},
                  {"B_mag", p.B_mag},
                  {"theta", p.theta},
                  {"phi_azimuth", p.phi_azimuth},
                  {"tau_ns", p.tau * 1000.0},
                  {"delta_phi_deg", p.delta_phi / kDeg},
                  {"probe_levels", {p.probe_levels[0], p.probe_levels[1]}}};
  } else {
    const auto& g = *c.generic;
    j["model"] = {{"kind", "generic"},
                  {"B", matrix_json(g.B)},
                  {"C", matrix_json(g.C)},
                  {"tau", g.tau},
                  {"delta_phi_deg", g.delta_phi / kDeg}};
  }
  j["sim"] = {{"m", c.m},
              {"n_traj", c.n_traj},
              {"snapshot_stride", c.sim_config().effective_stride()},
              {"seed", c.seed},
              {"initial", c.initial},
              {"store_states", c.store_states}};
  if (c.readout) {
    j["readout"] = {{"n0", c.readout->n0},
                    {"n1", c.readout->n1},
                    {"max_photons", c.readout->max_photons},
                    {"truncation", c.readout->truncation == PhotonTruncation::Binary ? "binary" : "fold"}};
  } else {
    j["readout"] = nullptr;
  }
  if (c.interleave) {
    j["interleave"] = {{"levels", {c.interleave->level_a, c.interleave->level_b}},
                       {"angle", c.interleave->angle_deg},
                       {"every", c.interleave->every}};
  } else {
    j["interleave"] = nullptr;
  }
  const auto& a = c.analysis;
  j["analysis"] = {{"window", a.window},
                   {"k_max", a.k_max},
                   {"histogram_at", c.histogram_points()},
                   {"histogram_mode", a.histogram_mode},
                   {"hmm", a.hmm},
                   {"hmm_states", a.hmm_states},
                   {"hmm_trajectory", a.hmm_trajectory},
                   {"rim_time_us", a.rim_time_us},
                   {"f_min", a.f_min}};
  j["analysis"]["rate_threshold"] = a.rate_threshold ? nlohmann::json(*a.rate_threshold) : nlohmann::json(nullptr);
  if (!c.sweep.parameter.empty()) {
    j["sweep"] = {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}, {"simulate", c.sweep.simulate}};
    if (!c.sweep.parameter2.empty()) {
      j["sweep"]["parameter2"] = c.sweep.parameter2;
      j["sweep"]["values2"] = c.sweep.values2;
    }
  }
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  // FNV-1a, 64 bit, over the canonical JSON text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(cfg).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace metachan::app
