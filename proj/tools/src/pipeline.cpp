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

#include "metachan/app/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace metachan::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Row-major list of [re, im] pairs.
json matrix_pairs(const ComplexMatrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back({m(i, j).real(), m(i, j).imag()});
  return a;
}

std::vector<double> flat(const ComplexMatrix& m) {
  std::vector<double> v;
  v.reserve(static_cast<size_t>(2 * m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      v.push_back(m(i, j).real());
      v.push_back(m(i, j).imag());
    }
  return v;
}

ComplexMatrix unflat(const json& j, int d) {
  if (!j.is_array() || j.size() != static_cast<size_t>(2 * d * d)) throw std::runtime_error("bad state");
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const size_t at = static_cast<size_t>(2 * (i * d + k));
      m(i, k) = cplx(j[at].get<double>(), j[at + 1].get<double>());
    }
  return m;
}

json window_json(const std::optional<MetastableWindow>& w) {
  if (!w) return nullptr;
  return {{"m_lo", w->m_lo}, {"m_hi", w->m_hi}, {"m_lo_approx", w->m_lo_approx}, {"m_hi_approx", w->m_hi_approx},
          {"q", w->q}};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

json fidelity_json(const std::optional<ThresholdFidelity>& f) {
  if (!f) return nullptr;
  return {{"threshold", f->threshold}, {"F", f->F}, {"F_dark", f->F_dark}, {"F_bright", f->F_bright}};
}

json mixture_json(const PoissonMixture& m) {
  json w = json::array(), mu = json::array();
  for (const auto& c : m.components) {
    w.push_back(c.weight);
    mu.push_back(c.mean);
  }
  return {{"k", m.components.size()}, {"weights", w}, {"means", mu}};
}

// ---- checkpoints: one JSON document per line ----

json trajectory_json(const Trajectory& t) {
  json snaps = json::array();
  for (const auto& s : t.snapshots) {
    json row = {s.step, s.F_D, s.F_B, s.cumulative_photons};
    if (s.state.size() > 0) row.push_back(flat(s.state));
    snaps.push_back(row);
  }
  return {{"index", t.index},         {"seed", t.seed},
          {"bins", t.bins},           {"snapshots", snaps},
          {"log_weight", t.log_weight}, {"total_photons", t.total_photons},
          {"final", flat(t.final_state)}};
}

Trajectory trajectory_from(const json& j, int d) {
  Trajectory t;
  t.index = j.at("index").get<int>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.bins = j.at("bins").get<std::vector<std::int64_t>>();
  for (const auto& row : j.at("snapshots")) {
    Snapshot s;
    s.step = row.at(0).get<long long>();
    s.F_D = row.at(1).get<double>();
    s.F_B = row.at(2).get<double>();
    s.cumulative_photons = row.at(3).get<long long>();
    if (row.size() > 4) s.state = unflat(row.at(4), d);
    t.snapshots.push_back(std::move(s));
  }
  t.log_weight = j.at("log_weight").get<double>();
  t.total_photons = j.at("total_photons").get<long long>();
  t.final_state = unflat(j.at("final"), d);
  return t;
}

// Returns the valid prefix of an existing checkpoint, or nothing when the
// file is absent.
std::vector<Trajectory> read_checkpoint(const fs::path& path, const std::string& hash, int n_traj, int d) {
  std::vector<Trajectory> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  if (!std::getline(in, line)) return done;
  json head = json::parse(line, nullptr, false);
  if (head.is_discarded() || !head.contains("config_hash")) throw ConfigError("checkpoint header is unreadable");
  if (head["config_hash"] != hash) throw ConfigError("checkpoint was written for a different configuration");
  while (std::getline(in, line)) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) break;  // torn final line
    try {
      Trajectory t = trajectory_from(j, d);
      if (t.index < 0 || t.index >= n_traj) break;
      done.push_back(std::move(t));
    } catch (const std::exception&) {
      break;
    }
  }
  return done;
}

}  // namespace

int threads_from_env() {
  if (const char* env = std::getenv("METACHAN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 1024));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// ---------------------------------------------------------------- spectrum

SpectrumReport compute_spectrum(const RunConfig& cfg) {
  SpectrumReport r;
  const QuantumChannel ch = cfg.channel();
  r.spectrum = decompose(ch);
  r.stationary = stationary_states(r.spectrum);
  if (r.spectrum.num_metastable > 0) {
    r.window = metastable_window(r.spectrum);
    if (r.spectrum.q >= 2 && r.spectrum.num_fixed == 1) r.window_1d = metastable_window(r.spectrum, 2);
  }
  if (r.spectrum.num_fixed == 1 && r.spectrum.num_metastable >= 1) {
    const auto [up, lo] = ems_1d(r.spectrum);
    r.ems = {up, lo};
    for (const auto& e : r.ems)
      r.ems_rate.push_back(cfg.readout ? expected_photon_rate(ch, *cfg.readout, e.matrix)
                                       : fixed_point_frequency(ch, e.matrix));
    r.dark_ems = r.ems_rate[0] <= r.ems_rate[1] ? 0 : 1;
  } else if (r.spectrum.num_fixed != 1) {
    r.note = "extreme metastable states need a unique fixed point";
  } else {
    r.note = "no metastable points";
  }
  return r;
}

std::string class_summary(const ChannelSpectrum& s) {
  std::string out = std::to_string(s.num_fixed) + " fixed, ";
  if (s.num_rotating > 0) out += std::to_string(s.num_rotating) + " rotating, ";
  out += std::to_string(s.num_metastable) + " metastable, " + std::to_string(s.num_decaying) + " decaying";
  return out;
}

std::string spectrum_table(const SpectrumReport& r) {
  std::ostringstream os;
  const auto& s = r.spectrum;
  os << "  #  |lambda|          arg(lambda)   class        1/|ln|lambda||\n";
  for (size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    const double mod = std::abs(p.value);
    const double steps = mod >= 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / std::abs(std::log(mod));
    char buf[160];
    std::snprintf(buf, sizeof buf, "%3zu  %.12f  %+11.6f   %-11s  %.6g\n", i + 1, mod, std::arg(p.value),
                  to_string(p.cls), steps);
    os << buf;
  }
  os << "classes: " << class_summary(s) << "\n";
  if (r.window)
    os << "metastable window (q = " << r.window->q << "): [" << fmt("%.6g", r.window->m_lo) << ", "
       << fmt("%.6g", r.window->m_hi) << "] measurements\n";
  if (r.window_1d)
    os << "slowest-point window: [" << fmt("%.6g", r.window_1d->m_lo) << ", " << fmt("%.6g", r.window_1d->m_hi)
       << "] measurements\n";
  for (size_t i = 0; i < r.ems.size(); ++i) {
    const auto& m = r.ems[i].matrix;
    os << "EMS " << r.ems[i].label << ": diag (";
    for (Eigen::Index k = 0; k < m.rows(); ++k) os << (k ? ", " : "") << fmt("%.4f", m(k, k).real());
    os << "), rate " << fmt("%.5f", r.ems_rate[i]) << " per measurement ("
       << (static_cast<int>(i) == r.dark_ems ? "dark" : "bright") << ")\n";
  }
  if (!r.note.empty()) os << "note: " << r.note << "\n";
  return os.str();
}

json spectrum_json(const SpectrumReport& r) {
  const auto& s = r.spectrum;
  json eig = json::array();
  for (size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    const double mod = std::abs(p.value);
    eig.push_back({{"index", i + 1},
                   {"re", p.value.real()},
                   {"im", p.value.imag()},
                   {"abs", mod},
                   {"class", to_string(p.cls)},
                   {"relaxation_steps", mod >= 1.0 ? json(nullptr) : json(1.0 / std::abs(std::log(mod)))}});
  }
  json ems = json::array();
  for (size_t i = 0; i < r.ems.size(); ++i)
    ems.push_back({{"label", r.ems[i].label},
                   {"role", static_cast<int>(i) == r.dark_ems ? "dark" : "bright"},
                   {"rate", r.ems_rate[i]},
                   {"matrix", matrix_pairs(r.ems[i].matrix)}});
  json st = json::array();
  for (const auto& m : r.stationary) st.push_back(matrix_pairs(m));
  return {{"dimension", s.dim()},
          {"summary", class_summary(s)},
          {"counts",
           {{"fixed", s.num_fixed},
            {"rotating", s.num_rotating},
            {"metastable", s.num_metastable},
            {"decaying", s.num_decaying}}},
          {"q", s.q},
          {"eigenvalues", eig},
          {"window", window_json(r.window)},
          {"window_1d", window_json(r.window_1d)},
          {"stationary_states", st},
          {"ems", ems},
          {"note", r.note}};
}

double rate_threshold(const RunConfig& cfg, const SpectrumReport* report) {
  if (cfg.analysis.rate_threshold) return *cfg.analysis.rate_threshold;
  if (report && report->ems_rate.size() == 2) return 0.5 * (report->ems_rate[0] + report->ems_rate[1]);
  if (cfg.readout) return 0.5 * (cfg.readout->n0 + cfg.readout->n1);
  return 0.5;
}

// ---------------------------------------------------------------- simulate

SimulationOutput simulate(const RunConfig& cfg, const RunContext& ctx, const CheckpointOptions& ckpt) {
  cfg.validate();
  const QuantumChannel ch = cfg.channel();
  const TrajectorySimulator sim(ch, cfg.sim_config());
  const std::string hash = config_hash(cfg);
  const int n = cfg.n_traj;
  const int d = cfg.dim();
  const int threads = ctx.threads > 0 ? ctx.threads : threads_from_env();

  std::vector<std::optional<Trajectory>> slots(static_cast<size_t>(n));
  std::ofstream ck;
  if (!ckpt.path.empty()) {
    std::vector<Trajectory> done;
    if (ckpt.resume) done = read_checkpoint(ckpt.path, hash, n, d);
    ck.open(ckpt.path, std::ios::trunc);
    if (!ck) throw OutputError("cannot write checkpoint '" + ckpt.path.string() + "'");
    ck << json{{"config_hash", hash}, {"n_traj", n}}.dump() << "\n";
    for (auto& t : done) {
      ck << trajectory_json(t).dump() << "\n";
      const int idx = t.index;
      slots[static_cast<size_t>(idx)] = std::move(t);
    }
    ck.flush();
    if (!done.empty()) ctx.note("resuming: " + std::to_string(done.size()) + " trajectories restored");
  }

  std::vector<int> todo;
  for (int i = 0; i < n; ++i)
    if (!slots[static_cast<size_t>(i)]) todo.push_back(i);
  const size_t chunk = static_cast<size_t>(std::max(8, 4 * threads));
  size_t finished = static_cast<size_t>(n) - todo.size();
  for (size_t at = 0; at < todo.size(); at += chunk) {
    const std::vector<int> part(todo.begin() + static_cast<std::ptrdiff_t>(at),
                                todo.begin() + static_cast<std::ptrdiff_t>(std::min(todo.size(), at + chunk)));
    auto res = sim.run_indices(part, threads);
    for (auto& t : res) {
      if (ck.is_open()) ck << trajectory_json(t).dump() << "\n";
      const int idx = t.index;
      slots[static_cast<size_t>(idx)] = std::move(t);
    }
    if (ck.is_open()) ck.flush();
    finished += part.size();
    ctx.note("simulated " + std::to_string(finished) + "/" + std::to_string(n) + " trajectories");
  }

  SimulationOutput out;
  out.trajectories.reserve(static_cast<size_t>(n));
  for (auto& s : slots) out.trajectories.push_back(std::move(*s));

  std::optional<SpectrumReport> rep;
  try {
    rep = compute_spectrum(cfg);
  } catch (const metachan::Error& e) {
    ctx.note(std::string("spectrum unavailable: ") + e.what());
  }
  out.rate_threshold = rate_threshold(cfg, rep ? &*rep : nullptr);
  if (rep) out.window_1d = rep->window_1d;
  if (cfg.store_states && cfg.nv)
    out.ensemble = ensemble_fidelity(out.trajectories, nv::dark_state(), nv::bright_state(), out.rate_threshold);
  if (out.window_1d && cfg.nv)
    out.reach_fraction = reach_fraction(out.trajectories, out.window_1d->m_lo, out.window_1d->m_hi, cfg.analysis.f_min);
  return out;
}

TraceTable to_trace_table(const SimulationOutput& out, const RunConfig& cfg) {
  TraceTable t;
  t.window = cfg.analysis.window;
  t.config_hash = config_hash(cfg);
  for (const auto& tr : out.trajectories) t.counts[tr.index] = tr.bins;
  return t;
}

void write_simulation(const fs::path& dir, const RunConfig& cfg, const SimulationOutput& out) {
  const std::string hash = config_hash(cfg);
  const long long w = cfg.analysis.window;

  std::string traces = csv_header(hash, "trajectory_id,step,photons");
  std::string snaps = csv_header(hash, "trajectory_id,step,F_D,F_B,cumulative_photons");
  for (const auto& t : out.trajectories) {
    const std::string id = std::to_string(t.index) + ",";
    for (size_t b = 0; b < t.bins.size(); ++b)
      traces += id + std::to_string(static_cast<long long>(b + 1) * w) + "," + std::to_string(t.bins[b]) + "\n";
    for (const auto& s : t.snapshots)
      snaps += id + std::to_string(s.step) + "," + fmt_double(s.F_D) + "," + fmt_double(s.F_B) + "," +
               std::to_string(s.cumulative_photons) + "\n";
  }

  json seeds = json::array();
  double photons = 0.0;
  for (const auto& t : out.trajectories) {
    seeds.push_back(t.seed);
    photons += static_cast<double>(t.total_photons);
  }
  json summary = {{"config", to_json(cfg)},
                  {"seeds", {{"master", cfg.seed}, {"trajectories", seeds}}},
                  {"n_traj", out.trajectories.size()},
                  {"mean_photons_per_measurement",
                   cfg.m > 0 ? photons / (static_cast<double>(cfg.m) * static_cast<double>(out.trajectories.size()))
                             : 0.0},
                  {"rate_threshold", out.rate_threshold},
                  {"window_1d", window_json(out.window_1d)},
                  {"f_min", cfg.analysis.f_min},
                  {"reach_fraction", opt(out.reach_fraction)}};

  atomic_write(dir / "traces.csv", traces);
  atomic_write(dir / "snapshots.csv", snaps);
  if (!out.ensemble.empty()) {
    std::string ens =
        csv_header(hash, "step,F_D_mean,F_B_mean,mean_max_F,F_D_class,F_B_class,combined_class,frac_dark");
    for (const auto& e : out.ensemble)
      ens += std::to_string(e.step) + "," + fmt_double(e.F_D_mean) + "," + fmt_double(e.F_B_mean) + "," +
             fmt_double(e.mean_max_F) + "," + fmt_double(e.F_D_class) + "," + fmt_double(e.F_B_class) + "," +
             fmt_double(e.combined_class) + "," + fmt_double(e.frac_dark) + "\n";
    atomic_write(dir / "ensemble.csv", ens);
  }
  atomic_write(dir / "summary.json", dump_json(with_meta(summary, hash)));
}

// ---------------------------------------------------------------- analyze

AnalysisOutput analyze(const TraceTable& traces, const RunConfig& cfg) {
  AnalysisOutput out;
  out.window = traces.window;
  out.input_hash = traces.config_hash;
  if (traces.window < 1) throw CsvError("trace table has no bin window");

  size_t longest = 0;
  for (const auto& [id, c] : traces.counts) longest = std::max(longest, c.size());
  std::vector<long long> at = cfg.analysis.histogram_at;
  if (at.empty() && longest > 0) at.push_back(static_cast<long long>(longest) * traces.window);

  for (long long m : at) {
    HistogramPoint p;
    p.m = m;
    p.bin = m / traces.window - 1;
    if (p.bin < 0) throw ConfigError("histogram point " + std::to_string(m) + " is shorter than one bin");
    std::vector<std::int64_t> samples;
    const bool cumulative = cfg.analysis.histogram_mode == "cumulative";
    for (const auto& [id, c] : traces.counts) {
      if (static_cast<long long>(c.size()) <= p.bin) continue;
      const auto end = c.begin() + p.bin + 1;
      samples.push_back(cumulative ? std::accumulate(c.begin(), end, std::int64_t{0}) : *(end - 1));
    }
    if (samples.empty()) throw ConfigError("histogram point " + std::to_string(m) + " lies beyond the traces");
    p.histogram = make_histogram(samples);
    p.fit = fit_mixture(p.histogram, cfg.analysis.k_max);
    if (p.fit.k >= 2) p.fidelity = optimal_threshold(p.fit.best);
    out.points.push_back(std::move(p));
  }

  if (cfg.analysis.hmm) {
    const auto it = traces.counts.find(cfg.analysis.hmm_trajectory);
    const int k = cfg.analysis.hmm_states;
    if (it == traces.counts.end()) {
      out.hmm_note = "trajectory " + std::to_string(cfg.analysis.hmm_trajectory) + " is not in the trace file";
    } else if (it->second.size() < static_cast<size_t>(10 * k)) {
      out.hmm_note = "trace too short for a " + std::to_string(k) + "-state fit (" + std::to_string(it->second.size()) +
                     " bins, need " + std::to_string(10 * k) + ")";
    } else {
      HmmOutput h;
      h.trajectory = it->first;
      h.fit = baum_welch(it->second, k);
      h.path = viterbi(h.fit.model, it->second);
      h.jumps = jumps(h.path);
      h.dwell = dwell_times(h.path, h.fit.model, cfg.analysis.rim_time_us * 1e-6, traces.window);
      h.classes = merge_states(h.fit.model, h.path);
      out.hmm = std::move(h);
    }
  }
  return out;
}

void write_analysis(const fs::path& dir, const RunConfig& cfg, const AnalysisOutput& out) {
  const std::string hash = config_hash(cfg);
  std::string hist = csv_header(hash, "m,count,frequency");
  json points = json::array();
  for (const auto& p : out.points) {
    const double total = p.histogram.total();
    json counts = json::array();
    for (size_t i = 0; i < p.histogram.values.size(); ++i) {
      hist += std::to_string(p.m) + "," + std::to_string(p.histogram.values[i]) + "," +
              fmt_double(p.histogram.weights[i] / total) + "\n";
      counts.push_back(p.histogram.weights[i]);
    }
    json fits = json::array();
    for (const auto& f : p.fit.fits) fits.push_back(mixture_json(f));
    json mix = mixture_json(p.fit.best);
    mix["bic"] = p.fit.bic;
    mix["log_likelihood"] = p.fit.log_likelihood;
    mix["iterations"] = p.fit.iterations;
    mix["converged"] = p.fit.converged;
    mix["fits"] = fits;
    points.push_back({{"m", p.m},
                      {"bin", p.bin},
                      {"samples", total},
                      {"histogram", {{"values", p.histogram.values}, {"counts", counts}}},
                      {"mixture", mix},
                      {"peak_count", p.fit.k},
                      {"fidelity", fidelity_json(p.fidelity)}});
  }

  json analysis = {{"input_config_hash", out.input_hash},
                   {"window", out.window},
                   {"histogram_mode", cfg.analysis.histogram_mode},
                   {"points", points},
                   {"hmm_note", out.hmm_note}};

  if (out.hmm) {
    const auto& h = *out.hmm;
    json trans = json::array();
    for (Eigen::Index i = 0; i < h.fit.model.trans.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < h.fit.model.trans.cols(); ++j) row.push_back(h.fit.model.trans(i, j));
      trans.push_back(row);
    }
    json init = json::array();
    for (Eigen::Index i = 0; i < h.fit.model.init.size(); ++i) init.push_back(h.fit.model.init(i));
    json classes = json::array();
    for (const auto& c : h.classes)
      classes.push_back({{"members", c.members}, {"rate", c.rate}, {"occupancy", c.occupancy}});
    json model = {{"trajectory", h.trajectory},
                  {"k", h.fit.model.k},
                  {"rates", h.fit.model.rates},
                  {"transition", trans},
                  {"initial", init},
                  {"log_likelihood", h.fit.log_likelihood},
                  {"iterations", h.fit.iterations},
                  {"converged", h.fit.converged},
                  {"monotone", h.fit.monotone},
                  {"classes", classes},
                  {"jumps", h.jumps.size()}};
    analysis["hmm"] = model;

    json dwell = json::array();
    for (const auto& d : h.dwell)
      dwell.push_back({{"state", d.state},
                       {"visited", d.visited},
                       {"segments", d.segments},
                       {"empirical_mean_s", d.empirical_mean},
                       {"implied_s", std::isinf(d.implied) ? json(nullptr) : json(d.implied)},
                       {"absorbing", d.absorbing}});

    std::string path = csv_header(hash, "bin,step,state");
    for (size_t b = 0; b < h.path.size(); ++b)
      path += std::to_string(b) + "," + std::to_string(static_cast<long long>(b + 1) * out.window) + "," +
              std::to_string(h.path[b]) + "\n";
    std::string jumps_csv = csv_header(hash, "bin,step,from,to");
    for (const auto& j : h.jumps)
      jumps_csv += std::to_string(j.bin) + "," + std::to_string(static_cast<long long>(j.bin) * out.window) + "," +
                   std::to_string(j.from) + "," + std::to_string(j.to) + "\n";

    atomic_write(dir / "hmm_model.json", dump_json(with_meta(model, hash)));
    atomic_write(dir / "hmm_path.csv", path);
    atomic_write(dir / "jumps.csv", jumps_csv);
    atomic_write(dir / "dwell.json",
                 dump_json(with_meta({{"rim_time_us", cfg.analysis.rim_time_us}, {"window", out.window}, {"states", dwell}},
                                     hash)));
  } else {
    analysis["hmm"] = nullptr;
  }
  atomic_write(dir / "histograms.csv", hist);
  atomic_write(dir / "analysis.json", dump_json(with_meta(analysis, hash)));
}

// ---------------------------------------------------------------- sweep

RunConfig sweep_point(const RunConfig& cfg, const std::string& parameter, double value) {
  RunConfig c = cfg;
  if (parameter == "theta") {
    if (!c.nv) throw ConfigError("theta sweeps need the [nv] model", 0, "sweep.parameter");
    c.nv->theta = value;
  } else if (parameter == "tau") {
    if (c.nv) c.nv->tau = value / 1000.0;
    else c.generic->tau = value;
  } else if (parameter == "m") {
    c.m = std::llround(value);
    const long long w = c.analysis.window;
    c.analysis.histogram_at = c.m >= w ? std::vector<long long>{(c.m / w) * w} : std::vector<long long>{};
  } else if (!parameter.empty()) {
    throw ConfigError("must be theta, tau or m", 0, "sweep.parameter");
  }
  c.sweep = SweepSpec{};
  c.validate();
  return c;
}

std::vector<SweepRow> sweep(const RunConfig& cfg, const RunContext& ctx) {
  if (cfg.sweep.parameter.empty()) throw ConfigError("no sweep parameter given", 0, "sweep.parameter");
  struct Point {
    double v1;
    std::optional<double> v2;
  };
  std::vector<Point> pts;
  for (double a : cfg.sweep.values) {
    if (cfg.sweep.parameter2.empty()) pts.push_back({a, std::nullopt});
    else
      for (double b : cfg.sweep.values2) pts.push_back({a, b});
  }
  // Validate every point before any work starts.
  std::vector<RunConfig> cfgs;
  for (const auto& p : pts) {
    RunConfig c = sweep_point(cfg, cfg.sweep.parameter, p.v1);
    if (p.v2) c = sweep_point(c, cfg.sweep.parameter2, *p.v2);
    c.analysis.hmm = false;
    cfgs.push_back(std::move(c));
  }

  const int threads = ctx.threads > 0 ? ctx.threads : threads_from_env();
  const int outer = std::max(1, std::min<int>(threads, static_cast<int>(pts.size())));
  RunContext inner;
  inner.threads = std::max(1, threads / outer);

  std::vector<SweepRow> rows(pts.size());
  parallel_for(static_cast<int>(pts.size()), outer, [&](int i) {
    const RunConfig& c = cfgs[static_cast<size_t>(i)];
    SweepRow& row = rows[static_cast<size_t>(i)];
    row.value = pts[static_cast<size_t>(i)].v1;
    row.value2 = pts[static_cast<size_t>(i)].v2;
    const SpectrumReport rep = compute_spectrum(c);
    row.num_fixed = rep.spectrum.num_fixed;
    row.num_rotating = rep.spectrum.num_rotating;
    row.num_metastable = rep.spectrum.num_metastable;
    row.num_decaying = rep.spectrum.num_decaying;
    row.window = rep.window;
    row.window_1d = rep.window_1d;
    if (cfg.sweep.simulate) {
      const auto sim = simulate(c, inner);
      const auto an = analyze(to_trace_table(sim, c), c);
      if (!an.points.empty()) {
        row.at_m = an.points.back().m;
        row.peak_k = an.points.back().fit.k;
        row.fidelity = an.points.back().fidelity;
      }
    }
  });
  for (const auto& r : rows) {
    std::string msg = "sweep point " + cfg.sweep.parameter + "=" + fmt_double(r.value);
    if (r.value2) msg += ", " + cfg.sweep.parameter2 + "=" + fmt_double(*r.value2);
    ctx.note(msg + " done");
  }
  return rows;
}

std::string sweep_csv(const RunConfig& cfg, const std::vector<SweepRow>& rows) {
  std::string cols = cfg.sweep.parameter;
  if (!cfg.sweep.parameter2.empty()) cols += "," + cfg.sweep.parameter2;
  cols +=
      ",num_fixed,num_rotating,num_metastable,num_decaying,window_lo,window_hi,window1d_lo,window1d_hi,at_m,peak_k,"
      "threshold,fidelity";
  std::string out = csv_header(config_hash(cfg), cols);
  const auto o = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
  for (const auto& r : rows) {
    out += fmt_double(r.value);
    if (!cfg.sweep.parameter2.empty()) out += "," + o(r.value2);
    out += "," + std::to_string(r.num_fixed) + "," + std::to_string(r.num_rotating) + "," +
           std::to_string(r.num_metastable) + "," + std::to_string(r.num_decaying);
    out += "," + (r.window ? fmt_double(r.window->m_lo) : "") + "," + (r.window ? fmt_double(r.window->m_hi) : "");
    out += "," + (r.window_1d ? fmt_double(r.window_1d->m_lo) : "") + "," +
           (r.window_1d ? fmt_double(r.window_1d->m_hi) : "");
    out += "," + (r.peak_k ? std::to_string(r.at_m) : std::string()) + "," +
           (r.peak_k ? std::to_string(*r.peak_k) : std::string());
    out += "," + (r.fidelity ? std::to_string(r.fidelity->threshold) : std::string()) + "," +
           (r.fidelity ? fmt_double(r.fidelity->F) : std::string());
    out += "\n";
  }
  return out;
}

}  // namespace metachan::app
