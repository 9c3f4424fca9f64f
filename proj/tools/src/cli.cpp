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

#include "metachan/app/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "metachan/app/pipeline.hpp"

namespace metachan::app {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string preset;
  std::optional<long long> seed;
  std::string out;
  std::string input;
  bool dry_run = false;
  bool resume = false;
  std::string show_preset;
};

RunConfig build_config(const Options& o) {
  RunConfig cfg = o.preset.empty() ? RunConfig{} : preset(o.preset);
  if (!o.config.empty()) cfg = load_config(o.config, cfg);
  if (o.seed) {
    if (*o.seed < 0) throw ConfigError("--seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*o.seed);
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

void append_log(const fs::path& dir, const std::string& line) {
  std::ofstream log(dir / "run.log", std::ios::app);
  if (log) log << line << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_spectrum(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = build_config(o);
  const auto rep = compute_spectrum(cfg);
  out << spectrum_table(rep);
  if (o.dry_run) {
    err << "dry run: would write " << (fs::path(cfg.output_dir) / "spectrum.json").string() << "\n";
    return kExitOk;
  }
  const fs::path dir = cfg.output_dir;
  ensure_writable_dir(dir);
  const std::string hash = config_hash(cfg);
  nlohmann::json body = spectrum_json(rep);
  body["config"] = to_json(cfg);
  atomic_write(dir / "spectrum.json", dump_json(with_meta(body, hash)));
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = build_config(o);
  const fs::path dir = cfg.output_dir;
  const int threads = threads_from_env();
  if (o.dry_run) {
    out << "plan: " << cfg.n_traj << " trajectories x " << cfg.m << " measurements (d = " << cfg.dim() << ", "
        << (cfg.readout ? "photon-count readout" : "probe outcomes") << ")\n"
        << "      bins of " << cfg.analysis.window << ", snapshots every " << cfg.sim_config().effective_stride()
        << " steps, seed " << cfg.seed << ", " << threads << " threads\n"
        << "      outputs: traces.csv snapshots.csv" << (cfg.store_states && cfg.nv ? " ensemble.csv" : "")
        << " summary.json in " << dir.string() << "\n"
        << "      config hash " << config_hash(cfg) << "\n";
    return kExitOk;
  }
  ensure_writable_dir(dir);
  const auto t0 = std::chrono::steady_clock::now();
  RunContext ctx;
  ctx.threads = threads;
  ctx.log = [&](const std::string& m) { err << m << "\n"; };
  CheckpointOptions ck{dir / "checkpoint.jsonl", o.resume};
  const auto sim = simulate(cfg, ctx, ck);
  write_simulation(dir, cfg, sim);
  std::error_code ec;
  fs::remove(ck.path, ec);
  const double secs = seconds_since(t0);
  append_log(dir, "simulate config=" + config_hash(cfg) + " n_traj=" + std::to_string(cfg.n_traj) +
                      " m=" + std::to_string(cfg.m) + " threads=" + std::to_string(threads) +
                      " seconds=" + fmt_double(secs));
  out << "simulated " << sim.trajectories.size() << " trajectories";
  if (sim.reach_fraction) out << "; reach fraction " << fmt_double(*sim.reach_fraction);
  out << "\n";
  err << "runtime " << secs << " s\n";
  return kExitOk;
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = build_config(o);
  const fs::path dir = cfg.output_dir;
  const fs::path input = o.input.empty() ? dir / "traces.csv" : fs::path(o.input);
  const TraceTable traces = read_traces_csv(input);
  if (traces.window != cfg.analysis.window)
    err << "note: trace bins span " << traces.window << " measurements (config says " << cfg.analysis.window << ")\n";
  if (o.dry_run) {
    out << "plan: analyze " << traces.counts.size() << " trajectories from " << input.string() << "\n";
    return kExitOk;
  }
  ensure_writable_dir(dir);
  const auto t0 = std::chrono::steady_clock::now();
  const auto an = analyze(traces, cfg);
  write_analysis(dir, cfg, an);
  for (const auto& p : an.points) {
    out << "m=" << p.m << ": " << p.fit.k << (p.fit.k == 1 ? " peak" : " peaks");
    if (p.fidelity)
      out << ", threshold " << p.fidelity->threshold << ", fidelity " << fmt_double(p.fidelity->F);
    out << "\n";
  }
  if (an.hmm) out << "hmm: " << an.hmm->fit.model.k << " states, " << an.hmm->jumps.size() << " jumps\n";
  else if (!an.hmm_note.empty()) out << "hmm skipped: " << an.hmm_note << "\n";
  append_log(dir, "analyze config=" + config_hash(cfg) + " seconds=" + fmt_double(seconds_since(t0)));
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = build_config(o);
  if (cfg.sweep.parameter.empty()) throw ConfigError("sweep needs a [sweep] table with 'parameter' and 'values'");
  const fs::path dir = cfg.output_dir;
  if (o.dry_run) {
    const size_t n = cfg.sweep.values.size() * (cfg.sweep.parameter2.empty() ? 1 : cfg.sweep.values2.size());
    out << "plan: " << n << " sweep points over " << cfg.sweep.parameter
        << (cfg.sweep.parameter2.empty() ? "" : " x " + cfg.sweep.parameter2)
        << (cfg.sweep.simulate ? " with simulation" : " (spectrum only)") << "\n";
    return kExitOk;
  }
  ensure_writable_dir(dir);
  const auto t0 = std::chrono::steady_clock::now();
  RunContext ctx;
  ctx.threads = threads_from_env();
  ctx.log = [&](const std::string& m) { err << m << "\n"; };
  const auto rows = sweep(cfg, ctx);
  const std::string csv = sweep_csv(cfg, rows);
  atomic_write(dir / "sweep.csv", csv);
  out << csv;
  append_log(dir, "sweep config=" + config_hash(cfg) + " seconds=" + fmt_double(seconds_since(t0)));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Repeated-measurement channels: spectra, trajectories and trace analysis", "metachan"};
  app.set_version_flag("--version", tool_version());
  Options o;
  app.add_option("--config", o.config, "TOML run configuration");
  app.add_option("--preset", o.preset, "Built-in configuration the config file is layered on")
      ->check(CLI::IsMember(preset_names()));
  app.add_option("--seed", o.seed, "Master seed (overrides sim.seed)");
  app.add_option("--out", o.out, "Output directory (overrides output_dir)");
  app.add_flag("--dry-run", o.dry_run, "Print the plan without writing anything");
  app.add_flag("--resume", o.resume, "Continue a simulation from its checkpoint");
  app.fallthrough();
  app.require_subcommand(1, 1);

  auto* spectrum = app.add_subcommand("spectrum", "Channel spectrum, metastable window and extreme metastable states");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo trajectories under photon-count readout");
  auto* analyze_cmd = app.add_subcommand("analyze", "Histograms, Poisson mixtures, threshold fidelity and HMM fits");
  analyze_cmd->add_option("--input", o.input, "Trace CSV (default: <out>/traces.csv)");
  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep over theta, tau or m");
  auto* presets_cmd = app.add_subcommand("presets", "List built-in presets or print one");
  presets_cmd->add_option("--show", o.show_preset, "Preset to print as TOML");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*spectrum) return cmd_spectrum(o, out, err);
    if (*simulate_cmd) return cmd_simulate(o, out, err);
    if (*analyze_cmd) return cmd_analyze(o, out, err);
    if (*sweep_cmd) return cmd_sweep(o, out, err);
    if (*presets_cmd) {
      if (o.show_preset.empty()) {
        for (const auto& n : preset_names()) out << n << "\n";
      } else {
        out << preset_text(o.show_preset);
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CsvError& e) {
    err << "malformed CSV: " << e.what() << "\n";
    return kExitCsv;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return kExitOutput;
  } catch (const metachan::Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace metachan::app
