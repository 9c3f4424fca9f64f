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

#include "metachan/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "metachan/nv_model.hpp"

namespace metachan {

long long SimConfig::effective_stride() const {
  if (snapshot_stride > 0) return snapshot_stride;
  return std::max<long long>(1, m / 200);
}

namespace {

double pure_or_general_fidelity(const ComplexMatrix& rho, const ComplexMatrix& ref) {
  if (ref.size() == 0) return 0.0;
  return fidelity(rho, ref);
}

// Fixed-size inner loop; D = Eigen::Dynamic handles any other dimension.
struct Kernel {
  virtual ~Kernel() = default;
  virtual std::pair<int, double> step(ComplexMatrix& rho, SplitMix64& rng) const = 0;
  virtual void run(const SimConfig& cfg, const ComplexMatrix& rho0, Trajectory& out) const = 0;
};

template <int D>
class KernelImpl final : public Kernel {
 public:
  using Mat = Eigen::Matrix<cplx, D, D>;

  explicit KernelImpl(const QuantumChannel& inst) : w_(inst.weights()) {
    for (const auto& m : inst.operators()) {
      ops_.push_back(m);
      dag_.push_back(m.adjoint());
      // Tr(M^dagger M rho) = sum_ij (M^dagger M)^T_ij rho_ij.
      eff_t_.push_back((m.adjoint() * m).transpose());
    }
    q_.resize(ops_.size());
    p_.resize(static_cast<size_t>(w_.rows()));
  }

  std::pair<int, double> step_fixed(Mat& rho, SplitMix64& rng, Mat& acc, Mat& tmp) const {
    const size_t nk = ops_.size();
    for (size_t k = 0; k < nk; ++k) q_[k] = eff_t_[k].cwiseProduct(rho).sum().real();
    const Eigen::Index nout = w_.rows();
    double total = 0.0;
    for (Eigen::Index j = 0; j < nout; ++j) {
      double pj = 0.0;
      for (size_t k = 0; k < nk; ++k) pj += w_(j, static_cast<Eigen::Index>(k)) * q_[k];
      p_[j] = pj;
      total += pj;
    }
    if (std::abs(total - 1.0) > 1e-8) {
      std::ostringstream os;
      os << "trajectory step: outcome probabilities sum to " << total;
      throw NumericalError(os.str());
    }
    const double u = rng.uniform() * total;
    Eigen::Index n = -1;
    double cum = 0.0;
    for (Eigen::Index j = 0; j < nout; ++j) {
      cum += p_[j];
      if (u < cum && p_[j] > 0.0) {
        n = j;
        break;
      }
    }
    if (n < 0) {
      for (n = nout - 1; n > 0 && p_[n] <= 0.0; --n) {
      }
    }
    const double pn = p_[n];
    acc.setZero();
    for (size_t k = 0; k < nk; ++k) {
      const double w = w_(n, static_cast<Eigen::Index>(k));
      if (w == 0.0) continue;
      tmp.noalias() = ops_[k] * rho;
      acc.noalias() += w * (tmp * dag_[k]);
    }
    rho = acc / pn;
    return {static_cast<int>(n), pn};
  }

  std::pair<int, double> step(ComplexMatrix& rho, SplitMix64& rng) const override {
    Mat r = rho, acc = rho, tmp = rho;
    auto res = step_fixed(r, rng, acc, tmp);
    rho = r;
    return res;
  }

  void run(const SimConfig& cfg, const ComplexMatrix& rho0, Trajectory& out) const override {
    SplitMix64 rng(out.seed);
    Mat rho = rho0, acc = rho0, tmp = rho0;
    Mat v, vdag;
    const bool inter = cfg.interleave.has_value();
    if (inter) {
      v = cfg.interleave->unitary;
      vdag = v.adjoint();
    }
    const long long stride = cfg.effective_stride();
    const bool full = cfg.record == RecordMode::Full;
    if (full) out.outcomes.reserve(static_cast<size_t>(cfg.m));
    else out.bins.reserve(static_cast<size_t>(cfg.m / std::max<long long>(1, cfg.bin_window)));

    long long photons = 0;
    std::int64_t bin_acc = 0;
    double logw = 0.0;
    auto snapshot = [&](long long s) {
      Snapshot snap;
      snap.step = s;
      snap.cumulative_photons = photons;
      const ComplexMatrix dyn = hermitize(ComplexMatrix(rho));
      snap.F_D = pure_or_general_fidelity(dyn, cfg.dark_ref);
      snap.F_B = pure_or_general_fidelity(dyn, cfg.bright_ref);
      if (cfg.store_states) snap.state = dyn;
      out.snapshots.push_back(std::move(snap));
    };

    snapshot(0);
    for (long long s = 1; s <= cfg.m; ++s) {
      const auto [n, pn] = step_fixed(rho, rng, acc, tmp);
      logw += std::log(pn);
      photons += n;
      if (full) {
        out.outcomes.push_back(static_cast<std::uint8_t>(n));
      } else {
        bin_acc += n;
        if (s % cfg.bin_window == 0) {
          out.bins.push_back(bin_acc);
          bin_acc = 0;
        }
      }
      if (inter && s % cfg.interleave->every_k == 0) {
        tmp.noalias() = v * rho;
        rho.noalias() = tmp * vdag;
      }
      if (s % stride == 0 || s == cfg.m) snapshot(s);
    }
    out.log_weight = logw;
    out.total_photons = photons;
    out.final_state = hermitize(ComplexMatrix(rho));
  }

 private:
  std::vector<Mat> ops_, dag_, eff_t_;
  Eigen::MatrixXd w_;
  mutable std::vector<double> q_, p_;
};

// Kernels carry scratch buffers, so every run builds its own.
Kernel* make_kernel(const QuantumChannel& inst) {
  switch (inst.dim()) {
    case 2: return new KernelImpl<2>(inst);
    case 3: return new KernelImpl<3>(inst);
    case 4: return new KernelImpl<4>(inst);
    default: return new KernelImpl<Eigen::Dynamic>(inst);
  }
}

}  // namespace

TrajectorySimulator::TrajectorySimulator(const QuantumChannel& probe_channel, SimConfig cfg)
    : cfg_(std::move(cfg)),
      instrument_(cfg_.readout ? weak_kraus(probe_channel, *cfg_.readout) : probe_channel) {
  const int d = instrument_.dim();
  if (cfg_.m < 0) throw Error("simulation: m must be >= 0");
  if (cfg_.n_traj < 1) throw Error("simulation: n_traj must be >= 1");
  if (cfg_.bin_window < 1) throw Error("simulation: bin_window must be >= 1");
  if (cfg_.initial_state.size() == 0) {
    rho0_ = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  } else {
    if (cfg_.initial_state.rows() != d) throw DimensionError("simulation: initial state dimension mismatch");
    validate_state(cfg_.initial_state);
    rho0_ = cfg_.initial_state;
  }
  if (cfg_.dark_ref.size() == 0 && cfg_.bright_ref.size() == 0 && d == 3) {
    cfg_.dark_ref = nv::dark_state();
    cfg_.bright_ref = nv::bright_state();
  }
  if (cfg_.interleave) {
    const auto& v = cfg_.interleave->unitary;
    if (v.rows() != d || v.cols() != d) throw DimensionError("interleave: unitary dimension mismatch");
    if (max_abs(v.adjoint() * v - ComplexMatrix::Identity(d, d)) > 1e-10) {
      throw NumericalError("interleave: injected operator is not unitary");
    }
    if (cfg_.interleave->every_k < 1) throw Error("interleave: every_k must be >= 1");
  }
  const double err = instrument_.cptp_error();
  if (err > kCptpTolerance) throw NumericalError("simulation: instrument is not trace preserving");
}

TrajectorySimulator::~TrajectorySimulator() = default;

std::pair<int, double> TrajectorySimulator::step(ComplexMatrix& rho, SplitMix64& rng) const {
  std::unique_ptr<Kernel> k(make_kernel(instrument_));
  return k->step(rho, rng);
}

Trajectory TrajectorySimulator::run(int index) const {
  Trajectory t;
  t.index = index;
  t.seed = SplitMix64::stream_seed(cfg_.master_seed, static_cast<std::uint64_t>(index));
  std::unique_ptr<Kernel> k(make_kernel(instrument_));
  k->run(cfg_, rho0_, t);
  return t;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<Trajectory> TrajectorySimulator::run_indices(const std::vector<int>& indices, int workers) const {
  std::vector<Trajectory> out(indices.size());
  parallel_for(static_cast<int>(indices.size()), workers, [&](int i) { out[i] = run(indices[i]); });
  return out;
}

std::vector<Trajectory> TrajectorySimulator::run_batch(int workers) const {
  std::vector<int> idx(static_cast<size_t>(cfg_.n_traj));
  for (int i = 0; i < cfg_.n_traj; ++i) idx[i] = i;
  return run_indices(idx, workers);
}

void enumerate_exact(const QuantumChannel& instrument, const ComplexMatrix& rho0, int m, const BranchVisitor& visit,
                     double max_branches) {
  if (m < 0) throw Error("enumerate_exact: m must be >= 0");
  validate_state(rho0);
  const int a = instrument.num_outcomes();
  if (static_cast<double>(m) * std::log(static_cast<double>(a)) > std::log(max_branches) + 1e-12) {
    std::ostringstream os;
    os << "enumerate_exact: " << a << "^" << m << " branches exceed the limit of " << max_branches;
    throw Error(os.str());
  }
  std::vector<std::uint8_t> seq;
  seq.reserve(static_cast<size_t>(m));
  std::function<void(const ComplexMatrix&)> dfs = [&](const ComplexMatrix& rho) {
    if (static_cast<int>(seq.size()) == m) {
      visit(seq, rho.trace().real(), rho);
      return;
    }
    for (int n = 0; n < a; ++n) {
      ComplexMatrix next = instrument.apply_outcome(n, rho);
      if (next.trace().real() <= 0.0) continue;
      seq.push_back(static_cast<std::uint8_t>(n));
      dfs(next);
      seq.pop_back();
    }
  };
  dfs(rho0);
}

std::vector<Branch> enumerate_exact(const QuantumChannel& instrument, const ComplexMatrix& rho0, int m,
                                    double max_branches) {
  std::vector<Branch> out;
  enumerate_exact(
      instrument, rho0, m,
      [&](const std::vector<std::uint8_t>& seq, double p, const ComplexMatrix& s) { out.push_back({seq, p, s}); },
      max_branches);
  return out;
}

ComplexMatrix rf_rotation(int d, int a, int b, double angle) {
  if (a < 0 || b < 0 || a >= d || b >= d || a == b) throw Error("rf_rotation: invalid level pair");
  ComplexMatrix x = ComplexMatrix::Zero(d, d);
  x(a, b) = x(b, a) = 1.0;
  return hermitian_exp(x, angle / 2.0);
}

std::vector<EnsemblePoint> ensemble_fidelity(const std::vector<Trajectory>& trajs, const ComplexMatrix& dark,
                                             const ComplexMatrix& bright, double rate_threshold) {
  if (trajs.empty()) return {};
  const size_t ns = trajs.front().snapshots.size();
  for (const auto& t : trajs) {
    if (t.snapshots.size() != ns) throw Error("ensemble_fidelity: snapshot grids differ");
    for (const auto& s : t.snapshots)
      if (s.state.size() == 0) throw Error("ensemble_fidelity: trajectories were run without stored states");
  }
  const Eigen::Index d = dark.rows();
  std::vector<EnsemblePoint> out;
  out.reserve(ns);
  for (size_t k = 0; k < ns; ++k) {
    EnsemblePoint e;
    e.step = trajs.front().snapshots[k].step;
    ComplexMatrix all = ComplexMatrix::Zero(d, d), dk = all, br = all;
    int n_dark = 0, n_bright = 0;
    double max_sum = 0.0;
    for (const auto& t : trajs) {
      const auto& s = t.snapshots[k];
      all += s.state;
      max_sum += std::max(s.F_D, s.F_B);
      const double rate = s.step > 0 ? static_cast<double>(s.cumulative_photons) / static_cast<double>(s.step) : 0.0;
      if (s.step > 0 && rate < rate_threshold) {
        dk += s.state;
        ++n_dark;
      } else {
        br += s.state;
        ++n_bright;
      }
    }
    const double n = static_cast<double>(trajs.size());
    all /= n;
    e.F_D_mean = fidelity(hermitize(all), dark);
    e.F_B_mean = fidelity(hermitize(all), bright);
    e.mean_max_F = max_sum / n;
    e.F_D_class = n_dark ? fidelity(hermitize(dk / n_dark), dark) : 0.0;
    e.F_B_class = n_bright ? fidelity(hermitize(br / n_bright), bright) : 0.0;
    e.frac_dark = n_dark / n;
    e.combined_class = (n_dark * e.F_D_class + n_bright * e.F_B_class) / n;
    out.push_back(e);
  }
  return out;
}

double reach_fraction(const std::vector<Trajectory>& trajs, double lo, double hi, double f_min) {
  if (trajs.empty()) return 0.0;
  int hits = 0;
  for (const auto& t : trajs) {
    for (const auto& s : t.snapshots) {
      if (s.step >= lo && s.step <= hi && std::max(s.F_D, s.F_B) >= f_min) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(trajs.size());
}

}  // namespace metachan
