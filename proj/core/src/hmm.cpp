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

#include "metachan/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metachan/linalg.hpp"
#include "metachan/stats.hpp"

namespace metachan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Scaled emission matrix: e(t, j) = exp(log p(c_t | j) - shift_t).
void emissions(const HMMModel& m, std::span<const std::int64_t> counts, Eigen::MatrixXd& e, Eigen::VectorXd& shift) {
  const auto n = static_cast<Eigen::Index>(counts.size());
  e.resize(n, m.k);
  shift.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double mx = kNegInf;
    for (int j = 0; j < m.k; ++j) {
      e(t, j) = poisson_log_pmf(counts[t], m.rates[j]);
      mx = std::max(mx, e(t, j));
    }
    shift(t) = mx;
    for (int j = 0; j < m.k; ++j) e(t, j) = std::isfinite(mx) ? std::exp(e(t, j) - mx) : 0.0;
  }
}

// Scaled forward pass; returns the log-likelihood and fills alpha and scale.
double forward(const HMMModel& m, const Eigen::MatrixXd& e, const Eigen::VectorXd& shift, Eigen::MatrixXd& alpha,
               Eigen::VectorXd& scale) {
  const Eigen::Index n = e.rows();
  alpha.resize(n, m.k);
  scale.resize(n);
  double ll = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (t == 0) alpha.row(0) = m.init.transpose().cwiseProduct(e.row(0));
    else alpha.row(t) = (alpha.row(t - 1) * m.trans).cwiseProduct(e.row(t));
    const double c = alpha.row(t).sum();
    if (!(c > 0.0) || !std::isfinite(shift(t))) return kNegInf;
    alpha.row(t) /= c;
    scale(t) = c;
    ll += std::log(c) + shift(t);
  }
  return ll;
}

HMMModel sorted_by_rate(const HMMModel& m) {
  std::vector<int> perm(static_cast<size_t>(m.k));
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return m.rates[a] < m.rates[b]; });
  HMMModel out;
  out.k = m.k;
  out.rates.resize(static_cast<size_t>(m.k));
  out.trans.resize(m.k, m.k);
  out.init.resize(m.k);
  for (int i = 0; i < m.k; ++i) {
    out.rates[i] = m.rates[perm[i]];
    out.init(i) = m.init(perm[i]);
    for (int j = 0; j < m.k; ++j) out.trans(i, j) = m.trans(perm[i], perm[j]);
  }
  return out;
}

}  // namespace

void HMMModel::validate() const {
  if (k < 1 || static_cast<int>(rates.size()) != k || trans.rows() != k || trans.cols() != k || init.size() != k) {
    throw DimensionError("HMM: inconsistent model dimensions");
  }
  for (double r : rates)
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error("HMM: rates must be finite and >= 0");
  if ((trans.array() < 0.0).any() || (init.array() < 0.0).any()) throw Error("HMM: negative probabilities");
  for (int i = 0; i < k; ++i)
    if (std::abs(trans.row(i).sum() - 1.0) > 1e-10) throw Error("HMM: transition rows must sum to 1");
  if (std::abs(init.sum() - 1.0) > 1e-10) throw Error("HMM: initial distribution must sum to 1");
}

double log_likelihood(const HMMModel& model, std::span<const std::int64_t> counts) {
  model.validate();
  if (counts.empty()) return 0.0;
  Eigen::MatrixXd e, alpha;
  Eigen::VectorXd shift, scale;
  emissions(model, counts, e, shift);
  return forward(model, e, shift, alpha, scale);
}

BaumWelchResult baum_welch(std::span<const std::int64_t> counts, int k, const BaumWelchOptions& opt) {
  if (k < 1 || k > 4) throw Error("baum_welch: k must lie in [1, 4]");
  if (counts.size() < static_cast<size_t>(10 * k)) throw Error("baum_welch: trace too short for the requested k");
  const auto n = static_cast<Eigen::Index>(counts.size());

  std::vector<std::int64_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  HMMModel m;
  m.k = k;
  m.rates.resize(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    const double q = static_cast<double>(j + 1) / (k + 1);
    const auto idx = static_cast<size_t>(std::floor(q * static_cast<double>(sorted.size() - 1)));
    m.rates[j] = std::max(static_cast<double>(sorted[idx]), 1e-3);
  }
  for (int j = 1; j < k; ++j)
    if (m.rates[j] <= m.rates[j - 1]) m.rates[j] = m.rates[j - 1] * 1.05 + 0.5;
  if (k == 1) {
    m.trans = Eigen::MatrixXd::Ones(1, 1);
  } else {
    m.trans = Eigen::MatrixXd::Constant(k, k, (1.0 - opt.stay_init) / (k - 1));
    m.trans.diagonal().setConstant(opt.stay_init);
  }
  m.init = Eigen::VectorXd::Constant(k, 1.0 / k);

  BaumWelchResult res;
  Eigen::MatrixXd e, alpha, beta(n, k);
  Eigen::VectorXd shift, scale;
  double prev = kNegInf;
  for (int it = 1; it <= opt.max_iter; ++it) {
    emissions(m, counts, e, shift);
    const double ll = forward(m, e, shift, alpha, scale);
    if (!std::isfinite(ll)) throw NumericalError("baum_welch: trace has zero likelihood under the current model");
    res.history.push_back(ll);
    res.iterations = it;
    if (it > 1 && ll < prev - 1e-9 * std::abs(prev)) res.monotone = false;
    if (it > 1 && (ll - prev) <= opt.tol * std::abs(prev)) {
      res.converged = true;
      res.log_likelihood = ll;
      break;
    }
    prev = ll;
    res.log_likelihood = ll;

    beta.row(n - 1).setOnes();
    for (Eigen::Index t = n - 2; t >= 0; --t) {
      const Eigen::RowVectorXd eb = e.row(t + 1).cwiseProduct(beta.row(t + 1));
      beta.row(t) = (m.trans * eb.transpose()).transpose() / scale(t + 1);
    }

    Eigen::MatrixXd xi_sum = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd gamma_sum = Eigen::VectorXd::Zero(k), gamma_from = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd gamma0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::VectorXd g = alpha.row(t).cwiseProduct(beta.row(t)).transpose();
      const Eigen::VectorXd gn = g / g.sum();
      if (t == 0) gamma0 = gn;
      gamma_sum += gn;
      weighted += gn * static_cast<double>(counts[t]);
      if (t + 1 < n) {
        gamma_from += gn;
        const Eigen::RowVectorXd eb = e.row(t + 1).cwiseProduct(beta.row(t + 1)) / scale(t + 1);
        xi_sum += (alpha.row(t).transpose() * eb).cwiseProduct(m.trans);
      }
    }
    for (int j = 0; j < k; ++j) {
      if (gamma_sum(j) > 0.0) m.rates[j] = std::max(weighted(j) / gamma_sum(j), 1e-9);
      const double row = xi_sum.row(j).sum();
      if (row > 0.0) m.trans.row(j) = xi_sum.row(j) / row;
    }
    m.init = gamma0;
  }
  res.model = sorted_by_rate(m);
  return res;
}

std::vector<int> viterbi(const HMMModel& model, std::span<const std::int64_t> counts) {
  model.validate();
  const auto n = static_cast<Eigen::Index>(counts.size());
  if (n == 0) return {};
  const int k = model.k;
  const Eigen::MatrixXd logA = model.trans.array().log();
  Eigen::MatrixXd delta(n, k);
  Eigen::MatrixXi back(n, k);
  for (int j = 0; j < k; ++j) delta(0, j) = std::log(model.init(j)) + poisson_log_pmf(counts[0], model.rates[j]);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (int j = 0; j < k; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (int i = 0; i < k; ++i) {
        const double v = delta(t - 1, i) + logA(i, j);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      delta(t, j) = best + poisson_log_pmf(counts[t], model.rates[j]);
      back(t, j) = arg;
    }
  }
  std::vector<int> path(static_cast<size_t>(n));
  Eigen::Index last = 0;
  delta.row(n - 1).maxCoeff(&last);
  path[n - 1] = static_cast<int>(last);
  for (Eigen::Index t = n - 1; t > 0; --t) path[t - 1] = back(t, path[t]);
  return path;
}

double path_log_probability(const HMMModel& model, std::span<const std::int64_t> counts, std::span<const int> path) {
  if (counts.size() != path.size()) throw DimensionError("path_log_probability: length mismatch");
  if (counts.empty()) return 0.0;
  double lp = std::log(model.init(path[0])) + poisson_log_pmf(counts[0], model.rates[path[0]]);
  for (size_t t = 1; t < counts.size(); ++t) {
    lp += std::log(model.trans(path[t - 1], path[t])) + poisson_log_pmf(counts[t], model.rates[path[t]]);
  }
  return lp;
}

std::vector<Jump> jumps(std::span<const int> path) {
  std::vector<Jump> out;
  for (size_t t = 1; t < path.size(); ++t)
    if (path[t] != path[t - 1]) out.push_back({t, path[t - 1], path[t]});
  return out;
}

std::vector<DwellTime> dwell_times(std::span<const int> path, const HMMModel& model, double rim_time,
                                   long long window) {
  const double bin_time = static_cast<double>(window) * rim_time;
  std::vector<DwellTime> out(static_cast<size_t>(model.k));
  std::vector<std::vector<double>> complete(static_cast<size_t>(model.k)), all(static_cast<size_t>(model.k));
  size_t start = 0;
  for (size_t t = 1; t <= path.size(); ++t) {
    if (t == path.size() || path[t] != path[start]) {
      const auto len = static_cast<double>(t - start);
      all[path[start]].push_back(len);
      if (start > 0 && t < path.size()) complete[path[start]].push_back(len);
      start = t;
    }
  }
  for (int j = 0; j < model.k; ++j) {
    auto& d = out[j];
    d.state = j;
    d.visited = !all[j].empty();
    d.segments = static_cast<int>(all[j].size());
    const auto& runs = complete[j].empty() ? all[j] : complete[j];
    if (!runs.empty()) d.empirical_mean = bin_time * std::accumulate(runs.begin(), runs.end(), 0.0) / runs.size();
    const double stay = model.trans(j, j);
    d.absorbing = stay >= 1.0;
    d.implied = d.absorbing ? std::numeric_limits<double>::infinity() : bin_time / (1.0 - stay);
  }
  return out;
}

std::vector<StateClass> merge_states(const HMMModel& model, std::span<const int> path, double rel_tol) {
  std::vector<int> order(static_cast<size_t>(model.k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return model.rates[a] < model.rates[b]; });
  std::vector<double> occ(static_cast<size_t>(model.k), 0.0);
  for (int s : path) occ[s] += 1.0;
  const double total = path.empty() ? 1.0 : static_cast<double>(path.size());

  std::vector<StateClass> classes;
  for (int s : order) {
    const double r = model.rates[s];
    if (!classes.empty()) {
      const double prev = model.rates[classes.back().members.back()];
      if (std::abs(r - prev) < rel_tol * std::max(r, prev)) {
        classes.back().members.push_back(s);
        continue;
      }
    }
    classes.push_back({{s}, 0.0, 0.0});
  }
  for (auto& c : classes) {
    double wsum = 0.0, rsum = 0.0;
    for (int s : c.members) {
      wsum += occ[s];
      rsum += occ[s] * model.rates[s];
    }
    c.occupancy = wsum / total;
    if (wsum > 0.0) {
      c.rate = rsum / wsum;
    } else {
      for (int s : c.members) c.rate += model.rates[s] / c.members.size();
    }
  }
  return classes;
}

}  // namespace metachan
