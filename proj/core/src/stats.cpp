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

#include "metachan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/special_functions/gamma.hpp>

namespace metachan {

double polarization(std::span<const std::uint8_t> outcomes) {
  if (outcomes.empty()) throw Error("polarization: empty outcome sequence");
  std::size_t ones = 0;
  for (auto o : outcomes) {
    if (o > 1) throw Error("polarization: outcomes must be binary");
    ones += o;
  }
  return 0.5 - static_cast<double>(ones) / static_cast<double>(outcomes.size());
}

double fixed_point_frequency(const QuantumChannel& probe_channel, const ComplexMatrix& rho_fix) {
  return measurement_probability(probe_channel, rho_fix, 1);
}

double expected_photon_rate(const QuantumChannel& probe_channel, const WeakReadout& ro, const ComplexMatrix& rho) {
  if (probe_channel.num_outcomes() != 2) throw Error("expected_photon_rate: needs a two-outcome probe channel");
  const double p1 = measurement_probability(probe_channel, rho, 1);
  return ro.n0 * (1.0 - p1) + ro.n1 * p1;
}

PLTrace bin_trace(std::span<const std::uint8_t> outcomes, long long window, double rim_time) {
  if (window < 1) throw Error("bin_trace: window must be >= 1");
  PLTrace t;
  t.window = window;
  t.rim_time = rim_time;
  const auto nbins = static_cast<long long>(outcomes.size()) / window;
  t.counts.reserve(static_cast<size_t>(nbins));
  for (long long b = 0; b < nbins; ++b) {
    std::int64_t s = 0;
    for (long long i = b * window; i < (b + 1) * window; ++i) s += outcomes[static_cast<size_t>(i)];
    t.counts.push_back(s);
  }
  return t;
}

double Histogram::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

Histogram make_histogram(std::span<const std::int64_t> samples) {
  std::map<std::int64_t, double> m;
  for (auto s : samples) {
    if (s < 0) throw Error("histogram: counts must be >= 0");
    m[s] += 1.0;
  }
  Histogram h;
  for (const auto& [v, c] : m) {
    h.values.push_back(v);
    h.weights.push_back(c);
  }
  return h;
}

double poisson_log_pmf(std::int64_t k, double mu) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (mu <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(mu) - mu - std::lgamma(kd + 1.0);
}

double poisson_cdf(std::int64_t k, double mu) {
  if (k < 0) return 0.0;
  if (mu <= 0.0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(k) + 1.0, mu);
}

double PoissonMixture::log_pmf(std::int64_t x) const {
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(components.size());
  for (const auto& c : components) {
    const double t = std::log(c.weight) + poisson_log_pmf(x, c.mean);
    terms.push_back(t);
    mx = std::max(mx, t);
  }
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

namespace {

double weighted_quantile(const Histogram& h, double q) {
  const double target = q * h.total();
  double acc = 0.0;
  for (size_t i = 0; i < h.values.size(); ++i) {
    acc += h.weights[i];
    if (acc >= target) return static_cast<double>(h.values[i]);
  }
  return static_cast<double>(h.values.back());
}

struct EmResult {
  PoissonMixture mix;
  double ll = 0.0;
  int iterations = 0;
  bool converged = false;
};

EmResult run_em(const Histogram& h, int k, const MixtureOptions& opt) {
  const size_t nv = h.values.size();
  std::vector<double> w(static_cast<size_t>(k), 1.0 / k), mu(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) mu[j] = weighted_quantile(h, (j + 0.5) / k);
  // Break ties between coincident starting means deterministically.
  for (int j = 1; j < k; ++j)
    if (mu[j] <= mu[j - 1]) mu[j] = mu[j - 1] * 1.05 + 0.5;
  for (auto& m : mu) m = std::max(m, 1e-6);

  std::vector<double> resp(nv * static_cast<size_t>(k));
  EmResult res;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iter; ++it) {
    double ll = 0.0;
    for (size_t i = 0; i < nv; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double t = std::log(w[j]) + poisson_log_pmf(h.values[i], mu[j]);
        resp[i * k + j] = t;
        mx = std::max(mx, t);
      }
      double s = 0.0;
      for (int j = 0; j < k; ++j) s += std::exp(resp[i * k + j] - mx);
      const double lse = mx + std::log(s);
      for (int j = 0; j < k; ++j) resp[i * k + j] = std::exp(resp[i * k + j] - lse);
      ll += h.weights[i] * lse;
    }
    res.iterations = it;
    res.ll = ll;
    if (it > 1 && std::abs(ll - prev) <= opt.tol * std::max(1.0, std::abs(ll))) {
      res.converged = true;
      break;
    }
    prev = ll;
    for (int j = 0; j < k; ++j) {
      double nj = 0.0, sj = 0.0;
      for (size_t i = 0; i < nv; ++i) {
        const double r = h.weights[i] * resp[i * k + j];
        nj += r;
        sj += r * static_cast<double>(h.values[i]);
      }
      w[j] = std::max(nj / h.total(), 1e-300);
      mu[j] = nj > 0.0 ? std::max(sj / nj, 1e-12) : mu[j];
    }
  }
  for (int j = 0; j < k; ++j) res.mix.components.push_back({w[j], mu[j]});
  std::sort(res.mix.components.begin(), res.mix.components.end(),
            [](const PoissonComponent& a, const PoissonComponent& b) { return a.mean < b.mean; });
  return res;
}

}  // namespace

MixtureFit fit_mixture(const Histogram& hist, int k_max, const MixtureOptions& opt) {
  if (hist.values.empty() || hist.total() <= 0.0) throw Error("fit_mixture: empty histogram");
  if (k_max < 1 || k_max > 4) throw Error("fit_mixture: k_max must lie in [1, 4]");
  MixtureFit fit;
  const double n = hist.total();
  double best_bic = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    auto em = run_em(hist, k, opt);
    const double bic = -2.0 * em.ll + (2.0 * k - 1.0) * std::log(n);
    fit.fits.push_back(em.mix);
    fit.log_likelihood.push_back(em.ll);
    fit.bic.push_back(bic);
    fit.iterations.push_back(em.iterations);
    fit.converged.push_back(em.converged);
    if (bic < best_bic) {
      best_bic = bic;
      fit.k = k;
      fit.best = em.mix;
    }
  }
  return fit;
}

ThresholdFidelity threshold_fidelity(const PoissonMixture& mix, std::int64_t threshold) {
  if (mix.components.size() < 2) throw Error("threshold_fidelity: needs at least two components");
  auto comps = mix.components;
  std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.mean < b.mean; });
  ThresholdFidelity f;
  f.threshold = threshold;
  f.F_dark = poisson_cdf(threshold, comps[0].mean);
  double wsum = 0.0, acc = 0.0;
  for (size_t j = 1; j < comps.size(); ++j) {
    wsum += comps[j].weight;
    acc += comps[j].weight * (1.0 - poisson_cdf(threshold, comps[j].mean));
  }
  f.F_bright = wsum > 0.0 ? acc / wsum : 0.0;
  f.F = 0.5 * (f.F_dark + f.F_bright);
  return f;
}

ThresholdFidelity optimal_threshold(const PoissonMixture& mix) {
  if (mix.components.size() < 2) throw Error("optimal_threshold: needs at least two components");
  double lo = mix.components.front().mean, hi = lo;
  for (const auto& c : mix.components) {
    lo = std::min(lo, c.mean);
    hi = std::max(hi, c.mean);
  }
  ThresholdFidelity best = threshold_fidelity(mix, static_cast<std::int64_t>(std::floor(lo)));
  for (auto t = static_cast<std::int64_t>(std::floor(lo)); t <= static_cast<std::int64_t>(std::ceil(hi)); ++t) {
    const auto f = threshold_fidelity(mix, t);
    if (f.F > best.F) best = f;
  }
  return best;
}

}  // namespace metachan
