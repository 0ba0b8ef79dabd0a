#include "freqcp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "freqcp/errors.hpp"

namespace freqcp {

void SyntheticSpec::validate() const {
  if (window_size < 2 || windows < 2) throw DomainError("need M >= 2 and T >= 2");
  if (!(sigma >= 0.0)) throw DomainError("sigma must be non-negative");
  if (!(delta >= 0.0)) throw DomainError("delta must be non-negative");
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0, 1)");
  for (std::size_t j = 0; j < 3; ++j) {
    if (freqs[j] < 0 || freqs[j] > window_size / 2) throw DomainError("planted bin out of range");
    if (delta > 0.0 && !(0 < t1[j] && t1[j] < t2[j] && t2[j] < windows)) {
      throw DomainError("change windows must satisfy 0 < t1 < t2 < T");
    }
  }
}

std::vector<int> plantable_frequencies(int window_size) {
  std::vector<int> out;
  for (int d = 1; 2 * d < window_size; ++d) out.push_back(d);
  return out;
}

void draw_planted(SyntheticSpec& spec, Rng& rng) {
  auto pool = plantable_frequencies(spec.window_size);
  if (pool.size() < 3) throw DomainError("window size too small to plant three frequencies");
  for (std::size_t j = 0; j < 3; ++j) {
    const auto k = j + rng.index(pool.size() - j);
    std::swap(pool[j], pool[k]);
    spec.freqs[j] = pool[j];
  }
  for (auto& a : spec.amplitude) a = rng.uniform();
}

std::vector<double> mean_signal(const SyntheticSpec& spec) {
  spec.validate();
  const int m = spec.window_size;
  const auto n_total = static_cast<std::size_t>(m) * spec.windows;
  std::vector<double> s(n_total, 0.0);
  for (std::size_t j = 0; j < 3; ++j) {
    const int d = spec.freqs[j];
    const auto b1 = static_cast<std::size_t>(m) * spec.t1[j];
    const auto b2 = static_cast<std::size_t>(m) * spec.t2[j];
    for (std::size_t n = 0; n < n_total; ++n) {
      double amp = spec.amplitude[j];
      if (spec.delta > 0.0) {
        if (n >= b2) {
          amp += 2.0 * spec.delta;
        } else if (n >= b1) {
          amp += spec.delta;
        }
      }
      const auto phase = static_cast<double>((static_cast<long long>(d) * static_cast<long long>(n)) % m);
      s[n] += amp * std::sin(2.0 * std::numbers::pi * phase / m);
    }
  }
  return s;
}

std::vector<double> generate_correlated_noise(std::size_t n, double sigma, double rho, Rng& rng) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0, 1)");
  if (!(sigma >= 0.0)) throw DomainError("sigma must be non-negative");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> e(n);
  const double innovation = sigma * std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = normal(rng.engine());
    e[i] = i == 0 ? sigma * xi : rho * e[i - 1] + innovation * xi;
  }
  return e;
}

TimeSeries generate(const SyntheticSpec& spec, Rng& rng) {
  TimeSeries out;
  out.samples = mean_signal(spec);
  const double rho = spec.noise == NoiseKind::Ar1 ? spec.rho : 0.0;
  const auto noise = generate_correlated_noise(out.samples.size(), spec.sigma, rho, rng);
  for (std::size_t n = 0; n < noise.size(); ++n) out.samples[n] += noise[n];
  return out;
}

double estimate_variance(const SpectralSequences& f, const CpConfiguration& cfg) {
  double total = 0.0;
  int used = 0;
  for (int d = 0; d < f.frequencies(); ++d) {
    const auto seq = f.frequency(d);
    double worst = -1.0;
    for_each_segment(cfg, d, [&](int first, int last) {
      const int len = last - first + 1;
      if (len < 2) return;
      const Complex mean = segment_mean(f, d, first, last);
      double ss = 0.0;
      for (int t = first; t <= last; ++t) ss += std::norm(seq[static_cast<std::size_t>(t - 1)] - mean);
      worst = std::max(worst, ss / (len - 1));
    });
    if (worst >= 0.0) {
      total += worst;
      ++used;
    }
  }
  if (used == 0) throw DomainError("no segment long enough to estimate the noise level");
  return std::sqrt(total / used / f.window_size());
}

double estimate_variance(std::span<const double> x, const DetectConfig& config) {
  const auto f = stft(x, config.window_size);
  const auto det = detect(f, config);
  return estimate_variance(f, det.config);
}

bool is_correct_detection(const HypothesisContext& ctx, const SyntheticSpec& spec) {
  if (ctx.freqs.empty()) return false;
  int lo1 = spec.windows, hi1 = 0, lo2 = spec.windows, hi2 = 0;
  for (int d : ctx.freqs) {
    const auto it = std::find(spec.freqs.begin(), spec.freqs.end(), d);
    if (it == spec.freqs.end()) return false;
    const auto j = static_cast<std::size_t>(it - spec.freqs.begin());
    lo1 = std::min(lo1, spec.t1[j]);
    hi1 = std::max(hi1, spec.t1[j]);
    lo2 = std::min(lo2, spec.t2[j]);
    hi2 = std::max(hi2, spec.t2[j]);
  }
  return (lo1 <= ctx.tau && ctx.tau <= hi1) || (lo2 <= ctx.tau && ctx.tau <= hi2);
}

}  // namespace freqcp
