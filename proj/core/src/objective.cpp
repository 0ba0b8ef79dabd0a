#include "freqcp/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "freqcp/errors.hpp"

namespace freqcp {

CpConfiguration::CpConfiguration(int frequencies, int windows)
    : windows_(windows),
      per_freq_(static_cast<std::size_t>(frequencies)),
      multiplicity_(static_cast<std::size_t>(windows) + 1, 0) {
  if (frequencies < 1 || windows < 1) throw DomainError("configuration needs D >= 1 and T >= 1");
}

void CpConfiguration::check(int d, int t) const {
  if (d < 0 || d >= frequencies()) throw DomainError("frequency " + std::to_string(d) + " out of range");
  if (t < 1 || t > windows_ - 1) {
    throw DomainError("change point " + std::to_string(t) + " outside [1, T-1]");
  }
}

bool CpConfiguration::contains(int d, int t) const {
  const auto& s = at(d);
  return std::binary_search(s.begin(), s.end(), t);
}

std::vector<int> CpConfiguration::union_locations() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(union_size_));
  for (int t = 1; t < windows_; ++t) {
    if (multiplicity_[static_cast<std::size_t>(t)] > 0) out.push_back(t);
  }
  return out;
}

std::vector<int> CpConfiguration::active_frequencies() const {
  std::vector<int> out;
  for (int d = 0; d < frequencies(); ++d) {
    if (!at(d).empty()) out.push_back(d);
  }
  return out;
}

std::vector<int> CpConfiguration::frequencies_at(int t) const {
  std::vector<int> out;
  for (int d = 0; d < frequencies(); ++d) {
    if (contains(d, t)) out.push_back(d);
  }
  return out;
}

void CpConfiguration::insert(int d, int t) {
  check(d, t);
  auto& s = per_freq_[static_cast<std::size_t>(d)];
  auto it = std::lower_bound(s.begin(), s.end(), t);
  if (it != s.end() && *it == t) return;
  s.insert(it, t);
  if (multiplicity_[static_cast<std::size_t>(t)]++ == 0) ++union_size_;
}

void CpConfiguration::erase(int d, int t) {
  check(d, t);
  auto& s = per_freq_[static_cast<std::size_t>(d)];
  auto it = std::lower_bound(s.begin(), s.end(), t);
  if (it == s.end() || *it != t) return;
  s.erase(it);
  if (--multiplicity_[static_cast<std::size_t>(t)] == 0) --union_size_;
}

void CpConfiguration::assign(int d, std::vector<int> locations) {
  if (d < 0 || d >= frequencies()) throw DomainError("frequency out of range");
  std::sort(locations.begin(), locations.end());
  locations.erase(std::unique(locations.begin(), locations.end()), locations.end());
  for (int t : locations) check(d, t);
  for (int t : at(d)) {
    if (--multiplicity_[static_cast<std::size_t>(t)] == 0) --union_size_;
  }
  for (int t : locations) {
    if (multiplicity_[static_cast<std::size_t>(t)]++ == 0) ++union_size_;
  }
  per_freq_[static_cast<std::size_t>(d)] = std::move(locations);
}

std::vector<double> bic_beta(int window_size, double sigma2, int windows) {
  if (window_size < 2) throw DomainError("window size must be at least 2");
  if (!(sigma2 > 0.0)) throw DomainError("noise variance must be positive");
  if (windows < 2) throw DomainError("BIC penalty needs T >= 2");
  const int freqs = window_size / 2 + 1;
  const double scale = window_size * sigma2 * std::log(static_cast<double>(windows));
  std::vector<double> beta(static_cast<std::size_t>(freqs));
  for (int d = 0; d < freqs; ++d) {
    beta[static_cast<std::size_t>(d)] = (sym_coeff(d, window_size) + 1) * scale;
  }
  return beta;
}

double gamma_penalty(double kappa, int window_size, double sigma2, int windows) {
  if (kappa < 0.0) throw DomainError("kappa must be non-negative");
  if (!(sigma2 > 0.0)) throw DomainError("noise variance must be positive");
  if (windows < 2) throw DomainError("penalty needs T >= 2");
  return kappa * window_size * sigma2 * std::log(static_cast<double>(windows));
}

PenaltyParams bic_penalties(int window_size, double sigma2, int windows, double kappa) {
  return {bic_beta(window_size, sigma2, windows),
          gamma_penalty(kappa, window_size, sigma2, windows)};
}

double penalty(const CpConfiguration& cfg, const PenaltyParams& pen) {
  double p = pen.gamma * cfg.total();
  for (int d = 0; d < cfg.frequencies(); ++d) p += pen.beta[static_cast<std::size_t>(d)] * cfg.count(d);
  return p;
}

double segment_cost(const SpectralSequences& f, int d, int first, int last) {
  const Complex mean = segment_mean(f, d, first, last);
  double acc = 0.0;
  for (int t = first; t <= last; ++t) acc += std::norm(f(t - 1, d) - mean);
  return sym_coeff(d, f.window_size()) * acc;
}

double objective(const CpConfiguration& cfg, const SpectralSequences& f, const PenaltyParams& pen) {
  if (cfg.frequencies() != f.frequencies() || cfg.windows() != f.windows()) {
    throw ShapeError("configuration does not match spectra");
  }
  double e = penalty(cfg, pen);
  for (int d = 0; d < cfg.frequencies(); ++d) {
    for_each_segment(cfg, d, [&](int s, int t) { e += segment_cost(f, d, s, t); });
  }
  return e;
}

SegmentCostCache::SegmentCostCache(const SpectralSequences& f)
    : window_size_(f.window_size()), windows_(f.windows()), frequencies_(f.frequencies()) {
  const auto stride = static_cast<std::size_t>(windows_) + 1;
  csym_.resize(static_cast<std::size_t>(frequencies_));
  sum_.assign(stride * frequencies_, Complex{});
  sumsq_.assign(stride * frequencies_, 0.0);
  for (int d = 0; d < frequencies_; ++d) {
    csym_[static_cast<std::size_t>(d)] = sym_coeff(d, window_size_);
    const auto seq = f.frequency(d);
    Complex centre{};
    for (const auto& v : seq) centre += v;
    centre /= static_cast<double>(windows_);
    Complex* s = sum_.data() + stride * d;
    double* q = sumsq_.data() + stride * d;
    for (int t = 0; t < windows_; ++t) {
      const Complex v = seq[static_cast<std::size_t>(t)] - centre;
      s[t + 1] = s[t] + v;
      q[t + 1] = q[t] + std::norm(v);
    }
  }
}

double SegmentCostCache::cost(int d, int first, int last) const {
  if (first >= last) return 0.0;
  const auto stride = static_cast<std::size_t>(windows_) + 1;
  const Complex* s = sum_.data() + stride * d;
  const double* q = sumsq_.data() + stride * d;
  const double n = last - first + 1;
  const double c = q[last] - q[first - 1] - std::norm(s[last] - s[first - 1]) / n;
  return csym_[static_cast<std::size_t>(d)] * std::max(c, 0.0);
}

double objective(const CpConfiguration& cfg, const SegmentCostCache& cache,
                 const PenaltyParams& pen) {
  double e = penalty(cfg, pen);
  for (int d = 0; d < cfg.frequencies(); ++d) {
    for_each_segment(cfg, d, [&](int s, int t) { e += cache.cost(d, s, t); });
  }
  return e;
}

namespace {

Complex window_coefficient(std::span<const double> x, int window, int d, int m) {
  // window is 1-based
  const auto w = dft_vector(m, d);
  Complex acc{};
  const std::size_t offset = static_cast<std::size_t>(window - 1) * m;
  for (int n = 0; n < m; ++n) acc += x[offset + n] * w[static_cast<std::size_t>(n)];
  return acc;
}

}  // namespace

QuadCoeffs segment_cost_quadratic(int d, int first, int last, std::span<const double> a,
                                  std::span<const double> b, int window_size) {
  if (a.size() != b.size()) throw ShapeError("line offset and direction differ in length");
  validate_series(a, window_size);
  const int windows = static_cast<int>(a.size()) / window_size;
  if (first > last) throw DomainError("segment start after segment end");
  if (first < 1 || last > windows) throw DomainError("segment outside [1, T]");
  if (d < 0 || d > window_size / 2) throw DomainError("frequency out of range");

  std::vector<Complex> pa, pb;
  Complex ma{}, mb{};
  for (int t = first; t <= last; ++t) {
    pa.push_back(window_coefficient(a, t, d, window_size));
    pb.push_back(window_coefficient(b, t, d, window_size));
    ma += pa.back();
    mb += pb.back();
  }
  const double n = last - first + 1;
  ma /= n;
  mb /= n;
  QuadCoeffs q;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const Complex p = pa[i] - ma;
    const Complex v = pb[i] - mb;
    q.e2 += std::norm(v);
    q.e1 += 2.0 * (p * std::conj(v)).real();
    q.e0 += std::norm(p);
  }
  const double c = sym_coeff(d, window_size);
  return {c * q.e2, c * q.e1, c * q.e0};
}

LineCostCache::LineCostCache(std::span<const double> a, std::span<const double> b,
                             int window_size)
    : LineCostCache(stft(a, window_size), stft(b, window_size)) {
  if (a.size() != b.size()) throw ShapeError("line offset and direction differ in length");
}

LineCostCache::LineCostCache(const SpectralSequences& fa, const SpectralSequences& fb)
    : window_size_(fa.window_size()), windows_(fa.windows()), frequencies_(fa.frequencies()) {
  if (fb.window_size() != window_size_ || fb.windows() != windows_) {
    throw ShapeError("line offset and direction spectra differ in geometry");
  }
  const auto stride = static_cast<std::size_t>(windows_) + 1;
  const auto total = stride * frequencies_;
  csym_.resize(static_cast<std::size_t>(frequencies_));
  flat_.assign(static_cast<std::size_t>(frequencies_), 0);
  sa_.assign(total, Complex{});
  sb_.assign(total, Complex{});
  saa_.assign(total, 0.0);
  sbb_.assign(total, 0.0);
  sab_.assign(total, 0.0);

  double energy_b = 0.0;
  for (int d = 0; d < frequencies_; ++d) {
    for (const auto& v : fb.frequency(d)) energy_b += std::norm(v);
  }

  for (int d = 0; d < frequencies_; ++d) {
    csym_[static_cast<std::size_t>(d)] = sym_coeff(d, window_size_);
    const auto xa = fa.frequency(d);
    const auto xb = fb.frequency(d);
    Complex ca{}, cb{};
    double eb = 0.0;
    for (int t = 0; t < windows_; ++t) {
      ca += xa[static_cast<std::size_t>(t)];
      cb += xb[static_cast<std::size_t>(t)];
      eb += std::norm(xb[static_cast<std::size_t>(t)]);
    }
    ca /= static_cast<double>(windows_);
    cb /= static_cast<double>(windows_);
    // Spectral energy of the direction at this bin is round-off only.
    flat_[static_cast<std::size_t>(d)] = eb <= 1e-24 * (energy_b + 1e-300) ? 1 : 0;

    const std::size_t base = stride * d;
    for (int t = 0; t < windows_; ++t) {
      const Complex va = xa[static_cast<std::size_t>(t)] - ca;
      const Complex vb = xb[static_cast<std::size_t>(t)] - cb;
      const std::size_t i = base + t;
      sa_[i + 1] = sa_[i] + va;
      sb_[i + 1] = sb_[i] + vb;
      saa_[i + 1] = saa_[i] + std::norm(va);
      sbb_[i + 1] = sbb_[i] + std::norm(vb);
      sab_[i + 1] = sab_[i] + (va * std::conj(vb)).real();
    }
  }
}

QuadCoeffs LineCostCache::segment(int d, int first, int last) const {
  if (first >= last) return {};
  const std::size_t base = (static_cast<std::size_t>(windows_) + 1) * d;
  const std::size_t hi = base + last;
  const std::size_t lo = base + first - 1;
  const double n = last - first + 1;
  const double c = csym_[static_cast<std::size_t>(d)];
  const Complex sa = sa_[hi] - sa_[lo];
  const double e0 = c * (saa_[hi] - saa_[lo] - std::norm(sa) / n);
  if (flat_[static_cast<std::size_t>(d)]) return {0.0, 0.0, e0};
  const Complex sb = sb_[hi] - sb_[lo];
  return {c * (sbb_[hi] - sbb_[lo] - std::norm(sb) / n),
          2.0 * c * (sab_[hi] - sab_[lo] - (sa * std::conj(sb)).real() / n), e0};
}

QuadCoeffs objective_quadratic(const CpConfiguration& cfg, const LineCostCache& line,
                               const PenaltyParams& pen) {
  if (cfg.frequencies() != line.frequencies() || cfg.windows() != line.windows()) {
    throw ShapeError("configuration does not match line geometry");
  }
  QuadCoeffs q;
  for (int d = 0; d < cfg.frequencies(); ++d) {
    for_each_segment(cfg, d, [&](int s, int t) { q += line.segment(d, s, t); });
  }
  q.e0 += penalty(cfg, pen);
  return q;
}

QuadCoeffs objective_quadratic(const CpConfiguration& cfg, std::span<const double> a,
                               std::span<const double> b, int window_size,
                               const PenaltyParams& pen) {
  return objective_quadratic(cfg, LineCostCache(a, b, window_size), pen);
}

}  // namespace freqcp
