#pragma once

#include <span>
#include <vector>

#include "freqcp/spectral.hpp"

namespace freqcp {

/// Per-frequency change-point sets plus their union.
///
/// A change point t in [1, T-1] closes the segment ending at window t.
/// The union multiplicity is maintained incrementally so that |union| and
/// membership queries are O(1).
class CpConfiguration {
 public:
  CpConfiguration() = default;
  CpConfiguration(int frequencies, int windows);

  int frequencies() const noexcept { return static_cast<int>(per_freq_.size()); }
  int windows() const noexcept { return windows_; }

  const std::vector<int>& at(int d) const { return per_freq_[static_cast<std::size_t>(d)]; }
  bool contains(int d, int t) const;
  int count(int d) const { return static_cast<int>(at(d).size()); }

  /// K: number of distinct locations across all frequencies.
  int total() const noexcept { return union_size_; }
  /// Number of frequencies holding a change point at t.
  int multiplicity(int t) const { return multiplicity_[static_cast<std::size_t>(t)]; }
  std::vector<int> union_locations() const;

  /// Frequencies whose set is non-empty.
  std::vector<int> active_frequencies() const;
  /// Frequencies holding a change point at t.
  std::vector<int> frequencies_at(int t) const;

  void insert(int d, int t);
  void erase(int d, int t);
  /// Replace the whole set of frequency d; `locations` need not be sorted.
  void assign(int d, std::vector<int> locations);

  friend bool operator==(const CpConfiguration& lhs, const CpConfiguration& rhs) {
    return lhs.windows_ == rhs.windows_ && lhs.per_freq_ == rhs.per_freq_;
  }

 private:
  void check(int d, int t) const;

  int windows_ = 0;
  std::vector<std::vector<int>> per_freq_;
  std::vector<int> multiplicity_;
  int union_size_ = 0;
};

struct PenaltyParams {
  std::vector<double> beta;  // per frequency
  double gamma = 0.0;
};

/// BIC per-change penalty (c_sym + 1) * M * sigma2 * ln T for every bin.
std::vector<double> bic_beta(int window_size, double sigma2, int windows);
/// Shared-location penalty kappa * M * sigma2 * ln T.
double gamma_penalty(double kappa, int window_size, double sigma2, int windows);
PenaltyParams bic_penalties(int window_size, double sigma2, int windows, double kappa);

/// Sum of beta^(d) K^(d) + gamma K.
double penalty(const CpConfiguration& cfg, const PenaltyParams& pen);

/// c_sym * sum |f_t - mean|^2 over windows first..last (1-based), evaluated
/// by definition with a two-pass mean.
double segment_cost(const SpectralSequences& f, int d, int first, int last);

/// Calls fn(first, last) for each segment of frequency d, in order.
template <typename Fn>
void for_each_segment(const CpConfiguration& cfg, int d, Fn&& fn) {
  int prev = 0;
  for (int t : cfg.at(d)) {
    fn(prev + 1, t);
    prev = t;
  }
  fn(prev + 1, cfg.windows());
}

/// Objective E(cfg, x) evaluated by definition.
double objective(const CpConfiguration& cfg, const SpectralSequences& f, const PenaltyParams& pen);

/// O(1) segment costs from per-frequency prefix sums (centred to limit cancellation).
class SegmentCostCache {
 public:
  explicit SegmentCostCache(const SpectralSequences& f);

  int windows() const noexcept { return windows_; }
  int frequencies() const noexcept { return frequencies_; }
  int window_size() const noexcept { return window_size_; }

  double cost(int d, int first, int last) const;

 private:
  int window_size_;
  int windows_;
  int frequencies_;
  std::vector<double> csym_;
  std::vector<Complex> sum_;   // (T+1) per frequency
  std::vector<double> sumsq_;  // (T+1) per frequency
};

double objective(const CpConfiguration& cfg, const SegmentCostCache& cache,
                 const PenaltyParams& pen);

/// e2 r^2 + e1 r + e0.
struct QuadCoeffs {
  double e2 = 0.0;
  double e1 = 0.0;
  double e0 = 0.0;

  double operator()(double r) const noexcept { return (e2 * r + e1) * r + e0; }

  QuadCoeffs& operator+=(const QuadCoeffs& o) noexcept {
    e2 += o.e2;
    e1 += o.e1;
    e0 += o.e0;
    return *this;
  }
  QuadCoeffs& operator-=(const QuadCoeffs& o) noexcept {
    e2 -= o.e2;
    e1 -= o.e1;
    e0 -= o.e0;
    return *this;
  }
  friend QuadCoeffs operator+(QuadCoeffs a, const QuadCoeffs& b) noexcept { return a += b; }
  friend QuadCoeffs operator-(QuadCoeffs a, const QuadCoeffs& b) noexcept { return a -= b; }
};

/// Segment cost of stft(a + b r) as a quadratic in r, computed by definition
/// from |p + q r|^2 = |q|^2 r^2 + 2 Re(p conj q) r + |p|^2.
QuadCoeffs segment_cost_quadratic(int d, int first, int last, std::span<const double> a,
                                  std::span<const double> b, int window_size);

/// Segment-cost quadratics along the line a + b r in O(1) per query.
class LineCostCache {
 public:
  LineCostCache(const SpectralSequences& fa, const SpectralSequences& fb);
  LineCostCache(std::span<const double> a, std::span<const double> b, int window_size);

  int windows() const noexcept { return windows_; }
  int frequencies() const noexcept { return frequencies_; }
  int window_size() const noexcept { return window_size_; }

  QuadCoeffs segment(int d, int first, int last) const;
  /// True when the direction has no energy at frequency d (all costs constant in r).
  bool flat(int d) const { return flat_[static_cast<std::size_t>(d)] != 0; }

 private:
  int window_size_;
  int windows_;
  int frequencies_;
  std::vector<double> csym_;
  std::vector<char> flat_;
  std::vector<Complex> sa_, sb_;
  std::vector<double> saa_, sbb_, sab_;
};

QuadCoeffs objective_quadratic(const CpConfiguration& cfg, const LineCostCache& line,
                               const PenaltyParams& pen);
QuadCoeffs objective_quadratic(const CpConfiguration& cfg, std::span<const double> a,
                               std::span<const double> b, int window_size,
                               const PenaltyParams& pen);

}  // namespace freqcp
