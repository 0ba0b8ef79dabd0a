#pragma once

// Independent reference computations used by the tests. None of these call
// into the code paths they are used to check.

#include <algorithm>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "freqcp/dp_partition.hpp"
#include "freqcp/inference.hpp"
#include "freqcp/objective.hpp"

namespace oracle {

using freqcp::CpConfiguration;
using freqcp::HypothesisContext;
using freqcp::SegmentCostCache;

inline std::vector<double> gaussian_series(std::mt19937_64& gen, std::size_t n, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = normal(gen);
  return x;
}

/// The projection assembled as a complex matrix, summing v v^H over every
/// tested bin and its mirror M - d, each weighted a_len / M.
inline Eigen::MatrixXcd complex_projection(const HypothesisContext& ctx) {
  const int m = ctx.window_size;
  const int n = m * ctx.windows;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < ctx.freqs.size(); ++i) {
    std::vector<int> bins{ctx.freqs[i]};
    if (ctx.freqs[i] != 0 && 2 * ctx.freqs[i] != m) bins.push_back(m - ctx.freqs[i]);
    const double weight = ctx.a_len[i] / m;
    for (int d : bins) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
      for (int t = ctx.pre[i] + 1; t <= ctx.suc[i]; ++t) {
        const double scale = t <= ctx.tau ? 1.0 / (ctx.tau - ctx.pre[i]) : -1.0 / (ctx.suc[i] - ctx.tau);
        for (int k = 0; k < m; ++k) {
          v((t - 1) * m + k) = scale * std::polar(1.0, -2.0 * std::numbers::pi * d * k / m);
        }
      }
      p += weight * v * v.adjoint();
    }
  }
  return p;
}

struct Partition {
  double value = 0.0;
  std::vector<int> cps;
};

/// Exhaustive minimum over all subsets of {1..T-1}. Sums in the same order as
/// a left-to-right recursion so exact equality is meaningful. Among equal
/// values the winner has the smallest last change point, then the smallest
/// second-to-last, and so on.
inline Partition brute_force_partition(const SegmentCostCache& cache, int d, double beta) {
  const int t_count = cache.windows();
  Partition best;
  bool have = false;
  for (unsigned mask = 0; mask < (1u << (t_count - 1)); ++mask) {
    std::vector<int> cps;
    for (int t = 1; t < t_count; ++t) {
      if (mask & (1u << (t - 1))) cps.push_back(t);
    }
    double v = -beta;
    int prev = 0;
    for (int c : cps) {
      v = v + cache.cost(d, prev + 1, c) + beta;
      prev = c;
    }
    v = v + cache.cost(d, prev + 1, t_count) + beta;
    const auto rev_less = [](std::vector<int> a, std::vector<int> b) {
      std::reverse(a.begin(), a.end());
      std::reverse(b.begin(), b.end());
      a.push_back(0);
      b.push_back(0);
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    };
    if (!have || v < best.value || (v == best.value && rev_less(cps, best.cps))) {
      best = {v, cps};
      have = true;
    }
  }
  return best;
}

/// Exhaustive minimum of the full objective over every configuration.
inline CpConfiguration brute_force_configuration(const SegmentCostCache& cache,
                                                 const freqcp::PenaltyParams& pen) {
  const int d_count = cache.frequencies();
  const int slots = cache.windows() - 1;
  const unsigned long total = 1ul << (slots * d_count);
  CpConfiguration best(d_count, cache.windows());
  double best_value = freqcp::objective(best, cache, pen);
  for (unsigned long mask = 1; mask < total; ++mask) {
    CpConfiguration cfg(d_count, cache.windows());
    for (int d = 0; d < d_count; ++d) {
      for (int t = 1; t <= slots; ++t) {
        if (mask & (1ul << (d * slots + t - 1))) cfg.insert(d, t);
      }
    }
    const double v = freqcp::objective(cfg, cache, pen);
    if (v < best_value) {
      best_value = v;
      best = cfg;
    }
  }
  return best;
}

}  // namespace oracle
