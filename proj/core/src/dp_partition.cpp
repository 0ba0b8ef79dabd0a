#include "freqcp/dp_partition.hpp"

#include <algorithm>

#include "freqcp/errors.hpp"

namespace freqcp {

PartitionResult optimal_partition(const SegmentCostCache& cache, int d, double beta) {
  const int t_count = cache.windows();
  if (t_count < 1) throw DomainError("need at least one window");
  if (beta < 0.0) throw DomainError("beta must be non-negative");
  if (d < 0 || d >= cache.frequencies()) throw DomainError("frequency out of range");

  std::vector<double> best(static_cast<std::size_t>(t_count) + 1, 0.0);
  PartitionResult out;
  out.best_split.assign(static_cast<std::size_t>(t_count) + 1, -1);
  best[0] = -beta;
  for (int t = 1; t <= t_count; ++t) {
    double value = kInf;
    int arg = 0;
    for (int s = 0; s < t; ++s) {
      const double v = best[static_cast<std::size_t>(s)] + cache.cost(d, s + 1, t) + beta;
      if (v < value) {
        value = v;
        arg = s;
      }
    }
    best[static_cast<std::size_t>(t)] = value;
    out.best_split[static_cast<std::size_t>(t)] = arg;
  }
  out.optimum = best[static_cast<std::size_t>(t_count)];
  out.change_points = backtrack(out.best_split);
  return out;
}

std::vector<int> backtrack(const std::vector<int>& best_split) {
  std::vector<int> cps;
  int t = static_cast<int>(best_split.size()) - 1;
  while (t > 0) {
    const int s = best_split[static_cast<std::size_t>(t)];
    if (s > 0) cps.push_back(s);
    t = s;
  }
  std::reverse(cps.begin(), cps.end());
  return cps;
}

InitialSolution initial_configuration(const SegmentCostCache& cache, const PenaltyParams& pen) {
  if (static_cast<int>(pen.beta.size()) != cache.frequencies()) {
    throw ShapeError("penalty vector does not match frequency count");
  }
  InitialSolution out{CpConfiguration(cache.frequencies(), cache.windows()), {}, {}};
  out.trace.windows = cache.windows();
  out.trace.best_split.resize(static_cast<std::size_t>(cache.frequencies()));
  for (int d = 0; d < cache.frequencies(); ++d) {
    auto part = optimal_partition(cache, d, pen.beta[static_cast<std::size_t>(d)]);
    if (!part.change_points.empty()) out.active.push_back(d);
    out.config.assign(d, std::move(part.change_points));
    out.trace.best_split[static_cast<std::size_t>(d)] = std::move(part.best_split);
  }
  return out;
}

void dp_inequalities(const DpTrace& trace, const LineCostCache& line, const PenaltyParams& pen,
                     const InequalitySink& sink) {
  if (trace.windows != line.windows() ||
      static_cast<int>(trace.best_split.size()) != line.frequencies()) {
    throw ShapeError("DP trace does not match line geometry");
  }
  const int t_count = trace.windows;
  std::vector<QuadCoeffs> opt(static_cast<std::size_t>(t_count) + 1);
  for (int d = 0; d < line.frequencies(); ++d) {
    if (line.flat(d)) continue;
    const auto& split = trace.best_split[static_cast<std::size_t>(d)];
    const double beta = pen.beta[static_cast<std::size_t>(d)];
    opt[0] = {0.0, 0.0, -beta};
    for (int t = 1; t <= t_count; ++t) {
      const int chosen = split[static_cast<std::size_t>(t)];
      const QuadCoeffs winner = opt[static_cast<std::size_t>(chosen)] + line.segment(d, chosen + 1, t);
      for (int s = 0; s < t; ++s) {
        if (s == chosen) continue;
        const QuadCoeffs rival = opt[static_cast<std::size_t>(s)] + line.segment(d, s + 1, t);
        sink({winner - rival, s < chosen ? Relation::Less : Relation::LessEqual});
      }
      opt[static_cast<std::size_t>(t)] = winner;
      opt[static_cast<std::size_t>(t)].e0 += beta;
    }
  }
}

std::vector<QuadInequality> dp_inequalities(const DpTrace& trace, const LineCostCache& line,
                                            const PenaltyParams& pen) {
  std::vector<QuadInequality> out;
  dp_inequalities(trace, line, pen, [&](const QuadInequality& q) { out.push_back(q); });
  return out;
}

}  // namespace freqcp
