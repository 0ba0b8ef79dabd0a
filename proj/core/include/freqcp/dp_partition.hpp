#pragma once

#include <functional>
#include <vector>

#include "freqcp/interval_union.hpp"
#include "freqcp/objective.hpp"

namespace freqcp {

/// Bellman argmins of one Optimal Partitioning run per frequency.
///
/// best_split[d][t] (t = 1..T) is the start s* of the last segment (s*+1..t)
/// in the optimal partition of windows 1..t. Every other s in [0, t-1] is an
/// implicit competitor. Index 0 is unused.
struct DpTrace {
  int windows = 0;
  std::vector<std::vector<int>> best_split;
};

struct PartitionResult {
  std::vector<int> change_points;
  std::vector<int> best_split;  // size T+1
  double optimum = 0.0;         // sum of costs + beta * K
};

/// Minimises sum of segment costs + beta * K for one frequency. Ties go to
/// the smallest split index.
PartitionResult optimal_partition(const SegmentCostCache& cache, int d, double beta);

/// Follows best_split back from T.
std::vector<int> backtrack(const std::vector<int>& best_split);

struct InitialSolution {
  CpConfiguration config;
  std::vector<int> active;  // frequencies with at least one change point
  DpTrace trace;
};

InitialSolution initial_configuration(const SegmentCostCache& cache, const PenaltyParams& pen);

using InequalitySink = std::function<void(const QuadInequality&)>;

/// Every Bellman comparison of the trace, as inequalities along the line
/// described by `line`. Frequencies along which the line is flat produce only
/// constant inequalities and are skipped.
void dp_inequalities(const DpTrace& trace, const LineCostCache& line, const PenaltyParams& pen,
                     const InequalitySink& sink);
std::vector<QuadInequality> dp_inequalities(const DpTrace& trace, const LineCostCache& line,
                                            const PenaltyParams& pen);

}  // namespace freqcp
