#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freqcp/dp_partition.hpp"
#include "freqcp/interval_union.hpp"
#include "freqcp/objective.hpp"
#include "freqcp/sa_refine.hpp"
#include "freqcp/spectral.hpp"

namespace freqcp {

/// The test of one detected union location tau: frequencies carrying it and
/// their neighbouring change points (sentinels 0 and T).
struct HypothesisContext {
  int tau = 0;
  int window_size = 0;
  int windows = 0;
  std::vector<int> freqs;
  std::vector<int> pre;
  std::vector<int> suc;
  std::vector<double> a_len;
  double df = 0.0;
};

HypothesisContext build_hypothesis(const CpConfiguration& cfg, int tau, int window_size);

/// Difference of segment means (before minus after) per frequency of ctx.
std::vector<Complex> mean_differences(const SpectralSequences& f, const HypothesisContext& ctx);

double test_statistic(const SpectralSequences& f, const HypothesisContext& ctx, double sigma);
double test_statistic(std::span<const double> x, const HypothesisContext& ctx, double sigma);

/// P x computed without forming the matrix.
std::vector<double> project(std::span<const double> x, const HypothesisContext& ctx);

/// x = a + b z with a = (I - P) x, b = sigma P x / |P x|, z = |P x| / sigma.
struct LineDecomposition {
  std::vector<double> a;
  std::vector<double> b;
  double z_obs = 0.0;
};

LineDecomposition decompose(std::span<const double> x, const HypothesisContext& ctx, double sigma);

/// Over-conditioned region of the run `det` along `line`, anchored at z.
IntervalUnion oc_region(const Detection& det, const LineCostCache& line, const PenaltyParams& pen,
                        double z);
/// Region from the Optimal Partitioning comparisons alone.
IntervalUnion dp_region(const DpTrace& trace, const LineCostCache& line, const PenaltyParams& pen,
                        double z);

struct ReplayOutcome {
  bool match = false;
  IntervalUnion region;  // contains the replayed z
};

using ReplayFn = std::function<ReplayOutcome(double)>;

struct SearchResult {
  IntervalUnion region;
  double z_max = 0.0;
  int replays = 0;
  std::vector<std::string> warnings;
};

/// Sweeps [0, z_max] replaying at each uncovered z and keeps the pieces whose
/// replay matches. `seed_z`/`seed` may supply an already-known replay.
SearchResult parametric_search(const ReplayFn& replay, double z_max,
                               std::optional<std::pair<double, ReplayOutcome>> seed = std::nullopt,
                               double stall_step = 1e-4);

/// max(z_obs + 10, chi_df upper 1e-12 quantile).
double search_limit(double z_obs, double df);

double naive_p(double z_obs, double df);
/// min(1, m p) with m = (2^D - 1)(T - 1), evaluated in log space.
double bonferroni_p(double p_naive, int frequencies, int windows);
double oc_p(double z_obs, double df, const IntervalUnion& region);

struct InferenceConfig {
  DetectConfig detect;
  double sigma = 1.0;  // noise level used by the statistic
  bool dp_only = true;
  double stall_step = 1e-4;
};

struct TestResult {
  int tau = 0;
  std::vector<int> freqs;
  double df = 0.0;
  double z_obs = 0.0;
  IntervalUnion region;
  IntervalUnion oc_region;
  double p_selective = 1.0;
  double p_oc = 1.0;
  double p_naive = 1.0;
  double p_bonferroni = 1.0;
  std::optional<double> p_dp_only;
  std::optional<double> p_dp_only_oc;
  bool valid = true;
  int replays = 0;
  std::vector<std::string> warnings;
};

/// Tests union location tau of a detection on x.
TestResult selective_p(std::span<const double> x, const Detection& det, int tau,
                       const InferenceConfig& config);

}  // namespace freqcp
