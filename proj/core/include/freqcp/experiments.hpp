#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "freqcp/sa_refine.hpp"
#include "freqcp/synthetic.hpp"

namespace freqcp {

enum class ExperimentKind { TypeI, Power };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::TypeI;
  int window_size = 8;
  int windows = 30;
  double sigma = 1.0;
  double kappa = 0.5;
  SaParams sa;
  std::uint64_t seed = 0;  // master seed; trial seeds are derived from it
  int trials = 200;
  int target_tests = 0;  // > 0: keep drawing trials until this many tests (capped by max_trials)
  int max_trials = 0;
  double alpha = 0.05;
  std::vector<double> deltas;  // power grid
  std::vector<double> kappas;  // optional sweep; empty means {kappa}
  std::array<int, 3> t1{9, 10, 11};
  std::array<int, 3> t2{19, 20, 21};
  NoiseKind noise = NoiseKind::Gaussian;
  double rho = 0.0;
  bool estimate_sigma = false;
  bool dp_only = true;
  int threads = 1;
};

struct TrialRecord {
  int group = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  int detected = 0;  // size of the detected union
  bool tested = false;
  bool correct = false;
  bool valid = true;
  int tau = 0;
  std::vector<int> freqs;
  double sigma_used = 0.0;
  double z_obs = 0.0;
  double p_selective = 1.0;
  double p_oc = 1.0;
  double p_naive = 1.0;
  double p_bonferroni = 1.0;
  std::optional<double> p_dp_only;
  std::optional<double> p_dp_only_oc;
  int replays = 0;
  std::string note;
  double wall_ms = 0.0;
};

struct MethodRate {
  std::string method;
  int rejections = 0;
  int n = 0;
  double rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
};

struct GroupSummary {
  std::string label;
  double delta = 0.0;
  double kappa = 0.0;
  int trials = 0;
  int detections = 0;
  int tests = 0;  // type I: tested locations; power: correctly detected and tested
  std::vector<MethodRate> rates;
  double ks_statistic = 0.0;  // selective p-values against U(0, 1)
  double ks_pvalue = 1.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<GroupSummary> groups;
  std::vector<TrialRecord> records;
  double elapsed_s = 0.0;
};

ExperimentReport run_type1(const ExperimentConfig& config);
ExperimentReport run_power(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Exact (Clopper-Pearson) two-sided interval for k successes in n trials.
std::pair<double, double> binomial_interval(int k, int n, double level = 0.95);

/// One-sample Kolmogorov-Smirnov against U(0, 1): statistic and p-value.
std::pair<double, double> ks_uniform(std::vector<double> sample);

/// Rejection-rate aggregates recomputed from the records of one group.
GroupSummary summarize(const std::vector<TrialRecord>& records, int group, double alpha,
                       bool dp_only);

const std::vector<std::string>& method_names();
/// The p-value of `method` in a record, if that method was computed.
std::optional<double> method_p(const TrialRecord& r, const std::string& method);

}  // namespace freqcp
