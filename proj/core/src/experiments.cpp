#include "freqcp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include <boost/math/distributions/beta.hpp>

#include "freqcp/errors.hpp"
#include "freqcp/inference.hpp"

namespace freqcp {

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"selective", "oc",      "naive",
                                              "bonferroni", "dp_only", "dp_only_oc"};
  return names;
}

std::optional<double> method_p(const TrialRecord& r, const std::string& method) {
  if (method == "selective") return r.p_selective;
  if (method == "oc") return r.p_oc;
  if (method == "naive") return r.p_naive;
  if (method == "bonferroni") return r.p_bonferroni;
  if (method == "dp_only") return r.p_dp_only;
  if (method == "dp_only_oc") return r.p_dp_only_oc;
  throw DomainError("unknown method " + method);
}

std::pair<double, double> binomial_interval(int k, int n, double level) {
  if (n <= 0) return {0.0, 1.0};
  const double tail = 0.5 * (1.0 - level);
  using boost::math::beta_distribution;
  const double lo = k == 0 ? 0.0 : boost::math::quantile(beta_distribution<>(k, n - k + 1), tail);
  const double hi = k == n ? 1.0 : boost::math::quantile(beta_distribution<>(k + 1, n - k), 1.0 - tail);
  return {lo, hi};
}

std::pair<double, double> ks_uniform(std::vector<double> sample) {
  if (sample.empty()) return {0.0, 1.0};
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double u = std::clamp(sample[i], 0.0, 1.0);
    stat = std::max({stat, (i + 1) / n - u, u - i / n});
  }
  // Kolmogorov limit law with Stephens' finite-sample correction.
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * stat;
  if (lambda < 1e-3) return {stat, 1.0};
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return {stat, std::clamp(2.0 * p, 0.0, 1.0)};
}

GroupSummary summarize(const std::vector<TrialRecord>& records, int group, double alpha,
                       bool dp_only) {
  GroupSummary g;
  std::vector<double> selective;
  for (const auto& r : records) {
    if (r.group != group) continue;
    ++g.trials;
    if (r.detected > 0) ++g.detections;
    if (!r.tested || !r.valid) continue;
    ++g.tests;
    selective.push_back(r.p_selective);
  }
  for (const auto& name : method_names()) {
    if (!dp_only && (name == "dp_only" || name == "dp_only_oc")) continue;
    MethodRate m;
    m.method = name;
    for (const auto& r : records) {
      if (r.group != group || !r.tested || !r.valid) continue;
      const auto p = method_p(r, name);
      if (!p) continue;
      ++m.n;
      if (*p <= alpha) ++m.rejections;
    }
    m.rate = m.n > 0 ? static_cast<double>(m.rejections) / m.n : 0.0;
    std::tie(m.ci_lo, m.ci_hi) = binomial_interval(m.rejections, m.n);
    g.rates.push_back(m);
  }
  std::tie(g.ks_statistic, g.ks_pvalue) = ks_uniform(selective);
  return g;
}

namespace {

struct GroupSetting {
  double delta = 0.0;
  double kappa = 0.5;
};

TrialRecord run_trial(const ExperimentConfig& cfg, const GroupSetting& gs, int group, int trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.group = group;
  rec.trial = trial;
  rec.seed = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(group)),
                         static_cast<std::uint64_t>(trial));
  Rng rng(rec.seed);

  SyntheticSpec spec;
  spec.window_size = cfg.window_size;
  spec.windows = cfg.windows;
  spec.sigma = cfg.sigma;
  spec.delta = gs.delta;
  spec.t1 = cfg.t1;
  spec.t2 = cfg.t2;
  spec.noise = cfg.noise;
  spec.rho = cfg.rho;
  draw_planted(spec, rng);
  const auto x = generate(spec, rng);

  InferenceConfig ic;
  ic.detect.window_size = cfg.window_size;
  ic.detect.sigma2 = cfg.sigma * cfg.sigma;
  ic.detect.kappa = gs.kappa;
  ic.detect.sa = cfg.sa;
  ic.detect.sa.seed = derive_seed(rec.seed, 1);
  ic.dp_only = cfg.dp_only;

  const auto f = stft(x, cfg.window_size);
  const auto det = detect(f, ic.detect);
  const auto locs = det.config.union_locations();
  rec.detected = static_cast<int>(locs.size());
  const auto finish = [&] {
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
  };
  if (locs.empty()) return finish();

  rec.tau = locs[rng.index(locs.size())];
  const auto ctx = build_hypothesis(det.config, rec.tau, cfg.window_size);
  rec.freqs = ctx.freqs;
  rec.correct = gs.delta > 0.0 && is_correct_detection(ctx, spec);
  if (cfg.kind == ExperimentKind::Power && !rec.correct) return finish();

  rec.tested = true;
  try {
    ic.sigma = cfg.estimate_sigma ? estimate_variance(f, det.config) : cfg.sigma;
    rec.sigma_used = ic.sigma;
    const auto res = selective_p(x.samples, det, rec.tau, ic);
    rec.valid = res.valid;
    rec.z_obs = res.z_obs;
    rec.p_selective = res.p_selective;
    rec.p_oc = res.p_oc;
    rec.p_naive = res.p_naive;
    rec.p_bonferroni = res.p_bonferroni;
    rec.p_dp_only = res.p_dp_only;
    rec.p_dp_only_oc = res.p_dp_only_oc;
    rec.replays = res.replays;
    if (!res.warnings.empty()) rec.note = res.warnings.front();
  } catch (const std::exception& e) {
    rec.valid = false;
    rec.note = e.what();
  }
  return finish();
}

// Runs trials 0, 1, ... of one group in ordered batches; stops early once the
// requested number of valid tests is reached.
void run_group(const ExperimentConfig& cfg, const GroupSetting& gs, int group,
               std::vector<TrialRecord>& out) {
  const bool targeted = cfg.target_tests > 0;
  const int limit = targeted ? (cfg.max_trials > 0 ? cfg.max_trials : 50 * cfg.target_tests)
                             : cfg.trials;
  const int threads = std::max(1, cfg.threads);
  const int batch = threads == 1 ? 1 : threads * 4;
  int tests = 0;
  for (int begin = 0; begin < limit; begin += batch) {
    const int end = std::min(limit, begin + batch);
    std::vector<TrialRecord> results(static_cast<std::size_t>(end - begin));
    if (threads == 1) {
      for (int i = begin; i < end; ++i) results[static_cast<std::size_t>(i - begin)] = run_trial(cfg, gs, group, i);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          for (int i = begin + w; i < end; i += threads) {
            results[static_cast<std::size_t>(i - begin)] = run_trial(cfg, gs, group, i);
          }
        });
      }
      for (auto& t : pool) t.join();
    }
    for (auto& r : results) {
      const bool counts = r.tested && r.valid;
      out.push_back(std::move(r));
      if (counts) ++tests;
      if (targeted && tests >= cfg.target_tests) return;
    }
  }
}

ExperimentReport run_groups(const ExperimentConfig& cfg, const std::vector<GroupSetting>& groups) {
  cfg.sa.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = cfg;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    run_group(cfg, groups[g], static_cast<int>(g), report.records);
    auto summary = summarize(report.records, static_cast<int>(g), cfg.alpha, cfg.dp_only);
    summary.delta = groups[g].delta;
    summary.kappa = groups[g].kappa;
    char label[64];
    std::snprintf(label, sizeof label, "delta=%g kappa=%g", groups[g].delta, groups[g].kappa);
    summary.label = label;
    report.groups.push_back(std::move(summary));
  }
  report.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<double> kappa_grid(const ExperimentConfig& cfg) {
  return cfg.kappas.empty() ? std::vector<double>{cfg.kappa} : cfg.kappas;
}

}  // namespace

ExperimentReport run_type1(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.kind = ExperimentKind::TypeI;
  std::vector<GroupSetting> groups;
  for (double k : kappa_grid(cfg)) groups.push_back({0.0, k});
  return run_groups(cfg, groups);
}

ExperimentReport run_power(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.kind = ExperimentKind::Power;
  if (cfg.deltas.empty()) throw DomainError("power experiment needs at least one delta");
  std::vector<GroupSetting> groups;
  for (double d : cfg.deltas) {
    if (!(d > 0.0)) throw DomainError("power experiment needs delta > 0");
    for (double k : kappa_grid(cfg)) groups.push_back({d, k});
  }
  return run_groups(cfg, groups);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  return config.kind == ExperimentKind::TypeI ? run_type1(config) : run_power(config);
}

}  // namespace freqcp
