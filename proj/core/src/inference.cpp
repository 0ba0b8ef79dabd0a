#include "freqcp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "freqcp/errors.hpp"
#include "freqcp/truncated_chi.hpp"

namespace freqcp {

HypothesisContext build_hypothesis(const CpConfiguration& cfg, int tau, int window_size) {
  if (tau < 1 || tau >= cfg.windows() || cfg.multiplicity(tau) == 0) {
    throw DomainError("location " + std::to_string(tau) + " is not a detected change point");
  }
  HypothesisContext ctx;
  ctx.tau = tau;
  ctx.window_size = window_size;
  ctx.windows = cfg.windows();
  ctx.freqs = cfg.frequencies_at(tau);
  for (int d : ctx.freqs) {
    const auto& set = cfg.at(d);
    const auto it = std::lower_bound(set.begin(), set.end(), tau);
    const int pre = it == set.begin() ? 0 : *std::prev(it);
    const int suc = std::next(it) == set.end() ? cfg.windows() : *std::next(it);
    ctx.pre.push_back(pre);
    ctx.suc.push_back(suc);
    ctx.a_len.push_back(static_cast<double>(suc - tau) * (tau - pre) / (suc - pre));
    ctx.df += sym_coeff(d, window_size);
  }
  return ctx;
}

std::vector<Complex> mean_differences(const SpectralSequences& f, const HypothesisContext& ctx) {
  if (f.window_size() != ctx.window_size || f.windows() != ctx.windows) {
    throw ShapeError("spectra do not match the hypothesis geometry");
  }
  std::vector<Complex> g(ctx.freqs.size());
  for (std::size_t i = 0; i < ctx.freqs.size(); ++i) {
    const int d = ctx.freqs[i];
    g[i] = segment_mean(f, d, ctx.pre[i] + 1, ctx.tau) - segment_mean(f, d, ctx.tau + 1, ctx.suc[i]);
  }
  return g;
}

namespace {

double weight(const HypothesisContext& ctx, std::size_t i) {
  return ctx.a_len[i] * sym_coeff(ctx.freqs[i], ctx.window_size) / ctx.window_size;
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
}

}  // namespace

double test_statistic(const SpectralSequences& f, const HypothesisContext& ctx, double sigma) {
  check_sigma(sigma);
  const auto g = mean_differences(f, ctx);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += weight(ctx, i) * std::norm(g[i]);
  return std::sqrt(acc) / sigma;
}

double test_statistic(std::span<const double> x, const HypothesisContext& ctx, double sigma) {
  return test_statistic(stft(x, ctx.window_size), ctx, sigma);
}

std::vector<double> project(std::span<const double> x, const HypothesisContext& ctx) {
  const int m = ctx.window_size;
  if (x.size() != static_cast<std::size_t>(m) * ctx.windows) {
    throw ShapeError("series length does not match the hypothesis geometry");
  }
  const auto g = mean_differences(stft(x, m), ctx);
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int d = ctx.freqs[i];
    const double w = weight(ctx, i);
    const auto basis = dft_vector(m, d);
    const Complex gc = std::conj(g[i]);
    const double left = w / (ctx.tau - ctx.pre[i]);
    const double right = -w / (ctx.suc[i] - ctx.tau);
    for (int t = ctx.pre[i] + 1; t <= ctx.suc[i]; ++t) {
      const double scale = t <= ctx.tau ? left : right;
      double* row = out.data() + static_cast<std::size_t>(t - 1) * m;
      for (int n = 0; n < m; ++n) row[n] += scale * (basis[static_cast<std::size_t>(n)] * gc).real();
    }
  }
  return out;
}

LineDecomposition decompose(std::span<const double> x, const HypothesisContext& ctx, double sigma) {
  check_sigma(sigma);
  auto px = project(x, ctx);
  double norm2 = 0.0;
  double x2 = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    norm2 += px[n] * px[n];
    x2 += x[n] * x[n];
  }
  const double norm = std::sqrt(norm2);
  if (!(norm > 1e-14 * std::sqrt(x2))) {
    throw DegenerateStatisticError("projection of the data onto the tested direction is zero");
  }
  LineDecomposition out;
  out.a.resize(x.size());
  out.b.resize(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    out.a[n] = x[n] - px[n];
    out.b[n] = sigma * px[n] / norm;
  }
  out.z_obs = norm / sigma;
  return out;
}

IntervalUnion oc_region(const Detection& det, const LineCostCache& line, const PenaltyParams& pen,
                        double z) {
  RegionBuilder builder(z);
  const auto sink = [&](const QuadInequality& q) { builder.add(q); };
  dp_inequalities(det.initial.trace, line, pen, sink);
  sa_inequalities(det.sa, line, sink);
  return builder.finish();
}

IntervalUnion dp_region(const DpTrace& trace, const LineCostCache& line, const PenaltyParams& pen,
                        double z) {
  RegionBuilder builder(z);
  dp_inequalities(trace, line, pen, [&](const QuadInequality& q) { builder.add(q); });
  return builder.finish();
}

SearchResult parametric_search(const ReplayFn& replay, double z_max,
                               std::optional<std::pair<double, ReplayOutcome>> seed,
                               double stall_step) {
  if (!(z_max > 0.0)) throw DomainError("search limit must be positive");
  if (!(stall_step > 0.0)) throw DomainError("stall step must be positive");
  SearchResult out;
  out.z_max = z_max;

  // Every piece seen so far, with whether its run reproduces the observation.
  std::vector<std::pair<Interval, bool>> known;
  const auto remember = [&](const ReplayOutcome& r) {
    for (const auto& iv : r.region.intervals()) known.emplace_back(iv, r.match);
  };
  if (seed) remember(seed->second);

  std::vector<Interval> matched;
  double z = 0.0;
  int stalls = 0;
  while (z <= z_max) {
    const Interval* hit = nullptr;
    bool match = false;
    for (const auto& [iv, m] : known) {
      if (iv.contains(z)) {
        hit = &iv;
        match = m;
        break;
      }
    }
    Interval piece;
    if (hit) {
      piece = *hit;
    } else {
      ReplayOutcome r = replay(z);
      ++out.replays;
      match = r.match;
      const Interval* own = r.region.find(z, 1e-9);
      remember(r);
      piece = own ? *own : Interval{z, z};
    }
    if (match) matched.push_back({std::max(piece.lo, 0.0), piece.hi});
    const double step = 1e-9 * std::max(1.0, std::fabs(piece.hi));
    if (piece.hi >= z + step) {
      z = piece.hi + step;
    } else {
      z += stall_step;
      ++stalls;
    }
  }
  if (stalls > 0) {
    out.warnings.push_back("line search stalled " + std::to_string(stalls) +
                           " time(s); advanced by the fixed step");
  }
  out.region = IntervalUnion(std::move(matched)).clip(0.0, z_max);
  return out;
}

double search_limit(double z_obs, double df) {
  return std::max(z_obs + 10.0, chi_upper_quantile(1e-12, df));
}

double naive_p(double z_obs, double df) { return chi_sf(z_obs, df); }

double bonferroni_p(double p_naive, int frequencies, int windows) {
  if (frequencies < 1 || windows < 2) throw DomainError("need D >= 1 and T >= 2");
  if (p_naive <= 0.0) return 0.0;
  const double log_m = frequencies * std::numbers::ln2 + std::log1p(-std::exp2(-frequencies)) +
                       std::log(windows - 1.0);
  const double log_p = std::log(p_naive) + log_m;
  return log_p >= 0.0 ? 1.0 : std::exp(log_p);
}

namespace {

// Moves z onto the region when it sits just outside through round-off.
double snap_into(double z, const IntervalUnion& region, std::vector<std::string>& warnings) {
  if (region.contains(z)) return z;
  const double e = region.nearest_endpoint(z);
  if (std::fabs(e - z) <= 1e-8) {
    warnings.push_back("observed statistic snapped onto region boundary");
    return e;
  }
  throw InconsistencyError("observed statistic lies outside its truncation region");
}

}  // namespace

double oc_p(double z_obs, double df, const IntervalUnion& region) {
  std::vector<std::string> ignored;
  return truncated_chi_sf(snap_into(z_obs, region, ignored), df, region);
}

TestResult selective_p(std::span<const double> x, const Detection& det, int tau,
                       const InferenceConfig& config) {
  const int m = config.detect.window_size;
  const auto ctx = build_hypothesis(det.config, tau, m);
  TestResult r;
  r.tau = tau;
  r.freqs = ctx.freqs;
  r.df = ctx.df;

  LineDecomposition dec;
  try {
    dec = decompose(x, ctx, config.sigma);
  } catch (const DegenerateStatisticError& e) {
    r.valid = false;
    r.warnings.emplace_back(e.what());
    if (config.dp_only) {
      r.p_dp_only = 1.0;
      r.p_dp_only_oc = 1.0;
    }
    return r;
  }
  r.z_obs = dec.z_obs;
  r.p_naive = naive_p(r.z_obs, r.df);
  r.p_bonferroni = bonferroni_p(r.p_naive, det.config.frequencies(), det.config.windows());

  const auto pen = config.detect.penalties(det.config.windows());
  const auto fa = stft(dec.a, m);
  const auto fb = stft(dec.b, m);
  const LineCostCache line(fa, fb);

  r.oc_region = oc_region(det, line, pen, r.z_obs);
  const double z_oc = snap_into(r.z_obs, r.oc_region, r.warnings);
  r.p_oc = truncated_chi_sf(z_oc, r.df, r.oc_region);

  const double z_max = search_limit(r.z_obs, r.df);
  const auto full_replay = [&](double z) {
    const auto rerun = detect(SegmentCostCache(SpectralSequences::affine(fa, fb, z)), pen,
                              config.detect.sa);
    return ReplayOutcome{rerun.config == det.config, oc_region(rerun, line, pen, z)};
  };
  auto search = parametric_search(full_replay, z_max,
                                  std::pair{r.z_obs, ReplayOutcome{true, r.oc_region}},
                                  config.stall_step);
  r.region = std::move(search.region);
  r.replays = search.replays;
  r.warnings.insert(r.warnings.end(), search.warnings.begin(), search.warnings.end());
  r.p_selective = truncated_chi_sf(snap_into(r.z_obs, r.region, r.warnings), r.df, r.region);

  if (config.dp_only) {
    const auto dp_oc = dp_region(det.initial.trace, line, pen, r.z_obs);
    r.p_dp_only_oc = truncated_chi_sf(snap_into(r.z_obs, dp_oc, r.warnings), r.df, dp_oc);
    const auto dp_replay = [&](double z) {
      const auto init =
          initial_configuration(SegmentCostCache(SpectralSequences::affine(fa, fb, z)), pen);
      return ReplayOutcome{init.config == det.initial.config, dp_region(init.trace, line, pen, z)};
    };
    auto dp_search = parametric_search(dp_replay, z_max,
                                       std::pair{r.z_obs, ReplayOutcome{true, dp_oc}},
                                       config.stall_step);
    r.p_dp_only =
        truncated_chi_sf(snap_into(r.z_obs, dp_search.region, r.warnings), r.df, dp_search.region);
  }
  return r;
}

}  // namespace freqcp
