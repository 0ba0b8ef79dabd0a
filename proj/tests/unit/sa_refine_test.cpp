#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "freqcp/errors.hpp"
#include "freqcp/sa_refine.hpp"
#include "oracles.hpp"

using namespace freqcp;

namespace {

CpConfiguration random_configuration(std::mt19937_64& gen, int d_count, int t_count, double p) {
  std::bernoulli_distribution coin(p);
  CpConfiguration cfg(d_count, t_count);
  for (int d = 0; d < d_count; ++d) {
    for (int t = 1; t < t_count; ++t) {
      if (coin(gen)) cfg.insert(d, t);
    }
  }
  return cfg;
}

double delta_from_segments(const EnergyDelta& e, const SegmentCostCache& cache) {
  double v = e.penalty;
  for (const auto& s : e.added) v += cache.cost(s.d, s.first, s.last);
  for (const auto& s : e.removed) v -= cache.cost(s.d, s.first, s.last);
  return v;
}

std::vector<double> shifted_series(std::mt19937_64& gen, int m, int t_count, int at, double shift) {
  auto x = oracle::gaussian_series(gen, static_cast<std::size_t>(m) * t_count, 0.2);
  for (int n = at * m; n < t_count * m; ++n) {
    x[static_cast<std::size_t>(n)] += shift * std::cos(2.0 * std::numbers::pi * (n % m) / m);
  }
  return x;
}

}  // namespace

TEST_CASE("metropolis rule") {
  CHECK(metropolis(-1.0, 1.0, 0.5));
  CHECK_FALSE(metropolis(1.0, 1.0, 0.5));
  CHECK(metropolis(1.0, 1.0, 0.3));
  CHECK_FALSE(metropolis(0.0, 1.0, 1.0));  // strict
  CHECK(metropolis(30.0, 1.0, 0.0));       // xi = 0 treated as 2^-53
  CHECK_FALSE(metropolis(37.0, 1.0, 0.0));
  CHECK_THROWS_AS(metropolis(0.0, 0.0, 0.5), DomainError);
}

TEST_CASE("impossible proposals are skipped") {
  Rng rng(1);
  CpConfiguration empty(2, 4);
  CHECK_FALSE(propose(empty, OpKind::Remove, 0, rng));
  CHECK_FALSE(propose(empty, OpKind::Move, 0, rng));
  CHECK(propose(empty, OpKind::Add, 0, rng));
  CHECK_FALSE(propose_merge(empty, rng));

  CpConfiguration full(2, 4);
  full.assign(1, {1, 2, 3});
  CHECK_FALSE(propose(full, OpKind::Add, 1, rng));
  // no room between neighbours: a move can only draw its own position
  for (int i = 0; i < 20; ++i) CHECK_FALSE(propose(full, OpKind::Move, 1, rng));

  CpConfiguration one(2, 4);
  one.insert(0, 2);
  one.insert(1, 2);
  CHECK_FALSE(propose_merge(one, rng));
  CHECK_THROWS_AS(propose(one, OpKind::Merge, 0, rng), DomainError);
}

TEST_CASE("proposal distributions") {
  Rng rng(3);
  CpConfiguration cfg(1, 10);
  cfg.assign(0, {2, 6, 7});
  std::map<int, int> adds;
  std::map<std::pair<int, int>, int> moves;
  int move_skips = 0;
  for (int i = 0; i < 6000; ++i) {
    const auto a = propose(cfg, OpKind::Add, 0, rng);
    REQUIRE(a);
    ++adds[a->to];
    const auto mv = propose(cfg, OpKind::Move, 0, rng);
    if (!mv) {
      ++move_skips;
      continue;
    }
    ++moves[{mv->from, mv->to}];
  }
  CHECK(adds.size() == 6);
  for (const auto& [t, n] : adds) {
    CHECK_FALSE(cfg.contains(0, t));
    CHECK(n == doctest::Approx(1000).epsilon(0.15));
  }
  // 2 moves within 1..5, 6 within 3..6, 7 within 7..9
  std::set<std::pair<int, int>> expected{{2, 1}, {2, 3}, {2, 4}, {2, 5}, {6, 3},
                                         {6, 4}, {6, 5}, {7, 8}, {7, 9}};
  std::set<std::pair<int, int>> seen;
  for (const auto& [k, n] : moves) seen.insert(k);
  CHECK(seen == expected);
  // skips: 2 -> 2 (1/5), 6 -> 6 (1/4), 7 -> 7 (1/3), each picked with prob 1/3
  CHECK(move_skips == doctest::Approx(6000.0 * (0.2 + 0.25 + 1.0 / 3) / 3).epsilon(0.1));
}

TEST_CASE("merge joins two adjacent union locations") {
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    CpConfiguration cfg(3, 12);
    cfg.assign(0, {3, 8});
    cfg.assign(1, {5});
    cfg.assign(2, {3, 5, 10});
    const auto mv = propose_merge(cfg, rng);
    REQUIRE(mv);
    CHECK(mv->kind == OpKind::Merge);
    const auto locs = cfg.union_locations();
    const auto it = std::find(locs.begin(), locs.end(), mv->from);
    REQUIRE(it != locs.end());
    CHECK(*std::next(it) == mv->to);
    CHECK(mv->merge_at >= mv->from);
    CHECK(mv->merge_at <= mv->to);
    CpConfiguration after = cfg;
    apply(after, *mv);
    CHECK(after.total() == cfg.total() - 1);
    for (int d = 0; d < 3; ++d) {
      const bool had = cfg.contains(d, mv->from) || cfg.contains(d, mv->to);
      CHECK(after.contains(d, mv->merge_at) == (had || cfg.contains(d, mv->merge_at)));
      const int lost = (cfg.contains(d, mv->from) && cfg.contains(d, mv->to)) ? 1 : 0;
      CHECK(after.count(d) == cfg.count(d) - lost);
    }
  }
  // endpoints of the closed range are reachable
  std::set<int> targets;
  CpConfiguration two(1, 6);
  two.assign(0, {2, 4});
  for (int i = 0; i < 300; ++i) targets.insert(propose_merge(two, rng)->merge_at);
  CHECK(targets == std::set<int>{2, 3, 4});
}

TEST_CASE("segment-level energy deltas equal objective differences") {
  std::mt19937_64 gen(9);
  Rng rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 2 + rep % 7;
    const int t_count = 3 + rep % 9;
    const auto f = stft(oracle::gaussian_series(gen, static_cast<std::size_t>(m) * t_count), m);
    const SegmentCostCache cache(f);
    const auto pen = bic_penalties(m, 0.5, t_count, 0.25 * (rep % 4));
    const auto cfg = random_configuration(gen, f.frequencies(), t_count, 0.3);
    const double base = objective(cfg, cache, pen);
    std::optional<Move> mv;
    const int kind = rep % 4;
    if (kind == 3) {
      mv = propose_merge(cfg, rng);
    } else {
      const int d = static_cast<int>(rng.index(static_cast<std::uint64_t>(f.frequencies())));
      mv = propose(cfg, static_cast<OpKind>(kind), d, rng);
    }
    if (!mv) continue;
    CpConfiguration after = cfg;
    apply(after, *mv);
    const double direct = objective(after, cache, pen) - base;
    const double local = delta_from_segments(energy_delta(cfg, *mv, pen), cache);
    CHECK(local == doctest::Approx(direct).epsilon(1e-9).scale(std::fabs(base) + 1.0));
    CHECK(penalty(after, pen) - penalty(cfg, pen) ==
          doctest::Approx(energy_delta(cfg, *mv, pen).penalty));
  }
}

TEST_CASE("detection is deterministic and replayable") {
  std::mt19937_64 gen(21);
  const auto x = shifted_series(gen, 8, 16, 7, 1.5);
  DetectConfig cfg;
  cfg.sigma2 = 0.04;
  cfg.sa.seed = 77;
  const auto a = detect(TimeSeries{x, 1.0}, cfg);
  const auto b = detect(TimeSeries{x, 1.0}, cfg);
  CHECK(a.config == b.config);
  REQUIRE(a.sa.records.size() == b.sa.records.size());
  for (std::size_t i = 0; i < a.sa.records.size(); ++i) {
    CHECK(a.sa.records[i].xi == b.sa.records[i].xi);
    CHECK(a.sa.records[i].accepted == b.sa.records[i].accepted);
  }
  CHECK(replay(a.initial.config, a.sa) == a.config);
  CHECK(a.sa.preliminary_levels >= 1);
  CHECK(a.sa.anneal_levels >= 1);

  // the last annealing level has no acceptance
  const int last = a.sa.anneal_levels - 1;
  for (const auto& r : a.sa.records) {
    if (r.phase == Phase::Anneal && r.level == last) CHECK_FALSE(r.accepted);
  }
  // the starting temperature comes from heating c0_plus
  const double steps = std::log(a.sa.initial_temperature / cfg.sa.c0_plus) / std::log(cfg.sa.lambda_plus);
  CHECK(steps == doctest::Approx(a.sa.preliminary_levels - 1));
}

TEST_CASE("annealing steps per level") {
  std::mt19937_64 gen(23);
  const int t_count = 10;
  const auto x = shifted_series(gen, 4, t_count, 4, 2.0);
  DetectConfig cfg;
  cfg.window_size = 4;
  cfg.sigma2 = 0.04;
  const auto det = detect(TimeSeries{x, 1.0}, cfg);
  REQUIRE_FALSE(det.initial.active.empty());
  std::map<std::pair<int, int>, int> per_level;
  std::map<std::pair<int, int>, int> merges;
  for (const auto& r : det.sa.records) {
    ++per_level[{static_cast<int>(r.phase), r.level}];
    if (r.kind == OpKind::Merge) ++merges[{static_cast<int>(r.phase), r.level}];
    if (r.kind != OpKind::Merge && !r.skipped) {
      CHECK(std::find(det.initial.active.begin(), det.initial.active.end(), r.move.d) !=
            det.initial.active.end());
    }
  }
  for (const auto& [k, n] : per_level) {
    CHECK(n == static_cast<int>(det.initial.active.size()) * t_count + 1);
    CHECK(merges[k] == 1);
  }
}

TEST_CASE("no detection without active frequencies") {
  const std::vector<double> flat(64, 1.0);
  const auto det = detect(TimeSeries{flat, 1.0}, DetectConfig{});
  CHECK(det.config.total() == 0);
  CHECK(det.sa.records.empty());
}

TEST_CASE("Metropolis inequalities hold at the generating point") {
  std::mt19937_64 gen(31);
  const int m = 4;
  const int t_count = 12;
  for (int rep = 0; rep < 5; ++rep) {
    const auto a = shifted_series(gen, m, t_count, 5, 1.0);
    const auto b = oracle::gaussian_series(gen, a.size(), 0.3);
    const LineCostCache line(a, b, m);
    for (double z : {0.0, 0.8}) {
      std::vector<double> x(a.size());
      for (std::size_t n = 0; n < x.size(); ++n) x[n] = a[n] + z * b[n];
      DetectConfig cfg;
      cfg.window_size = m;
      cfg.sigma2 = 0.04;
      cfg.sa.seed = static_cast<std::uint64_t>(rep);
      const auto det = detect(TimeSeries{x, 1.0}, cfg);
      const auto ineqs = sa_inequalities(det.sa, line);
      std::size_t decisions = 0;
      for (const auto& r : det.sa.records) decisions += r.skipped ? 0 : 1;
      CHECK(ineqs.size() == decisions);
      int bad = 0;
      for (const auto& q : ineqs) {
        const double v = q.q(z);
        const double scale = 1e-9 * (std::fabs(q.q.e0) + 1.0);
        if (q.relation == Relation::Less ? v >= scale : v < -scale) ++bad;
      }
      CHECK(bad == 0);
      const auto pre = sa_inequalities(det.sa, line, Phase::Preliminary);
      const auto ann = sa_inequalities(det.sa, line, Phase::Anneal);
      CHECK(pre.size() + ann.size() == ineqs.size());
    }
  }
}

// Levels here have only |active| * 6 steps, so a level in which every draw is
// skipped or rejected can end the run early; only the lower bound is exact.
TEST_CASE("small instances never beat the exhaustive optimum") {
  std::mt19937_64 gen(41);
  int hits = 0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    const int m = 3 + rep % 2;  // two or three frequencies
    const int t_count = 6;
    const auto x = shifted_series(gen, m, t_count, 2 + rep % 3, 3.0);
    const SegmentCostCache cache(stft(x, m));
    const auto pen = bic_penalties(m, 0.04, t_count, 0.5);
    SaParams params;
    params.seed = static_cast<std::uint64_t>(rep);
    const auto det = detect(cache, pen, params);
    const auto best = oracle::brute_force_configuration(cache, pen);
    const double opt = objective(best, cache, pen);
    CHECK(objective(det.config, cache, pen) >= opt - 1e-9 * std::fabs(opt));
    hits += det.config == best ? 1 : 0;
  }
  CHECK(hits > 0);
}

TEST_CASE("parameter validation") {
  SaParams p;
  CHECK_NOTHROW(p.validate());
  p.lambda = 1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.lambda_plus = 1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.target_eta = 1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.c0_plus = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}
