#include <doctest.h>

#include <cmath>
#include <random>

#include "freqcp/errors.hpp"
#include "freqcp/objective.hpp"
#include "oracles.hpp"

using namespace freqcp;

TEST_CASE("CpConfiguration bookkeeping") {
  CpConfiguration cfg(3, 10);
  cfg.insert(1, 4);
  cfg.insert(2, 4);
  cfg.insert(2, 7);
  CHECK(cfg.total() == 2);
  CHECK(cfg.multiplicity(4) == 2);
  CHECK(cfg.union_locations() == std::vector<int>{4, 7});
  CHECK(cfg.frequencies_at(4) == std::vector<int>{1, 2});
  CHECK(cfg.active_frequencies() == std::vector<int>{1, 2});
  cfg.erase(2, 4);
  CHECK(cfg.total() == 2);
  cfg.erase(1, 4);
  CHECK(cfg.total() == 1);
  CHECK_THROWS_AS(cfg.insert(0, 0), DomainError);
  CHECK_THROWS_AS(cfg.insert(0, 10), DomainError);
}

TEST_CASE("segment_cost definition") {
  SpectralSequences f(4, 2);
  f(0, 1) = 0.0;
  f(1, 1) = 2.0;
  CHECK(segment_cost(f, 1, 1, 2) == doctest::Approx(4.0));
  CHECK(segment_cost(f, 1, 2, 2) == 0.0);
  f(0, 0) = 3.0;
  f(1, 0) = 3.0;
  CHECK(segment_cost(f, 0, 1, 2) == doctest::Approx(0.0));
}

TEST_CASE("penalty formulas") {
  const auto beta = bic_beta(512, 1.0, 60);
  const double ln_t = std::log(60.0);
  CHECK(beta[0] == doctest::Approx(2 * 512 * ln_t));
  CHECK(beta[7] == doctest::Approx(3 * 512 * ln_t));
  CHECK(beta[256] == doctest::Approx(2 * 512 * ln_t));
  const auto doubled = bic_beta(512, 2.0, 60);
  for (std::size_t d = 0; d < beta.size(); ++d) CHECK(doubled[d] == doctest::Approx(2 * beta[d]));
  CHECK(gamma_penalty(0.0, 512, 1.0, 60) == 0.0);
  CHECK(gamma_penalty(0.5, 512, 1.0, 60) == doctest::Approx(256 * ln_t));
  CHECK_THROWS_AS(gamma_penalty(-1.0, 8, 1.0, 10), DomainError);
}

TEST_CASE("objective of simple configurations") {
  std::mt19937_64 gen(1);
  const auto x = oracle::gaussian_series(gen, 8 * 10);
  const auto f = stft(x, 8);
  const auto pen = bic_penalties(8, 1.0, 10, 0.5);
  CpConfiguration cfg(f.frequencies(), 10);
  double sum = 0.0;
  for (int d = 0; d < f.frequencies(); ++d) sum += segment_cost(f, d, 1, 10);
  CHECK(objective(cfg, f, pen) == doctest::Approx(sum));

  CHECK(objective(cfg, stft(std::vector<double>(80, 2.0), 8), pen) == doctest::Approx(0.0));

  // one added change point: penalty part grows by beta (+ gamma when the union grows)
  CpConfiguration a = cfg;
  a.insert(1, 4);
  CpConfiguration b = a;
  b.insert(2, 4);
  CpConfiguration c = a;
  c.insert(2, 6);
  CHECK(penalty(a, pen) - penalty(cfg, pen) == doctest::Approx(pen.beta[1] + pen.gamma));
  CHECK(penalty(b, pen) - penalty(a, pen) == doctest::Approx(pen.beta[2]));
  CHECK(penalty(c, pen) - penalty(a, pen) == doctest::Approx(pen.beta[2] + pen.gamma));
}

TEST_CASE("cached costs match the definition and splitting never raises cost") {
  std::mt19937_64 gen(2);
  for (int m : {2, 5, 8}) {
    const int t_count = 9;
    auto x = oracle::gaussian_series(gen, static_cast<std::size_t>(m) * t_count, 3.0);
    for (auto& v : x) v += 50.0;  // large offset stresses cancellation
    const auto f = stft(x, m);
    const SegmentCostCache cache(f);
    for (int d = 0; d < f.frequencies(); ++d) {
      for (int s = 1; s <= t_count; ++s) {
        for (int e = s; e <= t_count; ++e) {
          const double direct = segment_cost(f, d, s, e);
          CHECK(cache.cost(d, s, e) == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
          for (int k = s; k < e; ++k) {
            CHECK(direct >= segment_cost(f, d, s, k) + segment_cost(f, d, k + 1, e) - 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("segment cost quadratics") {
  std::mt19937_64 gen(4);
  const int m = 8;
  const int t_count = 6;
  const auto a = oracle::gaussian_series(gen, m * t_count);
  const auto b = oracle::gaussian_series(gen, m * t_count);
  const std::vector<double> zero(a.size(), 0.0);
  const auto fa = stft(a, m);
  const LineCostCache line(a, b, m);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int d = 0; d < fa.frequencies(); ++d) {
    for (int s = 1; s <= t_count; ++s) {
      for (int e = s; e <= t_count; ++e) {
        const auto flat = segment_cost_quadratic(d, s, e, a, zero, m);
        CHECK(flat.e2 == 0.0);
        CHECK(flat.e1 == 0.0);
        CHECK(flat.e0 == doctest::Approx(segment_cost(fa, d, s, e)));
        const auto q = segment_cost_quadratic(d, s, e, a, b, m);
        CHECK(q(0.0) == doctest::Approx(segment_cost(fa, d, s, e)));
        CHECK(q.e2 >= -1e-10);
        const auto fast = line.segment(d, s, e);
        for (int k = 0; k < 20; ++k) {
          const double r = unif(gen);
          std::vector<double> xr(a.size());
          for (std::size_t n = 0; n < a.size(); ++n) xr[n] = a[n] + r * b[n];
          const double direct = segment_cost(stft(xr, m), d, s, e);
          CHECK(std::fabs(q(r) - direct) <= 1e-8 * (1.0 + std::fabs(direct)));
          CHECK(std::fabs(fast(r) - direct) <= 1e-8 * (1.0 + std::fabs(direct)));
        }
      }
    }
  }
}

TEST_CASE("objective quadratic") {
  std::mt19937_64 gen(6);
  const int m = 4;
  const int t_count = 8;
  const auto a = oracle::gaussian_series(gen, m * t_count);
  const auto b = oracle::gaussian_series(gen, m * t_count);
  const std::vector<double> zero(a.size(), 0.0);
  const auto pen = bic_penalties(m, 1.0, t_count, 0.5);
  CpConfiguration cfg(3, t_count);
  const auto fa = stft(a, m);

  auto q = objective_quadratic(cfg, a, zero, m, pen);
  CHECK(q.e2 == 0.0);
  CHECK(q.e0 == doctest::Approx(objective(cfg, fa, pen)));

  cfg.insert(0, 2);
  cfg.insert(1, 2);
  cfg.insert(1, 5);
  q = objective_quadratic(cfg, a, zero, m, pen);
  CHECK(q.e0 == doctest::Approx(objective(cfg, fa, pen)));
  CHECK(q.e0 - penalty(cfg, pen) == doctest::Approx(objective(cfg, fa, pen) - penalty(cfg, pen)));

  q = objective_quadratic(cfg, a, b, m, pen);
  for (double r : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
    std::vector<double> xr(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) xr[n] = a[n] + r * b[n];
    const double direct = objective(cfg, stft(xr, m), pen);
    CHECK(std::fabs(q(r) - direct) <= 1e-8 * std::fabs(direct));
  }
  // with penalties removed the quadratic is a sum of squares
  const QuadCoeffs costs{q.e2, q.e1, q.e0 - penalty(cfg, pen)};
  CHECK(costs.e2 >= -1e-10);
  CHECK(costs.e0 - costs.e1 * costs.e1 / (4 * costs.e2) >= -1e-9);
}
