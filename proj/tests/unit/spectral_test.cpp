#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "freqcp/errors.hpp"
#include "freqcp/spectral.hpp"
#include "oracles.hpp"

using namespace freqcp;

namespace {

bool close(Complex a, Complex b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("dft_vector basis entries") {
  auto w = dft_vector(2, 0);
  CHECK(close(w[0], 1.0));
  CHECK(close(w[1], 1.0));
  w = dft_vector(2, 1);
  CHECK(close(w[1], -1.0));
  w = dft_vector(4, 1);
  CHECK(close(w[0], {1, 0}));
  CHECK(close(w[1], {0, -1}));
  CHECK(close(w[2], {-1, 0}));
  CHECK(close(w[3], {0, 1}));
  CHECK_THROWS_AS(dft_vector(4, 4), DomainError);
  CHECK_THROWS_AS(dft_vector(4, -1), DomainError);
  CHECK_THROWS_AS(dft_vector(1, 0), DomainError);
}

TEST_CASE("sym_coeff counts discarded conjugates") {
  CHECK(sym_coeff(0, 512) == 1);
  CHECK(sym_coeff(256, 512) == 1);
  CHECK(sym_coeff(7, 512) == 2);
  CHECK(sym_coeff(3, 7) == 2);
  CHECK(sym_coeff(0, 7) == 1);
}

TEST_CASE("stft of hand-checked inputs") {
  const std::vector<double> c(12, 1.5);
  const auto f = stft(c, 4);
  CHECK(f.windows() == 3);
  CHECK(f.frequencies() == 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(close(f(t, 0), 6.0));
    CHECK(close(f(t, 1), 0.0));
    CHECK(close(f(t, 2), 0.0));
  }
  const std::vector<double> x{1.0, -1.0};
  const auto g = stft(x, 2);
  CHECK(close(g(0, 0), 0.0));
  CHECK(close(g(0, 1), 2.0));
}

TEST_CASE("stft of a bin-aligned sinusoid") {
  const int m = 16;
  for (int d0 = 1; d0 < m / 2; ++d0) {
    std::vector<double> x(m);
    for (int n = 0; n < m; ++n) x[n] = std::sin(2.0 * std::numbers::pi * d0 * n / m);
    const auto f = stft(x, m);
    for (int d = 1; d < m / 2; ++d) {
      CHECK(std::fabs(std::abs(f(0, d)) - (d == d0 ? m / 2.0 : 0.0)) <= 1e-9);
    }
  }
}

TEST_CASE("stft rejects bad series") {
  CHECK_THROWS_AS(stft(std::vector<double>(10, 0.0), 4), ShapeError);
  CHECK_THROWS_AS(stft(std::vector<double>{}, 4), ShapeError);
  CHECK_THROWS_AS(stft(std::vector<double>{1.0, NAN}, 2), DomainError);
}

TEST_CASE("stft matches the direct product, Parseval and conjugate symmetry") {
  std::mt19937_64 gen(3);
  for (int m : {2, 3, 4, 7, 8, 16}) {
    const int t_count = 5;
    const auto x = oracle::gaussian_series(gen, static_cast<std::size_t>(m) * t_count);
    const auto f = stft(x, m);
    for (int t = 0; t < t_count; ++t) {
      std::span<const double> win(x.data() + t * m, m);
      const auto full = dft(win);
      double energy = 0.0;
      double spectrum = 0.0;
      for (int n = 0; n < m; ++n) energy += win[n] * win[n];
      for (int d = 0; d < m; ++d) {
        Complex direct{};
        for (int n = 0; n < m; ++n) {
          direct += win[n] * std::polar(1.0, -2.0 * std::numbers::pi * d * n / m);
        }
        CHECK(close(full[d], direct, 1e-10));
        if (d <= m / 2) CHECK(close(f(t, d), direct, 1e-10));
        CHECK(close(full[d], std::conj(full[(m - d) % m]), 1e-10));
        spectrum += std::norm(full[d]);
      }
      CHECK(spectrum == doctest::Approx(m * energy).epsilon(1e-9));
    }
  }
}

TEST_CASE("a constant offset changes only the DC bin") {
  std::mt19937_64 gen(5);
  const auto x = oracle::gaussian_series(gen, 40);
  auto y = x;
  for (auto& v : y) v += 2.5;
  const auto fx = stft(x, 8);
  const auto fy = stft(y, 8);
  for (int t = 0; t < 5; ++t) {
    CHECK(close(fy(t, 0) - fx(t, 0), 20.0, 1e-10));
    for (int d = 1; d < fx.frequencies(); ++d) CHECK(close(fy(t, d), fx(t, d), 1e-10));
  }
}

TEST_CASE("segment_mean") {
  SpectralSequences f(2, 2);
  f(0, 1) = 0.0;
  f(1, 1) = {2.0, 2.0};
  CHECK(close(segment_mean(f, 1, 1, 2), {1.0, 1.0}));
  CHECK(close(segment_mean(f, 1, 2, 2), {2.0, 2.0}));
  CHECK_THROWS_AS(segment_mean(f, 1, 2, 1), DomainError);
}
