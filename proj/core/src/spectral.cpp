#include "freqcp/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "freqcp/errors.hpp"

namespace freqcp {

namespace {

// Twiddle exp(-j 2 pi k / M) with k reduced mod M, so large d*n products stay exact.
Complex twiddle(long long k, int m) {
  const long long r = k % m;
  const double angle = -2.0 * std::numbers::pi * static_cast<double>(r) / m;
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

void validate_series(std::span<const double> x, int window_size) {
  if (window_size < 2) throw DomainError("window size must be at least 2");
  if (x.empty() || x.size() % static_cast<std::size_t>(window_size) != 0) {
    throw ShapeError("series length " + std::to_string(x.size()) +
                     " is not a positive multiple of window size " + std::to_string(window_size));
  }
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (!std::isfinite(x[n])) throw DomainError("non-finite sample at index " + std::to_string(n));
  }
}

std::vector<Complex> dft_vector(int window_size, int frequency) {
  if (window_size < 2) throw DomainError("window size must be at least 2");
  if (frequency < 0 || frequency >= window_size) {
    throw DomainError("frequency index " + std::to_string(frequency) + " outside [0, M)");
  }
  std::vector<Complex> w(static_cast<std::size_t>(window_size));
  for (int n = 0; n < window_size; ++n) {
    w[static_cast<std::size_t>(n)] = twiddle(static_cast<long long>(frequency) * n, window_size);
  }
  return w;
}

std::vector<Complex> dft(std::span<const double> window) {
  const int m = static_cast<int>(window.size());
  std::vector<Complex> out(window.size());
  for (int d = 0; d < m; ++d) {
    Complex acc{};
    for (int n = 0; n < m; ++n) acc += window[static_cast<std::size_t>(n)] * twiddle(1LL * d * n, m);
    out[static_cast<std::size_t>(d)] = acc;
  }
  return out;
}

int sym_coeff(int frequency, int window_size) {
  if (frequency == 0) return 1;
  if (window_size % 2 == 0 && frequency == window_size / 2) return 1;
  return 2;
}

SpectralSequences::SpectralSequences(int window_size, int windows)
    : window_size_(window_size),
      windows_(windows),
      frequencies_(window_size / 2 + 1),
      data_(static_cast<std::size_t>(frequencies_) * static_cast<std::size_t>(windows)) {}

std::span<const Complex> SpectralSequences::frequency(int d) const {
  return {data_.data() + index(0, d), static_cast<std::size_t>(windows_)};
}

SpectralSequences SpectralSequences::affine(const SpectralSequences& a,
                                            const SpectralSequences& b, double r) {
  if (a.window_size_ != b.window_size_ || a.windows_ != b.windows_) {
    throw ShapeError("affine combination of spectra with different geometry");
  }
  SpectralSequences out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += r * b.data_[i];
  return out;
}

SpectralSequences stft(std::span<const double> x, int window_size) {
  validate_series(x, window_size);
  const int m = window_size;
  const int t_count = static_cast<int>(x.size() / static_cast<std::size_t>(m));
  SpectralSequences f(m, t_count);

  // basis[d * M + n]
  std::vector<Complex> basis(static_cast<std::size_t>(f.frequencies()) * m);
  for (int d = 0; d < f.frequencies(); ++d) {
    for (int n = 0; n < m; ++n) basis[static_cast<std::size_t>(d * m + n)] = twiddle(1LL * d * n, m);
  }
  for (int t = 0; t < t_count; ++t) {
    const double* window = x.data() + static_cast<std::size_t>(t) * m;
    for (int d = 0; d < f.frequencies(); ++d) {
      const Complex* w = basis.data() + static_cast<std::size_t>(d) * m;
      double re = 0.0;
      double im = 0.0;
      for (int n = 0; n < m; ++n) {
        re += window[n] * w[n].real();
        im += window[n] * w[n].imag();
      }
      f(t, d) = {re, im};
    }
  }
  return f;
}

Complex segment_mean(const SpectralSequences& f, int d, int first, int last) {
  if (first > last) throw DomainError("segment start after segment end");
  if (first < 1 || last > f.windows()) throw DomainError("segment outside [1, T]");
  if (d < 0 || d >= f.frequencies()) throw DomainError("frequency out of range");
  Complex acc{};
  for (int t = first; t <= last; ++t) acc += f(t - 1, d);
  return acc / static_cast<double>(last - first + 1);
}

}  // namespace freqcp
