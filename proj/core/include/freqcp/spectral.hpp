#pragma once

#include <complex>
#include <span>
#include <vector>

namespace freqcp {

using Complex = std::complex<double>;

/// Raw univariate signal. The sampling rate is carried along as metadata only.
struct TimeSeries {
  std::vector<double> samples;
  double sampling_rate = 1.0;

  std::size_t size() const noexcept { return samples.size(); }
};

/// Throws ShapeError unless `x` splits into whole windows of `window_size`,
/// and DomainError on non-finite samples.
void validate_series(std::span<const double> x, int window_size);

/// DFT basis vector exp(-j 2 pi d n / M), n = 0..M-1.
std::vector<Complex> dft_vector(int window_size, int frequency);

/// Full M-point DFT of one window (all M bins). Used for symmetry checks.
std::vector<Complex> dft(std::span<const double> window);

/// 1 for the DC bin and (for even M) the Nyquist bin, 2 otherwise.
int sym_coeff(int frequency, int window_size);

/// Windowed spectra of a real series: T windows x D = floor(M/2)+1 bins.
///
/// Windows are numbered 1..T in every segment-level API of this library so
/// that a change point t in 1..T-1 means "a new segment starts at window t+1".
/// Element access via operator() is zero-based.
class SpectralSequences {
 public:
  SpectralSequences() = default;
  SpectralSequences(int window_size, int windows);

  int window_size() const noexcept { return window_size_; }
  int windows() const noexcept { return windows_; }
  int frequencies() const noexcept { return frequencies_; }

  /// Zero-based access: window t in [0, T), frequency d in [0, D).
  Complex& operator()(int t, int d) { return data_[index(t, d)]; }
  const Complex& operator()(int t, int d) const { return data_[index(t, d)]; }

  /// All T spectra of one frequency, contiguous.
  std::span<const Complex> frequency(int d) const;

  /// Spectra of a + r * b, where both operands come from the same geometry.
  static SpectralSequences affine(const SpectralSequences& a, const SpectralSequences& b,
                                  double r);

 private:
  std::size_t index(int t, int d) const noexcept {
    return static_cast<std::size_t>(d) * static_cast<std::size_t>(windows_) +
           static_cast<std::size_t>(t);
  }

  int window_size_ = 0;
  int windows_ = 0;
  int frequencies_ = 0;
  std::vector<Complex> data_;  // frequency-major
};

/// Non-overlapping rectangular-window STFT, keeping bins 0..floor(M/2).
SpectralSequences stft(std::span<const double> x, int window_size);
inline SpectralSequences stft(const TimeSeries& x, int window_size) {
  return stft(x.samples, window_size);
}

/// Mean spectrum of windows first..last (1-based, inclusive) at frequency d.
Complex segment_mean(const SpectralSequences& f, int d, int first, int last);

}  // namespace freqcp
