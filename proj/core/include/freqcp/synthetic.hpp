#pragma once

#include <array>
#include <vector>

#include "freqcp/inference.hpp"
#include "freqcp/rng.hpp"
#include "freqcp/sa_refine.hpp"
#include "freqcp/spectral.hpp"

namespace freqcp {

enum class NoiseKind { Gaussian, Ar1 };

/// Three sinusoids on DFT bins, each with amplitude A, A + delta, A + 2 delta
/// over the windows 1..t1, t1+1..t2, t2+1..T. delta = 0 is the null model.
struct SyntheticSpec {
  int window_size = 8;
  int windows = 30;
  double sigma = 1.0;
  std::array<int, 3> freqs{1, 2, 3};
  std::array<double, 3> amplitude{0.0, 0.0, 0.0};
  double delta = 0.0;
  std::array<int, 3> t1{9, 10, 11};
  std::array<int, 3> t2{19, 20, 21};
  NoiseKind noise = NoiseKind::Gaussian;
  double rho = 0.0;

  void validate() const;
};

/// Bins whose sine component is not identically zero: 1 .. ceil(M/2) - 1.
std::vector<int> plantable_frequencies(int window_size);

/// Draws the planted bins (without replacement) and base amplitudes in [0, 1).
void draw_planted(SyntheticSpec& spec, Rng& rng);

/// Noise-free mean signal.
std::vector<double> mean_signal(const SyntheticSpec& spec);

/// Gaussian noise with covariance sigma^2 rho^|i-j| (AR(1) recursion).
std::vector<double> generate_correlated_noise(std::size_t n, double sigma, double rho, Rng& rng);

TimeSeries generate(const SyntheticSpec& spec, Rng& rng);

/// Noise level from the spread of the spectra inside each detected segment:
/// per frequency the largest within-segment variance, averaged over
/// frequencies, as a standard deviation scaled back to the time domain.
double estimate_variance(std::span<const double> x, const DetectConfig& config);
double estimate_variance(const SpectralSequences& f, const CpConfiguration& cfg);

/// Whether tau lies within the planted change windows of every tested frequency.
bool is_correct_detection(const HypothesisContext& ctx, const SyntheticSpec& spec);

}  // namespace freqcp
