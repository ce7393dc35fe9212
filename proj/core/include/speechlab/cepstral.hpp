#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "speechlab/audio_io.hpp"

namespace speechlab::cepstral {

struct MfccConfig {
  std::size_t frame_len = 400;  // 25 ms at 16 kHz
  std::size_t hop = 160;        // 10 ms
  std::size_t n_fft = 512;
  std::size_t n_filters = 26;
  std::size_t n_coeffs = 13;  // c1..c13; c0 is dropped
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;
};

/// Frames x coefficients, row-major. `order` is 0 for MFCC, 1 for delta,
/// 2 for delta-delta.
struct CepstralMatrix {
  std::size_t n_frames = 0;
  std::size_t n_coeffs = 0;
  std::vector<double> coefficients;
  double frame_hop_s = 0.0;
  int order = 0;

  double at(std::size_t frame, std::size_t coeff) const { return coefficients[frame * n_coeffs + coeff]; }
  double& at(std::size_t frame, std::size_t coeff) { return coefficients[frame * n_coeffs + coeff]; }
};

/// Hann-windowed frames, one-sided power spectrum, mel energies floored
/// before the natural log, orthonormal DCT-II, coefficients 1..n_coeffs.
/// Throws InsufficientDataError when the clip is shorter than one frame.
CepstralMatrix mfcc(const audio::AudioClip& clip, const MfccConfig& config = {});

/// Regression delta d[t] = sum_n n (c[t+n] - c[t-n]) / (2 sum_n n^2) with
/// edge frames replicated. Throws ArgumentError for window < 1 or when the
/// input is already a second derivative.
CepstralMatrix delta(const CepstralMatrix& matrix, std::size_t window = 2);

/// (mean, variance) of the flattened MFCC, delta and delta-delta matrices
/// of a canonical clip.
std::array<double, 6> cepstral_features(const audio::AudioClip& clip);

}  // namespace speechlab::cepstral
