#include "speechlab/cepstral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "speechlab/bicoherence.hpp"
#include "speechlab/dsp.hpp"
#include "speechlab/error.hpp"

namespace speechlab::cepstral {

CepstralMatrix mfcc(const audio::AudioClip& clip, const MfccConfig& config) {
  audio::validate(clip);
  if (config.n_coeffs == 0 || config.n_coeffs >= config.n_filters) {
    throw ArgumentError("need 1 <= n_coeffs < n_filters");
  }
  if (config.frame_len > config.n_fft) throw ArgumentError("frame length exceeds FFT size");
  const std::size_t frames = dsp::frame_count(clip.samples.size(), config.frame_len, config.hop);
  if (frames == 0) throw InsufficientDataError("clip shorter than one MFCC frame");

  const auto window = dsp::hann_window(config.frame_len);
  const dsp::FftPlan plan(config.n_fft);
  const auto bank = dsp::mel_filterbank(config.n_filters, config.n_fft,
                                        static_cast<double>(clip.sample_rate), config.fmin,
                                        std::min(config.fmax, clip.sample_rate / 2.0));

  // Orthonormal DCT-II basis restricted to the kept coefficients.
  const std::size_t m = config.n_filters;
  std::vector<double> basis(config.n_coeffs * m);
  for (std::size_t c = 0; c < config.n_coeffs; ++c) {
    const std::size_t k = c + 1;
    for (std::size_t j = 0; j < m; ++j) {
      basis[c * m + j] = std::sqrt(2.0 / static_cast<double>(m)) *
                         std::cos(std::numbers::pi * static_cast<double>(k) *
                                  (2.0 * static_cast<double>(j) + 1.0) / (2.0 * static_cast<double>(m)));
    }
  }

  CepstralMatrix out;
  out.n_frames = frames;
  out.n_coeffs = config.n_coeffs;
  out.coefficients.assign(frames * config.n_coeffs, 0.0);
  out.frame_hop_s = static_cast<double>(config.hop) / clip.sample_rate;

  std::vector<dsp::Complex> buffer(config.n_fft);
  std::vector<double> log_energy(m);
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(buffer.begin(), buffer.end(), dsp::Complex{});
    const double* x = clip.samples.data() + f * config.hop;
    for (std::size_t i = 0; i < config.frame_len; ++i) buffer[i] = x[i] * window[i];
    plan.forward(buffer);
    const auto energies = bank.apply(dsp::power_spectrum(buffer));
    for (std::size_t j = 0; j < m; ++j) log_energy[j] = std::log(std::max(energies[j], config.log_floor));
    for (std::size_t c = 0; c < config.n_coeffs; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += basis[c * m + j] * log_energy[j];
      out.at(f, c) = acc;
    }
  }
  return out;
}

CepstralMatrix delta(const CepstralMatrix& matrix, std::size_t window) {
  if (window < 1) throw ArgumentError("delta window must be >= 1");
  if (matrix.order >= 2) throw ArgumentError("delta of a second-order matrix is out of scope");
  if (matrix.n_frames == 0) throw ArgumentError("delta of an empty matrix");

  double norm = 0.0;
  for (std::size_t n = 1; n <= window; ++n) norm += static_cast<double>(n * n);
  norm *= 2.0;

  CepstralMatrix out = matrix;
  out.order = matrix.order + 1;
  const auto last = static_cast<std::ptrdiff_t>(matrix.n_frames) - 1;
  auto clamp_frame = [&](std::ptrdiff_t t) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(t, 0, last));
  };
  for (std::size_t t = 0; t < matrix.n_frames; ++t) {
    for (std::size_t j = 0; j < matrix.n_coeffs; ++j) {
      double acc = 0.0;
      for (std::size_t n = 1; n <= window; ++n) {
        const auto ti = static_cast<std::ptrdiff_t>(t);
        const auto ni = static_cast<std::ptrdiff_t>(n);
        acc += static_cast<double>(n) *
               (matrix.at(clamp_frame(ti + ni), j) - matrix.at(clamp_frame(ti - ni), j));
      }
      out.at(t, j) = acc / norm;
    }
  }
  return out;
}

std::array<double, 6> cepstral_features(const audio::AudioClip& clip) {
  audio::require_canonical(clip);
  const auto static_coeffs = mfcc(clip);
  const auto d1 = delta(static_coeffs);
  const auto d2 = delta(d1);
  const auto a = bicoherence::moments(static_coeffs.coefficients);
  const auto b = bicoherence::moments(d1.coefficients);
  const auto c = bicoherence::moments(d2.coefficients);
  return {a.mean, a.variance, b.mean, b.variance, c.mean, c.variance};
}

}  // namespace speechlab::cepstral
