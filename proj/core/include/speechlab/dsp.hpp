#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace speechlab::dsp {

using Complex = std::complex<double>;

struct Frame {
  std::vector<double> values;
  std::size_t start_index = 0;
};

/// Frames at offsets 0, hop, 2*hop, ...; floor((len - frame_len) / hop) + 1
/// frames, or none when the signal is shorter than one frame.
std::vector<Frame> frame_signal(std::span<const double> samples, std::size_t frame_len,
                                std::size_t hop);

/// Number of frames frame_signal would produce.
std::size_t frame_count(std::size_t length, std::size_t frame_len, std::size_t hop);

/// Symmetric Hann window, w[k] = 0.5 (1 - cos(2 pi k / (n - 1))). Requires n >= 2.
std::vector<double> hann_window(std::size_t n);

/// Precomputed radix-2 transform for one power-of-two size.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  // In-place forward transform, X[k] = sum x[n] exp(-2 pi i k n / N).
  void forward(std::span<Complex> data) const;
  // In-place inverse transform including the 1/N factor.
  void inverse(std::span<Complex> data) const;

  std::vector<Complex> forward_real(std::span<const double> data) const;

 private:
  void run(std::span<Complex> data, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> bit_reverse_;
  std::vector<Complex> twiddles_;
};

bool is_power_of_two(std::size_t n) noexcept;

/// Discrete Fourier transform of any length >= 1. Power-of-two lengths use
/// the FFT; other lengths fall back to direct summation.
std::vector<Complex> dft(std::span<const double> frame);
std::vector<Complex> dft(std::span<const Complex> frame);
std::vector<Complex> inverse_dft(std::span<const Complex> spectrum);

/// One-sided power spectrum |X[k]|^2, k = 0 .. N/2.
std::vector<double> power_spectrum(std::span<const Complex> spectrum);

double hz_to_mel(double hz) noexcept;
double mel_to_hz(double mel) noexcept;

/// Triangular filters with centers equally spaced on the HTK mel scale.
struct MelFilterbank {
  std::size_t n_filters = 0;
  std::size_t n_bins = 0;  // n_fft / 2 + 1
  std::vector<double> weights;  // row-major n_filters x n_bins
  std::vector<double> edges_hz;  // n_filters + 2 band edges

  double weight(std::size_t filter, std::size_t bin) const {
    return weights[filter * n_bins + bin];
  }
  std::span<const double> row(std::size_t filter) const {
    return {weights.data() + filter * n_bins, n_bins};
  }

  /// Band energies for a one-sided power spectrum of length n_bins.
  std::vector<double> apply(std::span<const double> power) const;
};

/// Throws ArgumentError unless 0 <= fmin < fmax <= sample_rate / 2 and
/// n_filters >= 1, or when a filter would cover no FFT bin.
MelFilterbank mel_filterbank(std::size_t n_filters, std::size_t n_fft, double sample_rate,
                             double fmin, double fmax);

}  // namespace speechlab::dsp
