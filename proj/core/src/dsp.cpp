#include "speechlab/dsp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "speechlab/error.hpp"

namespace speechlab::dsp {

std::size_t frame_count(std::size_t length, std::size_t frame_len, std::size_t hop) {
  if (frame_len == 0 || hop == 0) throw ArgumentError("frame length and hop must be >= 1");
  if (length < frame_len) return 0;
  return (length - frame_len) / hop + 1;
}

std::vector<Frame> frame_signal(std::span<const double> samples, std::size_t frame_len,
                                std::size_t hop) {
  const std::size_t count = frame_count(samples.size(), frame_len, hop);
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::size_t f = 0; f < count; ++f) {
    const auto first = samples.begin() + static_cast<std::ptrdiff_t>(f * hop);
    frames.push_back({std::vector<double>(first, first + static_cast<std::ptrdiff_t>(frame_len)), f * hop});
  }
  return frames;
}

std::vector<double> hann_window(std::size_t n) {
  if (n < 2) throw ArgumentError("Hann window needs n >= 2");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / denom));
  }
  // Exact zeros at the ends and exact symmetry regardless of cos rounding.
  w.front() = 0.0;
  w.back() = 0.0;
  for (std::size_t k = 0; k < n / 2; ++k) w[n - 1 - k] = w[k];
  return w;
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (!is_power_of_two(n)) throw ArgumentError("FFT size must be a power of two, got " + std::to_string(n));
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  bit_reverse_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    bit_reverse_[i] = r;
  }
  twiddles_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void FftPlan::run(std::span<Complex> data, bool inverse) const {
  if (data.size() != n_) throw ArgumentError("FFT input length does not match plan size");
  for (std::size_t i = 0; i < n_; ++i) {
    if (i < bit_reverse_[i]) std::swap(data[i], data[bit_reverse_[i]]);
  }
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex w = twiddles_[k * stride];
        if (inverse) w = std::conj(w);
        const Complex t = w * data[start + k + half];
        data[start + k + half] = data[start + k] - t;
        data[start + k] += t;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
  }
}

void FftPlan::forward(std::span<Complex> data) const { run(data, false); }
void FftPlan::inverse(std::span<Complex> data) const { run(data, true); }

std::vector<Complex> FftPlan::forward_real(std::span<const double> data) const {
  std::vector<Complex> out(data.begin(), data.end());
  forward(out);
  return out;
}

namespace {

std::vector<Complex> direct_dft(std::span<const Complex> x, bool inverse) {
  const std::size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      // Reduce k*t mod n first so the angle stays small and accurate.
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) /
                           static_cast<double>(n);
      acc += x[t] * Complex(std::cos(angle), std::sin(angle));
    }
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

}  // namespace

std::vector<Complex> dft(std::span<const Complex> frame) {
  if (frame.empty()) throw ArgumentError("DFT of an empty frame");
  if (is_power_of_two(frame.size())) {
    std::vector<Complex> out(frame.begin(), frame.end());
    FftPlan(frame.size()).forward(out);
    return out;
  }
  return direct_dft(frame, false);
}

std::vector<Complex> dft(std::span<const double> frame) {
  const std::vector<Complex> as_complex(frame.begin(), frame.end());
  return dft(std::span<const Complex>(as_complex));
}

std::vector<Complex> inverse_dft(std::span<const Complex> spectrum) {
  if (spectrum.empty()) throw ArgumentError("inverse DFT of an empty spectrum");
  if (is_power_of_two(spectrum.size())) {
    std::vector<Complex> out(spectrum.begin(), spectrum.end());
    FftPlan(spectrum.size()).inverse(out);
    return out;
  }
  return direct_dft(spectrum, true);
}

std::vector<double> power_spectrum(std::span<const Complex> spectrum) {
  const std::size_t bins = spectrum.size() / 2 + 1;
  std::vector<double> power(std::min(bins, spectrum.size()));
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spectrum[k]);
  return power;
}

double hz_to_mel(double hz) noexcept { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) noexcept { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> MelFilterbank::apply(std::span<const double> power) const {
  if (power.size() != n_bins) throw ArgumentError("power spectrum length does not match filterbank");
  std::vector<double> energies(n_filters, 0.0);
  for (std::size_t f = 0; f < n_filters; ++f) {
    const auto r = row(f);
    double acc = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) acc += r[k] * power[k];
    energies[f] = acc;
  }
  return energies;
}

MelFilterbank mel_filterbank(std::size_t n_filters, std::size_t n_fft, double sample_rate,
                             double fmin, double fmax) {
  if (n_filters < 1) throw ArgumentError("mel filterbank needs at least one filter");
  if (n_fft < 2) throw ArgumentError("mel filterbank needs n_fft >= 2");
  if (!(sample_rate > 0.0)) throw ArgumentError("sample rate must be positive");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw ArgumentError("mel filterbank needs 0 <= fmin < fmax <= sample_rate / 2");
  }
  MelFilterbank bank;
  bank.n_filters = n_filters;
  bank.n_bins = n_fft / 2 + 1;
  bank.weights.assign(n_filters * bank.n_bins, 0.0);

  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  bank.edges_hz.resize(n_filters + 2);
  for (std::size_t i = 0; i < n_filters + 2; ++i) {
    bank.edges_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                              static_cast<double>(n_filters + 1));
  }
  const double bin_hz = sample_rate / static_cast<double>(n_fft);
  for (std::size_t f = 0; f < n_filters; ++f) {
    const double left = bank.edges_hz[f];
    const double center = bank.edges_hz[f + 1];
    const double right = bank.edges_hz[f + 2];
    double total = 0.0;
    for (std::size_t k = 0; k < bank.n_bins; ++k) {
      const double hz = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (hz > left && hz <= center) {
        w = (hz - left) / (center - left);
      } else if (hz > center && hz < right) {
        w = (right - hz) / (right - center);
      }
      bank.weights[f * bank.n_bins + k] = w;
      total += w;
    }
    if (!(total > 0.0)) {
      throw ArgumentError("mel filter " + std::to_string(f) +
                          " covers no FFT bin; use fewer filters or a larger n_fft");
    }
  }
  return bank;
}

}  // namespace speechlab::dsp
