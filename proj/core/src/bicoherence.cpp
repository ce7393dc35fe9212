#include "speechlab/bicoherence.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "speechlab/dsp.hpp"
#include "speechlab/error.hpp"

namespace speechlab::bicoherence {

using dsp::Complex;

bool in_triangle(std::size_t f1, std::size_t f2, std::size_t seg_len) noexcept {
  return f2 >= 1 && f2 <= f1 && f1 + f2 <= seg_len / 2;
}

namespace {

template <typename Fn>
void for_each_cell(std::size_t seg_len, Fn&& fn) {
  const std::size_t nyquist = seg_len / 2;
  for (std::size_t f1 = 1; f1 <= nyquist; ++f1) {
    for (std::size_t f2 = 1; f2 <= f1 && f1 + f2 <= nyquist; ++f2) fn(f1, f2);
  }
}

std::size_t hop_for(std::size_t seg_len, double overlap) {
  const auto overlapped = static_cast<std::size_t>(std::floor(overlap * static_cast<double>(seg_len)));
  return seg_len - overlapped;
}

}  // namespace

std::vector<double> BicoherenceMap::triangle_magnitudes() const {
  std::vector<double> out;
  for_each_cell(seg_len(), [&](std::size_t f1, std::size_t f2) { out.push_back(magnitude_at(f1, f2)); });
  return out;
}

std::vector<double> BicoherenceMap::triangle_phases() const {
  std::vector<double> out;
  for_each_cell(seg_len(), [&](std::size_t f1, std::size_t f2) { out.push_back(phase_at(f1, f2)); });
  return out;
}

std::size_t segment_count(std::size_t length, std::size_t seg_len, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ArgumentError("overlap must be in [0, 1)");
  if (seg_len == 0) throw ArgumentError("segment length must be positive");
  return dsp::frame_count(length, seg_len, hop_for(seg_len, overlap));
}

BicoherenceMap estimate_bicoherence(const audio::AudioClip& clip, std::size_t seg_len,
                                    double overlap) {
  audio::validate(clip);
  if (seg_len < 4 || !dsp::is_power_of_two(seg_len)) {
    throw ArgumentError("segment length must be a power of two >= 4");
  }
  const std::size_t segments = segment_count(clip.samples.size(), seg_len, overlap);
  if (segments < kMinSegments) {
    throw InsufficientDataError("bicoherence needs at least " + std::to_string(kMinSegments) +
                                " segments, clip provides " + std::to_string(segments));
  }
  const std::size_t hop = hop_for(seg_len, overlap);
  const std::size_t grid = seg_len / 2 + 1;
  const auto window = dsp::hann_window(seg_len);
  const dsp::FftPlan plan(seg_len);

  std::vector<Complex> triple(grid * grid, 0.0);
  std::vector<double> pair_power(grid * grid, 0.0);
  std::vector<double> sum_power(grid, 0.0);

  std::vector<Complex> spectrum(seg_len);
  for (std::size_t s = 0; s < segments; ++s) {
    const double* seg = clip.samples.data() + s * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < seg_len; ++i) mean += seg[i];
    mean /= static_cast<double>(seg_len);
    for (std::size_t i = 0; i < seg_len; ++i) spectrum[i] = (seg[i] - mean) * window[i];
    plan.forward(spectrum);

    for (std::size_t k = 0; k < grid; ++k) sum_power[k] += std::norm(spectrum[k]);
    for_each_cell(seg_len, [&](std::size_t f1, std::size_t f2) {
      const Complex product = spectrum[f1] * spectrum[f2];
      triple[f1 * grid + f2] += product * std::conj(spectrum[f1 + f2]);
      pair_power[f1 * grid + f2] += std::norm(product);
    });
  }

  BicoherenceMap map;
  map.grid_size = grid;
  map.segment_count = segments;
  map.magnitude.assign(grid * grid, 0.0);
  map.phase.assign(grid * grid, 0.0);
  const double count = static_cast<double>(segments);
  for_each_cell(seg_len, [&](std::size_t f1, std::size_t f2) {
    const std::size_t cell = f1 * grid + f2;
    const Complex b = triple[cell] / count;
    const double denom = std::sqrt((pair_power[cell] / count) * (sum_power[f1 + f2] / count));
    if (denom > 0.0) {
      map.magnitude[cell] = std::abs(b) / denom;
      double angle = std::arg(b);
      if (angle <= -std::numbers::pi) angle = std::numbers::pi;
      map.phase[cell] = angle;
    }
  });
  return map;
}

MomentSet moments(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("moments of an empty collection");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw ArgumentError("moments of a non-finite value");
    sum += v;
  }
  MomentSet m;
  m.mean = sum / n;
  double m2 = 0.0;
  for (double v : values) {
    const double d = v - m.mean;
    m2 += d * d;
  }
  m.variance = m2 / n;
  if (m.variance <= kDegenerateVariance) return m;

  const double sd = std::sqrt(m.variance);
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double z = (v - m.mean) / sd;
    const double z2 = z * z;
    m3 += z2 * z;
    m4 += z2 * z2;
  }
  m.skewness = m3 / n;
  m.kurtosis = m4 / n;
  return m;
}

std::array<double, 8> bicoherence_features(const BicoherenceMap& map) {
  const auto mag = moments(map.triangle_magnitudes());
  const auto ph = moments(map.triangle_phases());
  return {mag.mean, mag.variance, mag.skewness, mag.kurtosis,
          ph.mean,  ph.variance,  ph.skewness,  ph.kurtosis};
}

}  // namespace speechlab::bicoherence
