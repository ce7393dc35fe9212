#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "speechlab/audio_io.hpp"

namespace speechlab::bicoherence {

inline constexpr std::size_t kDefaultSegmentLength = 256;
inline constexpr double kDefaultOverlap = 0.5;
inline constexpr std::size_t kMinSegments = 8;

/// Normalized bispectrum over frequency-bin pairs (f1, f2).
///
/// Only the non-redundant triangle 1 <= f2 <= f1, f1 + f2 <= seg_len / 2 is
/// populated; cells outside it hold zero. The DC row and column are excluded
/// because segments are mean-removed.
struct BicoherenceMap {
  std::size_t grid_size = 0;  // seg_len / 2 + 1
  std::size_t segment_count = 0;
  std::vector<double> magnitude;  // row-major [f1][f2], values in [0, 1]
  std::vector<double> phase;      // same layout, values in (-pi, pi]

  double magnitude_at(std::size_t f1, std::size_t f2) const { return magnitude[f1 * grid_size + f2]; }
  double phase_at(std::size_t f1, std::size_t f2) const { return phase[f1 * grid_size + f2]; }

  std::size_t seg_len() const { return 2 * (grid_size - 1); }

  // Magnitudes and phases of the populated triangle, in (f1, f2) row order.
  std::vector<double> triangle_magnitudes() const;
  std::vector<double> triangle_phases() const;
};

/// True when (f1, f2) lies in the populated triangle for a given seg_len.
bool in_triangle(std::size_t f1, std::size_t f2, std::size_t seg_len) noexcept;

/// Number of segments the estimator would use for a signal of `length`.
std::size_t segment_count(std::size_t length, std::size_t seg_len, double overlap);

/// Segment-averaged bicoherence estimate.
///
/// Each segment is mean-removed and Hann-tapered. With X the segment
/// spectrum, B(f1,f2) = mean X(f1) X(f2) conj(X(f1+f2)) and
///
///   b(f1,f2) = |B| / sqrt(mean |X(f1) X(f2)|^2 * mean |X(f1+f2)|^2)
///
/// which Cauchy-Schwarz bounds by 1. Cells with zero denominator get
/// magnitude 0 and phase 0.
///
/// Throws ArgumentError when seg_len is not a power of two >= 4 or overlap is
/// outside [0, 1); InsufficientDataError when fewer than 8 segments fit.
BicoherenceMap estimate_bicoherence(const audio::AudioClip& clip,
                                    std::size_t seg_len = kDefaultSegmentLength,
                                    double overlap = kDefaultOverlap);

/// Mean, variance, skewness and kurtosis of a sample, with expectations
/// replaced by averages.
struct MomentSet {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

// Variances at or below this are treated as degenerate (skewness = kurtosis = 0).
inline constexpr double kDegenerateVariance = 1e-12;

/// Population moments. Skewness and kurtosis standardize by the standard
/// deviation; kurtosis is not excess kurtosis. Throws ArgumentError for an
/// empty or non-finite collection.
MomentSet moments(std::span<const double> values);

/// [mean, var, skew, kurt] of the triangle magnitudes, then the same four of
/// the triangle phases.
std::array<double, 8> bicoherence_features(const BicoherenceMap& map);

}  // namespace speechlab::bicoherence
