#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "speechlab/audio_io.hpp"
#include "speechlab/labels.hpp"

namespace speechlab::features {

inline constexpr std::size_t kFeatureCount = 14;

inline constexpr std::array<std::string_view, kFeatureCount> kColumnNames = {
    "bic_mag_mean", "bic_mag_var",  "bic_mag_skew", "bic_mag_kurt", "bic_ph_mean",
    "bic_ph_var",   "bic_ph_skew",  "bic_ph_kurt",  "mfcc_mean",    "mfcc_var",
    "delta_mean",   "delta_var",    "delta2_mean",  "delta2_var"};

// Frozen CSV header: the 14 feature columns followed by the label.
inline constexpr std::string_view kCsvHeader =
    "bic_mag_mean,bic_mag_var,bic_mag_skew,bic_mag_kurt,bic_ph_mean,bic_ph_var,bic_ph_skew,"
    "bic_ph_kurt,mfcc_mean,mfcc_var,delta_mean,delta_var,delta2_mean,delta2_var,label";

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  ClassLabel label = ClassLabel::Human;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Bicoherence moments (8) followed by cepstral statistics (6) of a
/// canonical clip. Throws ArgumentError when `label` is not legal for `mode`.
FeatureVector extract(const audio::AudioClip& clip, LabelingMode mode, ClassLabel label);

/// Writes the frozen header then one row per vector, 17 significant digits.
/// Throws ArgumentError for an empty list.
void write_csv(std::span<const FeatureVector> vectors, const std::filesystem::path& path);
std::string to_csv(std::span<const FeatureVector> vectors);

/// Throws ParseError (with the 1-based file row) on header mismatch,
/// non-numeric or non-finite cells, wrong cell counts, or unknown labels.
std::vector<FeatureVector> read_csv(const std::filesystem::path& path);
std::vector<FeatureVector> parse_csv(std::string_view text);

/// Column subsets matching the ablation groups: all, bicoherence, bic_mag,
/// bic_phase, mfcc, delta, delta2. Returns nullopt for an unknown group.
std::optional<std::vector<std::size_t>> feature_group(std::string_view name);

}  // namespace speechlab::features
