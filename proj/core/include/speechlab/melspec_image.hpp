#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "speechlab/audio_io.hpp"
#include "speechlab/labels.hpp"

namespace speechlab::melspec {

inline constexpr std::size_t kImageSize = 64;
inline constexpr std::size_t kChannels = 3;
inline constexpr std::size_t kWindow = 1024;
// floor((80000 - 1024) / 63): 64 frames span a canonical clip.
inline constexpr std::size_t kHop = 1253;
inline constexpr double kLogFloor = 1e-10;

/// 64 x 64 x 3 image in [0, 1], stored [row][col][channel]. Row r is mel
/// band r (row 0 is the lowest band), column t is frame t. The three
/// channels hold the same value.
struct MelImage {
  std::vector<double> pixels;
  std::string clip_id;
  ClassLabel label = ClassLabel::Human;

  double at(std::size_t row, std::size_t col, std::size_t channel = 0) const {
    return pixels[(row * kImageSize + col) * kChannels + channel];
  }
};

/// Log10 mel power spectrogram of a canonical clip, min-max normalized per
/// image (a constant image becomes all zeros). Throws ArgumentError for a
/// non-canonical clip.
MelImage melspectrogram_image(const audio::AudioClip& clip);

/// 8-bit RGB PNG with value round(pixel * 255). Output bytes are a pure
/// function of the pixels.
std::vector<std::uint8_t> encode_png(const MelImage& image);
void write_png(const MelImage& image, const std::filesystem::path& path);

/// Decoded 8-bit RGB pixels scaled back to [0, 1].
struct DecodedImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;  // [row][col][channel]
};
DecodedImage read_png(const std::filesystem::path& path);

struct ExportFailure {
  std::string path;
  std::string reason;
};

struct ExportEntry {
  std::string path;  // relative to the output directory
  ClassLabel label;
};

struct ExportSummary {
  std::vector<ExportEntry> images;
  std::vector<ExportFailure> failures;
  std::filesystem::path index_path;
};

/// Writes out_dir/<label>/<clip_id>.png for every canonical segment of every
/// manifest entry plus out_dir/index.json ([{"path", "label"}], paths
/// relative to out_dir). Clip ids are "<entry index>_<file stem>_<segment>".
/// Unreadable entries are collected in `failures`; export continues.
/// `threads` 0 picks a default.
ExportSummary export_dataset(const audio::CorpusManifest& manifest, const std::filesystem::path& out_dir,
                             std::size_t threads = 0);

}  // namespace speechlab::melspec
