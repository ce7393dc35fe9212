#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "speechlab/labels.hpp"

namespace speechlab::audio {

inline constexpr int kCanonicalRate = 16000;
inline constexpr std::size_t kCanonicalLength = 80000;  // 5 s at 16 kHz

/// Mono PCM samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kCanonicalRate;
  std::string source_id;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  bool is_canonical() const {
    return sample_rate == kCanonicalRate && samples.size() == kCanonicalLength;
  }
};

// Throws ArgumentError unless samples are non-empty and finite and the rate is positive.
void validate(const AudioClip& clip);

// Throws ArgumentError unless the clip is 80000 samples at 16 kHz.
void require_canonical(const AudioClip& clip);

enum class SampleFormat { Pcm16, Float32 };

/// Reads a RIFF/WAVE file holding PCM16 or float32 samples in one or two
/// channels. Integer samples are divided by 32768; stereo is averaged.
/// Throws FormatError on a malformed header, UnsupportedError on other
/// encodings or channel counts.
AudioClip load_wav(const std::filesystem::path& path);

/// Writes a mono WAV. PCM16 values are round(x * 32768) clamped to int16.
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               SampleFormat format = SampleFormat::Pcm16);

/// Windowed-sinc (Kaiser) resampler. Output length is
/// round(len * target / source); identical rates return the input unchanged.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Resamples to 16 kHz and cuts consecutive, non-overlapping 5 s segments.
/// The trailing remainder is dropped; a clip shorter than 5 s yields none.
std::vector<AudioClip> canonicalize(const AudioClip& clip);

struct ManifestEntry {
  std::string path;
  ClassLabel label;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  LabelingMode labeling_mode = LabelingMode::Multiclass;
  // Directory relative entry paths are resolved against.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& entry) const;
};

/// Parses a JSON array of {"path", "label"}. The mode is binary when every
/// label is Human or AI, multiclass otherwise; mixing AI with TTS source
/// labels, duplicate paths, and unknown labels are ParseErrors.
CorpusManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);

}  // namespace speechlab::audio
