#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>

#include "speechlab/audio_io.hpp"
#include "speechlab/labels.hpp"

namespace speechlab::synth {

/// Classes produced by the generator, in manifest order.
inline constexpr std::array<ClassLabel, 5> kSourceClasses = {
    ClassLabel::Human, ClassLabel::IITM_TTS, ClassLabel::Hearling, ClassLabel::AmazonPolly,
    ClassLabel::VoiceMaker};

/// One canonical 5 s clip for a source class.
///
/// Human clips: jittered, vibrato-modulated pitch, harmonics whose phases
/// drift independently (no phase coupling), syllabic amplitude modulation
/// and low-passed breath noise. TTS clips: flat pitch, harmonics phase-locked
/// to the fundamental with a class-specific phase offset pattern, and
/// class-specific f0 range, spectral tilt, bandwidth and noise floor.
audio::AudioClip generate_clip(ClassLabel source, std::mt19937_64& rng);

/// Writes n_per_class WAVs per source class under out_dir/<label>/ plus
/// out_dir/manifest.json. Clip i of class c uses an engine derived from
/// (seed, c, i), so the corpus is a pure function of its arguments.
audio::CorpusManifest synthesize_corpus(const std::filesystem::path& out_dir, std::size_t n_per_class,
                                        std::uint64_t seed, std::size_t threads = 0);

}  // namespace speechlab::synth
