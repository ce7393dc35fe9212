#include "speechlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "speechlab/classifiers.hpp"
#include "speechlab/error.hpp"
#include "speechlab/parallel.hpp"

namespace speechlab::synth {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kBlock = 64;  // samples per control-rate update

struct Voice {
  double f0_lo;
  double f0_hi;
  double tilt_db_per_octave;
  double bandwidth_hz;
  double noise_floor;
  double phase_step;        // phase offset per harmonic index, radians
  double locked_fraction;   // share of harmonics phase-locked to the fundamental
  double am_rate_hz;
  double am_depth;
};

Voice voice_for(ClassLabel source) {
  switch (source) {
    case ClassLabel::IITM_TTS: return {110.0, 130.0, -6.0, 4000.0, 0.002, 0.0, 1.0, 4.0, 0.2};
    case ClassLabel::Hearling: return {190.0, 210.0, -9.0, 3200.0, 0.010, 0.7, 0.8, 5.0, 0.1};
    case ClassLabel::AmazonPolly: return {150.0, 165.0, -3.0, 5500.0, 0.0005, 1.9, 0.6, 3.0, 0.3};
    case ClassLabel::VoiceMaker: return {225.0, 245.0, -12.0, 2600.0, 0.020, 2.6, 0.9, 6.0, 0.15};
    default: break;
  }
  throw ArgumentError("no TTS voice for label '" + std::string(to_string(source)) + "'");
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void normalize_peak(std::vector<double>& x, double peak) {
  double top = 0.0;
  for (double v : x) top = std::max(top, std::abs(v));
  if (top > 0.0) {
    for (auto& v : x) v *= peak / top;
  }
}

audio::AudioClip human_clip(std::mt19937_64& rng) {
  const double fs = audio::kCanonicalRate;
  const std::size_t n = audio::kCanonicalLength;
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double f0_base = uniform(rng, 100.0, 220.0);
  const double vibrato_rate = uniform(rng, 4.5, 6.5);
  const double vibrato_depth = uniform(rng, 0.01, 0.03);
  const double am_rate = uniform(rng, 3.0, 6.0);
  const double am_phase = uniform(rng, 0.0, kTwoPi);
  const double breath_level = uniform(rng, 0.02, 0.05);
  const double formants[3] = {uniform(rng, 450.0, 800.0), uniform(rng, 1100.0, 2000.0),
                              uniform(rng, 2300.0, 3000.0)};
  const std::size_t harmonics = static_cast<std::size_t>(3800.0 / f0_base);

  std::vector<double> drift(harmonics + 1);
  for (auto& d : drift) d = uniform(rng, 0.0, kTwoPi);

  std::vector<double> out(n);
  double theta = 0.0;
  double intonation = 0.0;
  double jitter = 0.0;
  double breath_state = 0.0;
  std::vector<std::complex<double>> rot(harmonics + 1);
  std::vector<double> amp(harmonics + 1);
  for (std::size_t start = 0; start < n; start += kBlock) {
    // Control-rate updates: slow intonation walk, cycle jitter, phase drift.
    intonation = std::clamp(intonation + 0.004 * gauss(rng), -0.15, 0.15);
    jitter = 0.01 * gauss(rng);
    const double t_block = static_cast<double>(start) / fs;
    const double f0 = f0_base * (1.0 + intonation + jitter +
                                 vibrato_depth * std::sin(kTwoPi * vibrato_rate * t_block));
    for (std::size_t k = 1; k <= harmonics; ++k) {
      drift[k] += 0.35 * gauss(rng);
      rot[k] = std::polar(1.0, drift[k]);
      const double hz = f0 * static_cast<double>(k);
      double envelope = 0.05;
      for (double f : formants) envelope += std::exp(-0.5 * std::pow((hz - f) / 180.0, 2.0));
      amp[k] = envelope / std::sqrt(static_cast<double>(k));
    }
    const std::size_t stop = std::min(n, start + kBlock);
    for (std::size_t i = start; i < stop; ++i) {
      theta += kTwoPi * f0 / fs;
      const std::complex<double> base = std::polar(1.0, theta);
      std::complex<double> power = base;
      double v = 0.0;
      for (std::size_t k = 1; k <= harmonics; ++k) {
        v += amp[k] * (power * rot[k]).imag();
        power *= base;
      }
      const double t = static_cast<double>(i) / fs;
      const double am = 0.55 + 0.45 * std::sin(kTwoPi * am_rate * t + am_phase);
      breath_state = 0.9 * breath_state + 0.1 * gauss(rng);
      out[i] = am * v + breath_level * breath_state * 4.0;
    }
  }
  audio::AudioClip clip;
  clip.samples = std::move(out);
  normalize_peak(clip.samples, uniform(rng, 0.4, 0.8));
  return clip;
}

audio::AudioClip tts_clip(ClassLabel source, std::mt19937_64& rng) {
  const Voice voice = voice_for(source);
  const double fs = audio::kCanonicalRate;
  const std::size_t n = audio::kCanonicalLength;
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double f0 = uniform(rng, voice.f0_lo, voice.f0_hi);
  const std::size_t harmonics = static_cast<std::size_t>(voice.bandwidth_hz / f0);
  const double am_phase = uniform(rng, 0.0, kTwoPi);
  const double base_phase = uniform(rng, 0.0, kTwoPi);

  // Locked harmonics keep phase k * theta + k * phase_step (quadratic phase
  // coupling); the rest drift like natural speech.
  std::vector<bool> locked(harmonics + 1);
  std::vector<double> drift(harmonics + 1);
  std::vector<double> amp(harmonics + 1);
  for (std::size_t k = 1; k <= harmonics; ++k) {
    locked[k] = k == 1 || uniform(rng, 0.0, 1.0) < voice.locked_fraction;
    drift[k] = voice.phase_step * static_cast<double>(k);
    amp[k] = std::pow(static_cast<double>(k), voice.tilt_db_per_octave / 6.0206);
  }

  std::vector<double> out(n);
  std::vector<std::complex<double>> rot(harmonics + 1);
  const std::complex<double> step = std::polar(1.0, kTwoPi * f0 / fs);
  std::complex<double> base = std::polar(1.0, base_phase);
  for (std::size_t start = 0; start < n; start += kBlock) {
    for (std::size_t k = 1; k <= harmonics; ++k) {
      if (!locked[k]) drift[k] += 0.35 * gauss(rng);
      rot[k] = std::polar(1.0, drift[k]);
    }
    const std::size_t stop = std::min(n, start + kBlock);
    for (std::size_t i = start; i < stop; ++i) {
      base *= step;
      std::complex<double> power = base;
      double v = 0.0;
      for (std::size_t k = 1; k <= harmonics; ++k) {
        v += amp[k] * (power * rot[k]).imag();
        power *= base;
      }
      const double t = static_cast<double>(i) / fs;
      const double am = 1.0 - voice.am_depth + voice.am_depth * std::sin(kTwoPi * voice.am_rate_hz * t + am_phase);
      out[i] = am * v;
    }
    // Renormalize the rotating phasor to stop magnitude creep.
    base /= std::abs(base);
  }
  normalize_peak(out, 1.0);
  for (auto& v : out) v += voice.noise_floor * gauss(rng);
  audio::AudioClip clip;
  clip.samples = std::move(out);
  normalize_peak(clip.samples, uniform(rng, 0.4, 0.8));
  return clip;
}

}  // namespace

audio::AudioClip generate_clip(ClassLabel source, std::mt19937_64& rng) {
  auto clip = source == ClassLabel::Human ? human_clip(rng) : tts_clip(source, rng);
  clip.sample_rate = audio::kCanonicalRate;
  clip.source_id = std::string(to_string(source));
  return clip;
}

audio::CorpusManifest synthesize_corpus(const fs::path& out_dir, std::size_t n_per_class, std::uint64_t seed,
                                        std::size_t threads) {
  if (n_per_class < 1) throw ArgumentError("need at least one clip per class");
  audio::CorpusManifest manifest;
  manifest.base_dir = out_dir;
  manifest.labeling_mode = LabelingMode::Multiclass;
  for (ClassLabel label : kSourceClasses) {
    fs::create_directories(out_dir / std::string(to_string(label)));
    for (std::size_t i = 0; i < n_per_class; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s/%s_%04zu.wav", std::string(to_string(label)).c_str(),
                    std::string(to_string(label)).c_str(), i);
      manifest.entries.push_back({name, label});
    }
  }
  parallel_for(
      manifest.entries.size(),
      [&](std::size_t j) {
        const std::size_t c = j / n_per_class;
        const std::size_t i = j % n_per_class;
        auto rng = classifiers::derived_rng(seed, (static_cast<std::uint64_t>(c) << 32) | i);
        auto clip = generate_clip(manifest.entries[j].label, rng);
        audio::write_wav(manifest.resolve(manifest.entries[j]), clip);
      },
      threads);
  audio::write_manifest(out_dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace speechlab::synth
