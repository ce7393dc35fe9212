#include "speechlab/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "speechlab/error.hpp"

namespace speechlab::audio {

namespace fs = std::filesystem;

void validate(const AudioClip& clip) {
  if (clip.samples.empty()) throw ArgumentError("audio clip has no samples");
  if (clip.sample_rate <= 0) throw ArgumentError("sample rate must be positive");
  for (double s : clip.samples) {
    if (!std::isfinite(s)) throw ArgumentError("audio clip contains a non-finite sample");
  }
}

void require_canonical(const AudioClip& clip) {
  if (!clip.is_canonical()) {
    throw ArgumentError("expected a canonical clip (80000 samples at 16 kHz), got " +
                        std::to_string(clip.samples.size()) + " samples at " +
                        std::to_string(clip.sample_rate) + " Hz");
  }
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct WavFormat {
  std::uint16_t encoding = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

WavFormat parse_fmt(const unsigned char* p, std::uint32_t size) {
  if (size < 16) throw FormatError("fmt chunk shorter than 16 bytes");
  WavFormat fmt;
  fmt.encoding = read_u16(p);
  fmt.channels = read_u16(p + 2);
  fmt.sample_rate = read_u32(p + 4);
  fmt.block_align = read_u16(p + 12);
  fmt.bits = read_u16(p + 14);
  if (fmt.encoding == kFormatExtensible) {
    if (size < 40) throw FormatError("extensible fmt chunk shorter than 40 bytes");
    // First two bytes of the sub-format GUID carry the real format tag.
    fmt.encoding = read_u16(p + 24);
  }
  return fmt;
}

}  // namespace

AudioClip load_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path.string() + ": not a RIFF/WAVE file");
  }

  std::optional<WavFormat> fmt;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size > available) throw FormatError(path.string() + ": truncated fmt chunk");
      fmt = parse_fmt(bytes.data() + body, size);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      // Streaming writers sometimes leave the data size unset; clamp to the file.
      data_size = std::min<std::size_t>(size, available);
      break;
    }
    pos = body + size + (size & 1U);
  }
  if (!fmt) throw FormatError(path.string() + ": missing fmt chunk");
  if (data == nullptr) throw FormatError(path.string() + ": missing data chunk");
  if (fmt->sample_rate == 0) throw FormatError(path.string() + ": zero sample rate");
  if (fmt->channels != 1 && fmt->channels != 2) {
    throw UnsupportedError(path.string() + ": " + std::to_string(fmt->channels) +
                           " channels (only mono and stereo are supported)");
  }
  const bool pcm16 = fmt->encoding == kFormatPcm && fmt->bits == 16;
  const bool f32 = fmt->encoding == kFormatFloat && fmt->bits == 32;
  if (!pcm16 && !f32) {
    throw UnsupportedError(path.string() + ": encoding " + std::to_string(fmt->encoding) +
                           " with " + std::to_string(fmt->bits) +
                           " bits (only PCM16 and float32 are supported)");
  }
  const std::size_t bytes_per_sample = fmt->bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
  const std::size_t frames = data_size / frame_bytes;
  if (frames == 0) throw FormatError(path.string() + ": empty data chunk");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt->sample_rate);
  clip.source_id = path.string();
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < fmt->channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        sum += static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else {
        const std::uint32_t raw = read_u32(p);
        float value;
        std::memcpy(&value, &raw, sizeof value);
        sum += value;
      }
    }
    clip.samples[i] = sum / fmt->channels;
  }
  return clip;
}

void write_wav(const fs::path& path, const AudioClip& clip, SampleFormat format) {
  validate(clip);
  const bool pcm16 = format == SampleFormat::Pcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * (bits / 8));

  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : clip.samples) {
    if (pcm16) {
      const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    } else {
      const float value = static_cast<float>(s);
      std::uint32_t raw;
      std::memcpy(&raw, &value, sizeof raw);
      put_u32(out, raw);
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("short write to " + path.string());
}

namespace {

constexpr double kZeroCrossings = 16.0;  // per side, at the lower of the two rates
constexpr double kKaiserBeta = 8.6;
constexpr double kCutoffFraction = 0.97;  // of the lower Nyquist

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw ArgumentError("target rate must be positive");
  validate(clip);
  if (target_rate == clip.sample_rate) return clip;

  const std::size_t in_len = clip.samples.size();
  const auto src = static_cast<std::uint64_t>(clip.sample_rate);
  const auto dst = static_cast<std::uint64_t>(target_rate);
  const std::size_t out_len = static_cast<std::size_t>((in_len * dst + src / 2) / src);

  const double ratio = static_cast<double>(dst) / static_cast<double>(src);
  const double scale = std::min(1.0, ratio);
  // Cutoff in cycles per input sample.
  const double cutoff = 0.5 * scale * kCutoffFraction;
  const double half_width = kZeroCrossings / scale;
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);

  // Output n sits at input position n*src/dst = base + phase/dst; the
  // fractional phase cycles through dst/gcd values, so kernels are shared.
  const std::uint64_t step = std::gcd(src, dst);
  struct Kernel {
    std::ptrdiff_t first = 0;
    std::vector<double> taps;
  };
  auto make_kernel = [&](std::uint64_t phase) {
    const double frac = static_cast<double>(phase) / static_cast<double>(dst);
    Kernel k;
    k.first = static_cast<std::ptrdiff_t>(std::ceil(frac - half_width));
    const auto last = static_cast<std::ptrdiff_t>(std::floor(frac + half_width));
    for (std::ptrdiff_t m = k.first; m <= last; ++m) {
      const double x = static_cast<double>(m) - frac;
      const double r = x / half_width;
      const double window =
          std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
      k.taps.push_back(2.0 * cutoff * sinc(2.0 * cutoff * x) * window);
    }
    return k;
  };
  const std::uint64_t phase_count = dst / step;
  constexpr std::uint64_t kMaxCachedPhases = 4096;
  std::vector<std::optional<Kernel>> cache(phase_count <= kMaxCachedPhases ? phase_count : 0);

  AudioClip out;
  out.sample_rate = target_rate;
  out.source_id = clip.source_id;
  out.samples.resize(out_len);
  const auto in_size = static_cast<std::ptrdiff_t>(in_len);
  for (std::size_t n = 0; n < out_len; ++n) {
    const std::uint64_t pos = n * src;
    const auto base = static_cast<std::ptrdiff_t>(pos / dst);
    const std::uint64_t phase = pos % dst;
    Kernel local;
    const Kernel* kernel = nullptr;
    if (!cache.empty()) {
      auto& slot = cache[phase / step];
      if (!slot) slot = make_kernel(phase);
      kernel = &*slot;
    } else {
      local = make_kernel(phase);
      kernel = &local;
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < kernel->taps.size(); ++t) {
      const std::ptrdiff_t j = base + kernel->first + static_cast<std::ptrdiff_t>(t);
      if (j >= 0 && j < in_size) acc += clip.samples[static_cast<std::size_t>(j)] * kernel->taps[t];
    }
    out.samples[n] = acc;
  }
  return out;
}

std::vector<AudioClip> canonicalize(const AudioClip& clip) {
  const AudioClip at_rate = resample(clip, kCanonicalRate);
  std::vector<AudioClip> segments;
  const std::size_t count = at_rate.samples.size() / kCanonicalLength;
  segments.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    AudioClip seg;
    seg.sample_rate = kCanonicalRate;
    seg.source_id = clip.source_id + "#" + std::to_string(s);
    const auto first = at_rate.samples.begin() + static_cast<std::ptrdiff_t>(s * kCanonicalLength);
    seg.samples.assign(first, first + static_cast<std::ptrdiff_t>(kCanonicalLength));
    segments.push_back(std::move(seg));
  }
  return segments;
}

fs::path CorpusManifest::resolve(const ManifestEntry& entry) const {
  const fs::path p(entry.path);
  return p.is_absolute() ? p : base_dir / p;
}

CorpusManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw ParseError(path.string() + ": manifest must be a JSON array");

  CorpusManifest manifest;
  manifest.base_dir = path.parent_path();
  std::set<std::string> seen;
  bool has_ai = false;
  bool has_source = false;
  std::size_t row = 0;
  for (const auto& item : doc) {
    ++row;
    if (!item.is_object() || !item.contains("path") || !item.contains("label") ||
        !item["path"].is_string() || !item["label"].is_string()) {
      throw ParseError("manifest entry needs string fields \"path\" and \"label\"", row);
    }
    const auto path_text = item["path"].get<std::string>();
    const auto label_text = item["label"].get<std::string>();
    const auto label = parse_label(label_text);
    if (!label) throw ParseError("unknown label '" + label_text + "'", row);
    if (!seen.insert(path_text).second) throw ParseError("duplicate path '" + path_text + "'", row);
    has_ai = has_ai || *label == ClassLabel::AI;
    has_source = has_source || (*label != ClassLabel::AI && *label != ClassLabel::Human);
    manifest.entries.push_back({path_text, *label});
  }
  if (has_ai && has_source) {
    throw ParseError(path.string() + ": manifest mixes 'AI' with TTS source labels");
  }
  manifest.labeling_mode = has_ai ? LabelingMode::Binary : LabelingMode::Multiclass;
  return manifest;
}

void write_manifest(const fs::path& path, const CorpusManifest& manifest) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& entry : manifest.entries) {
    doc.push_back({{"path", entry.path}, {"label", std::string(to_string(entry.label))}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace speechlab::audio
