#include "speechlab/melspec_image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <optional>

#include <nlohmann/json.hpp>
#include <png.h>

#include "speechlab/dsp.hpp"
#include "speechlab/error.hpp"
#include "speechlab/parallel.hpp"

namespace speechlab::melspec {

namespace fs = std::filesystem;

MelImage melspectrogram_image(const audio::AudioClip& clip) {
  audio::require_canonical(clip);
  audio::validate(clip);
  static const auto bank = dsp::mel_filterbank(kImageSize, kWindow, audio::kCanonicalRate, 0.0,
                                               audio::kCanonicalRate / 2.0);
  static const auto window = dsp::hann_window(kWindow);
  const dsp::FftPlan plan(kWindow);

  std::vector<double> log_energy(kImageSize * kImageSize);  // [band][frame]
  std::vector<dsp::Complex> buffer(kWindow);
  for (std::size_t t = 0; t < kImageSize; ++t) {
    const double* x = clip.samples.data() + t * kHop;
    for (std::size_t i = 0; i < kWindow; ++i) buffer[i] = x[i] * window[i];
    plan.forward(buffer);
    const auto energies = bank.apply(dsp::power_spectrum(buffer));
    for (std::size_t b = 0; b < kImageSize; ++b) {
      log_energy[b * kImageSize + t] = std::log10(std::max(energies[b], kLogFloor));
    }
  }

  const auto [lo_it, hi_it] = std::minmax_element(log_energy.begin(), log_energy.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  MelImage image;
  image.clip_id = clip.source_id;
  image.pixels.assign(kImageSize * kImageSize * kChannels, 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < log_energy.size(); ++i) {
      const double v = std::clamp((log_energy[i] - lo) / range, 0.0, 1.0);
      for (std::size_t c = 0; c < kChannels; ++c) image.pixels[i * kChannels + c] = v;
    }
  }
  return image;
}

std::vector<std::uint8_t> encode_png(const MelImage& image) {
  if (image.pixels.size() != kImageSize * kImageSize * kChannels) throw ArgumentError("image has the wrong shape");
  std::vector<std::uint8_t> raw(image.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image.pixels[i], 0.0, 1.0) * 255.0));
  }
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = kImageSize;
  png.height = kImageSize;
  png.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw Error(std::string("PNG encoding failed: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw Error(std::string("PNG encoding failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

void write_png(const MelImage& image, const fs::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

DecodedImage read_png(const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw FormatError(path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&png);
    throw FormatError(path.string() + ": " + png.message);
  }
  DecodedImage out;
  out.width = png.width;
  out.height = png.height;
  out.pixels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out.pixels[i] = raw[i] / 255.0;
  return out;
}

ExportSummary export_dataset(const audio::CorpusManifest& manifest, const fs::path& out_dir, std::size_t threads) {
  fs::create_directories(out_dir);
  const std::size_t n = manifest.entries.size();
  std::vector<std::vector<ExportEntry>> produced(n);
  std::vector<std::optional<ExportFailure>> failed(n);
  std::mutex dir_mutex;

  parallel_for(
      n,
      [&](std::size_t i) {
        const auto& entry = manifest.entries[i];
        try {
          const auto clip = audio::load_wav(manifest.resolve(entry));
          const auto segments = audio::canonicalize(clip);
          if (segments.empty()) throw InsufficientDataError("clip shorter than 5 s");
          const std::string label_dir(to_string(entry.label));
          {
            std::lock_guard lock(dir_mutex);
            fs::create_directories(out_dir / label_dir);
          }
          char prefix[32];
          std::snprintf(prefix, sizeof prefix, "%06zu_", i);
          const std::string stem = fs::path(entry.path).stem().string();
          for (std::size_t s = 0; s < segments.size(); ++s) {
            auto image = melspectrogram_image(segments[s]);
            image.label = entry.label;
            image.clip_id = prefix + stem + "_" + std::to_string(s);
            const std::string rel = label_dir + "/" + image.clip_id + ".png";
            write_png(image, out_dir / rel);
            produced[i].push_back({rel, entry.label});
          }
        } catch (const std::exception& e) {
          produced[i].clear();
          failed[i] = ExportFailure{entry.path, e.what()};
        }
      },
      threads);

  ExportSummary summary;
  for (std::size_t i = 0; i < n; ++i) {
    summary.images.insert(summary.images.end(), produced[i].begin(), produced[i].end());
    if (failed[i]) summary.failures.push_back(*failed[i]);
  }
  nlohmann::json index = nlohmann::json::array();
  for (const auto& img : summary.images) {
    index.push_back({{"path", img.path}, {"label", std::string(to_string(img.label))}});
  }
  summary.index_path = out_dir / "index.json";
  std::ofstream out(summary.index_path, std::ios::trunc);
  if (!out) throw Error("cannot write " + summary.index_path.string());
  out << index.dump(2) << '\n';
  return summary;
}

}  // namespace speechlab::melspec
