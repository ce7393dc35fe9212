#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "speechlab/audio_io.hpp"
#include "speechlab/classifiers.hpp"

namespace fixture {

namespace fs = std::filesystem;

inline speechlab::audio::AudioClip tone(double hz, std::size_t n, int rate = 16000, double amp = 0.5,
                                        double phase = 0.0) {
  speechlab::audio::AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.samples[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate + phase);
  }
  return c;
}

inline speechlab::audio::AudioClip noise(std::size_t n, std::uint64_t seed, double sd = 0.2, int rate = 16000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  speechlab::audio::AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(n);
  for (auto& s : c.samples) s = g(rng);
  return c;
}

// Three cosines with the top one at the sum frequency. The top tone's phase
// is either locked to the sum of the other two or redrawn every `block`.
inline speechlab::audio::AudioClip coupled_tones(bool locked, std::uint64_t seed, std::size_t block = 256) {
  const double fs_hz = 16000.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
  speechlab::audio::AudioClip c;
  c.samples.resize(speechlab::audio::kCanonicalLength);
  double p3 = 0.0;
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    if (!locked && i % block == 0) p3 = ph(rng);
    const double t = static_cast<double>(i) / fs_hz;
    c.samples[i] = (std::cos(2 * std::numbers::pi * 500 * t) + std::cos(2 * std::numbers::pi * 700 * t) +
                    std::cos(2 * std::numbers::pi * 1200 * t + p3)) / 3.0;
  }
  return c;
}

inline speechlab::classifiers::Dataset gaussian_blobs(std::size_t n_per_class, std::size_t d,
                                                      const std::vector<std::vector<double>>& centers,
                                                      std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  speechlab::classifiers::Dataset data;
  data.feature_count = d;
  for (std::size_t c = 0; c < centers.size(); ++c) data.class_names.push_back("c" + std::to_string(c));
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n_per_class; ++i) {
    for (std::size_t c = 0; c < centers.size(); ++c) {
      for (std::size_t j = 0; j < d; ++j) row[j] = centers[c][j] + g(rng);
      data.add(row, c);
    }
  }
  return data;
}

// Centers at +-3 e1 in d dimensions.
inline speechlab::classifiers::Dataset separated_pair(std::size_t n_total, std::size_t d, std::uint64_t seed) {
  std::vector<double> a(d, 0.0), b(d, 0.0);
  a[0] = -3.0;
  b[0] = 3.0;
  return gaussian_blobs(n_total / 2, d, {a, b}, seed);
}

inline speechlab::classifiers::Dataset xor_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  speechlab::classifiers::Dataset data;
  data.feature_count = 2;
  data.class_names = {"even", "odd"};
  while (data.size() < n) {
    const double x = u(rng), y = u(rng);
    if (std::abs(x) < 0.05 || std::abs(y) < 0.05) continue;  // keep a margin off the axes
    const std::vector<double> row{x, y};
    data.add(row, (x > 0) != (y > 0) ? 1 : 0);
  }
  return data;
}

inline speechlab::classifiers::Dataset circles(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, 0.08);
  speechlab::classifiers::Dataset data;
  data.feature_count = 2;
  data.class_names = {"inner", "outer"};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % 2;
    const double r = (c == 0 ? 0.5 : 1.0) + jitter(rng);
    const double a = angle(rng);
    const std::vector<double> row{r * std::cos(a), r * std::sin(a)};
    data.add(row, c);
  }
  return data;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("speechlab_" + tag + "_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixture
