#include "speechlab/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "speechlab/bicoherence.hpp"
#include "speechlab/cepstral.hpp"
#include "speechlab/error.hpp"

namespace speechlab::features {

FeatureVector extract(const audio::AudioClip& clip, LabelingMode mode, ClassLabel label) {
  if (!is_legal(label, mode)) {
    throw ArgumentError("label '" + std::string(to_string(label)) + "' is not legal in " +
                        std::string(to_string(mode)) + " mode");
  }
  audio::require_canonical(clip);
  const auto bic = bicoherence::bicoherence_features(bicoherence::estimate_bicoherence(clip));
  const auto cep = cepstral::cepstral_features(clip);

  FeatureVector fv;
  std::copy(bic.begin(), bic.end(), fv.values.begin());
  std::copy(cep.begin(), cep.end(), fv.values.begin() + bic.size());
  fv.label = label;
  return fv;
}

std::string to_csv(std::span<const FeatureVector> vectors) {
  std::string out(kCsvHeader);
  out += '\n';
  char buf[32];
  for (const auto& fv : vectors) {
    for (double v : fv.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      out += ',';
    }
    out += to_string(fv.label);
    out += '\n';
  }
  return out;
}

void write_csv(std::span<const FeatureVector> vectors, const std::filesystem::path& path) {
  if (vectors.empty()) throw ArgumentError("refusing to write an empty feature file");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_csv(vectors);
  if (!out) throw Error("short write to " + path.string());
}

namespace {

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

void check_header(std::string_view line) {
  if (line == kCsvHeader) return;
  const auto cells = split_cells(line);
  std::vector<std::string_view> expected(kColumnNames.begin(), kColumnNames.end());
  expected.push_back("label");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (std::find(cells.begin(), cells.end(), expected[i]) == cells.end()) {
      throw ParseError("header is missing column '" + std::string(expected[i]) + "'", 1);
    }
  }
  for (std::size_t i = 0; i < std::min(cells.size(), expected.size()); ++i) {
    if (cells[i] != expected[i]) {
      throw ParseError("header column " + std::to_string(i + 1) + " is '" + std::string(cells[i]) +
                           "', expected '" + std::string(expected[i]) + "'",
                       1);
    }
  }
  throw ParseError("header has unexpected extra columns", 1);
}

}  // namespace

std::vector<FeatureVector> parse_csv(std::string_view text) {
  std::vector<FeatureVector> out;
  std::size_t row = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = trim_cr(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++row;
    if (!saw_header) {
      check_header(line);
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split_cells(line);
    if (cells.size() != kFeatureCount + 1) {
      throw ParseError("expected " + std::to_string(kFeatureCount + 1) + " cells, found " +
                           std::to_string(cells.size()),
                       row);
    }
    FeatureVector fv;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto cell = cells[i];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError("column '" + std::string(kColumnNames[i]) + "' holds non-numeric value '" +
                             std::string(cell) + "'",
                         row);
      }
      fv.values[i] = v;
    }
    const auto label = parse_label(cells.back());
    if (!label) throw ParseError("unknown label '" + std::string(cells.back()) + "'", row);
    fv.label = *label;
    out.push_back(fv);
  }
  if (!saw_header) throw ParseError("empty feature file", 1);
  return out;
}

std::vector<FeatureVector> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::optional<std::vector<std::size_t>> feature_group(std::string_view name) {
  auto range = [](std::size_t first, std::size_t last) {
    std::vector<std::size_t> cols;
    for (std::size_t c = first; c < last; ++c) cols.push_back(c);
    return cols;
  };
  if (name == "all") return range(0, 14);
  if (name == "bicoherence") return range(0, 8);
  if (name == "bic_mag") return range(0, 4);
  if (name == "bic_phase") return range(4, 8);
  if (name == "mfcc") return range(8, 10);
  if (name == "delta") return range(10, 12);
  if (name == "delta2") return range(12, 14);
  return std::nullopt;
}

}  // namespace speechlab::features
