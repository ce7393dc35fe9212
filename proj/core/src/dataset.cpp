#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "classifiers_internal.hpp"
#include "speechlab/classifiers.hpp"
#include "speechlab/error.hpp"

namespace speechlab::classifiers {

void Dataset::add(std::span<const double> values, std::size_t label) {
  if (values.size() != feature_count) throw ArgumentError("row length does not match feature count");
  rows.insert(rows.end(), values.begin(), values.end());
  labels.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_count = feature_count;
  out.class_names = class_names;
  out.rows.reserve(indices.size() * feature_count);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.add(row(i), labels.at(i));
  return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> columns) const {
  Dataset out;
  out.feature_count = columns.size();
  out.class_names = class_names;
  out.labels = labels;
  out.rows.reserve(size() * columns.size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto r = row(i);
    for (std::size_t c : columns) {
      if (c >= feature_count) throw ArgumentError("column index out of range");
      out.rows.push_back(r[c]);
    }
  }
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_count(), 0);
  for (std::size_t y : labels) ++counts.at(y);
  return counts;
}

std::size_t Dataset::distinct_classes() const {
  const auto counts = class_counts();
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

void Dataset::validate() const {
  if (feature_count == 0) throw ArgumentError("dataset has no feature columns");
  if (rows.size() != labels.size() * feature_count) throw ArgumentError("dataset shape is inconsistent");
  if (size() < 2) throw ArgumentError("dataset needs at least 2 rows");
  for (std::size_t y : labels) {
    if (y >= class_count()) throw ArgumentError("label index " + std::to_string(y) + " out of range");
  }
  for (double v : rows) {
    if (!std::isfinite(v)) throw ArgumentError("dataset contains a non-finite value");
  }
  if (distinct_classes() < 2) throw ArgumentError("dataset needs at least 2 distinct classes");
}

Dataset make_dataset(std::span<const features::FeatureVector> vectors,
                     std::span<const std::size_t> columns) {
  std::vector<ClassLabel> present;
  for (ClassLabel label : kAllLabels) {
    if (std::any_of(vectors.begin(), vectors.end(), [&](const auto& fv) { return fv.label == label; })) {
      present.push_back(label);
    }
  }
  Dataset data;
  data.feature_count = columns.size();
  for (ClassLabel label : present) data.class_names.emplace_back(to_string(label));
  std::vector<double> row(columns.size());
  for (const auto& fv : vectors) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] >= fv.values.size()) throw ArgumentError("column index out of range");
      row[c] = fv.values[columns[c]];
    }
    const auto it = std::find(present.begin(), present.end(), fv.label);
    data.add(row, static_cast<std::size_t>(it - present.begin()));
  }
  return data;
}

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::LDA: return "lda";
    case Family::LinearSVM: return "svm";
    case Family::WeightedKNN: return "knn";
    case Family::BoostedTrees: return "boosted";
    case Family::BaggedTrees: return "bagged";
    case Family::RUSBoostedTrees: return "rusboost";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view name) noexcept {
  for (Family f : {Family::LDA, Family::LinearSVM, Family::WeightedKNN, Family::BoostedTrees,
                   Family::BaggedTrees, Family::RUSBoostedTrees}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

Standardizer Standardizer::fit(const Dataset& data) {
  const std::size_t d = data.feature_count;
  const double n = static_cast<double>(data.size());
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = data.row(i);
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  for (auto& m : s.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = data.row(i);
    for (std::size_t j = 0; j < d; ++j) var[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / n);
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean[j]))) s.scale[j] = sd;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
  return out;
}

Dataset Standardizer::apply(const Dataset& data) const {
  Dataset out;
  out.feature_count = data.feature_count;
  out.class_names = data.class_names;
  out.labels = data.labels;
  out.rows.reserve(data.rows.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto z = apply(data.row(i));
    out.rows.insert(out.rows.end(), z.begin(), z.end());
  }
  return out;
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

namespace detail {

std::vector<double> softmax(std::span<const double> logits) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : logits) top = std::max(top, v);
  std::vector<double> out(logits.size(), 0.0);
  if (!std::isfinite(top)) {
    // Every class ruled out; fall back to uniform.
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return out;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::isfinite(logits[i]) ? std::exp(logits[i] - top) : 0.0;
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void require_trainable(const Dataset& data) {
  const bool labels_in_range = std::all_of(data.labels.begin(), data.labels.end(),
                                           [&](std::size_t y) { return y < data.class_count(); });
  if (labels_in_range && data.distinct_classes() < 2) {
    throw TrainingError("training data contains a single class");
  }
  data.validate();
}

}  // namespace detail
}  // namespace speechlab::classifiers
