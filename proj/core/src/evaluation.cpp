#include "speechlab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "speechlab/error.hpp"

namespace speechlab::evaluation {

using classifiers::Dataset;

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < class_count; ++i) t += at(i, i);
  return t;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
}

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::size_t class_count) {
  if (y_true.size() != y_pred.size()) {
    throw ArgumentError("confusion: " + std::to_string(y_true.size()) + " true labels vs " +
                        std::to_string(y_pred.size()) + " predictions");
  }
  if (class_count == 0) {
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      class_count = std::max({class_count, y_true[i] + 1, y_pred[i] + 1});
    }
  }
  ConfusionMatrix m;
  m.class_count = class_count;
  m.counts.assign(class_count * class_count, 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] >= class_count || y_pred[i] >= class_count) throw ArgumentError("confusion: label out of range");
    ++m.counts[y_true[i] * class_count + y_pred[i]];
  }
  return m;
}

double macro_f1(const ConfusionMatrix& m) {
  if (m.class_count == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t c = 0; c < m.class_count; ++c) {
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t o = 0; o < m.class_count; ++o) {
      predicted += m.at(o, c);
      actual += m.at(c, o);
    }
    const double tp = static_cast<double>(m.at(c, c));
    const double precision = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
    const double recall = actual == 0 ? 0.0 : tp / static_cast<double>(actual);
    if (precision + recall > 0.0) sum += 2.0 * precision * recall / (precision + recall);
  }
  return sum / static_cast<double>(m.class_count);
}

double binary_auc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw ArgumentError("AUC: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney U with midranks for tied scores.
  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        positive_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("AUC needs both positive and negative samples");
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double roc_auc(std::span<const std::size_t> y_true, std::span<const double> scores, std::size_t class_count) {
  if (class_count < 2) throw UndefinedMetricError("AUC needs at least two classes");
  if (scores.size() != y_true.size() * class_count) throw ArgumentError("AUC: score matrix has the wrong shape");
  const std::size_t n = y_true.size();
  std::vector<double> column(n);
  // std::vector<bool> cannot back a span.
  const auto positive = std::make_unique<bool[]>(n);
  auto class_auc = [&](std::size_t c) -> std::optional<double> {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = scores[i * class_count + c];
      positive[i] = y_true[i] == c;
      pos += positive[i] ? 1 : 0;
    }
    if (pos == 0 || pos == n) return std::nullopt;
    return binary_auc(column, std::span<const bool>(positive.get(), n));
  };

  if (class_count == 2) {
    if (const auto auc = class_auc(1)) return *auc;
    throw UndefinedMetricError("AUC needs both classes present");
  }
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < class_count; ++c) {
    if (const auto auc = class_auc(c)) {
      sum += *auc;
      ++used;
    }
  }
  if (used == 0) throw UndefinedMetricError("AUC undefined: no class has both positives and negatives");
  return sum / static_cast<double>(used);
}

EvaluationReport make_report(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                             std::span<const double> scores, std::vector<std::string> class_names) {
  EvaluationReport report;
  const std::size_t k = class_names.size();
  report.confusion = confusion(y_true, y_pred, k);
  report.accuracy = report.confusion.accuracy();
  report.macro_f1 = macro_f1(report.confusion);
  try {
    report.roc_auc = roc_auc(y_true, scores, k);
  } catch (const UndefinedMetricError&) {
    report.roc_auc = std::numeric_limits<double>::quiet_NaN();
  }
  report.class_names = std::move(class_names);
  return report;
}

EvaluationReport evaluate(const classifiers::TrainedModel& model, const Dataset& data) {
  if (model.class_names != data.class_names) throw ArgumentError("model and data class lists differ");
  std::vector<std::size_t> predicted(data.size());
  std::vector<double> scores;
  scores.reserve(data.size() * data.class_count());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = model.predict(data.row(i));
    predicted[i] = p.label;
    scores.insert(scores.end(), p.scores.begin(), p.scores.end());
  }
  return make_report(data.labels, predicted, scores, data.class_names);
}

namespace {

std::vector<std::vector<std::size_t>> shuffled_members(const Dataset& data, std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> members(data.class_count());
  for (std::size_t i = 0; i < data.size(); ++i) members.at(data.labels[i]).push_back(i);
  for (auto& m : members) std::shuffle(m.begin(), m.end(), rng);
  return members;
}

}  // namespace

Split stratified_split(const Dataset& data, std::array<double, 3> fractions, std::uint64_t seed) {
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9 || *std::min_element(fractions.begin(), fractions.end()) < 0.0) {
    throw ArgumentError("split fractions must be non-negative and sum to 1");
  }
  std::mt19937_64 rng(seed);
  const auto members = shuffled_members(data, rng);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (!members[c].empty() && members[c].size() < 3) {
      throw ArgumentError("class '" + data.class_names[c] + "' has fewer than 3 samples");
    }
  }

  // exact = n * fraction, snapped to integers within rounding noise.
  auto exact_parts = [&](std::size_t n) {
    std::array<double, 3> exact{};
    for (std::size_t p = 0; p < 3; ++p) {
      exact[p] = static_cast<double>(n) * fractions[p];
      if (std::abs(exact[p] - std::round(exact[p])) < 1e-9) exact[p] = std::round(exact[p]);
    }
    return exact;
  };
  auto largest_remainder = [](std::size_t n, const std::array<double, 3>& exact) {
    std::array<std::size_t, 3> parts{};
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      parts[p] = static_cast<std::size_t>(std::floor(exact[p]));
      assigned += parts[p];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return exact[a] - std::floor(exact[a]) > exact[b] - std::floor(exact[b]);
    });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++parts[order[i % 3]];
    return parts;
  };

  const auto targets = largest_remainder(data.size(), exact_parts(data.size()));
  std::vector<std::array<std::size_t, 3>> alloc(members.size());
  std::array<long long, 3> deficit{};
  for (std::size_t p = 0; p < 3; ++p) deficit[p] = static_cast<long long>(targets[p]);
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto exact = exact_parts(members[c].size());
    for (std::size_t p = 0; p < 3; ++p) {
      alloc[c][p] = static_cast<std::size_t>(std::floor(exact[p]));
      deficit[p] -= static_cast<long long>(alloc[c][p]);
    }
  }
  // Hand each class's leftover units to parts with a fractional share,
  // preferring parts still short of their overall target.
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto exact = exact_parts(members[c].size());
    std::size_t leftover = members[c].size() - alloc[c][0] - alloc[c][1] - alloc[c][2];
    std::vector<std::size_t> candidates;
    for (std::size_t p = 0; p < 3; ++p) {
      if (exact[p] > std::floor(exact[p])) candidates.push_back(p);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      if (deficit[a] != deficit[b]) return deficit[a] > deficit[b];
      return exact[a] - std::floor(exact[a]) > exact[b] - std::floor(exact[b]);
    });
    for (std::size_t i = 0; i < candidates.size() && leftover > 0; ++i, --leftover) {
      ++alloc[c][candidates[i]];
      --deficit[candidates[i]];
    }
  }

  Split split;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto it = members[c].begin();
    auto take = [&](std::vector<std::size_t>& into, std::size_t count) {
      into.insert(into.end(), it, it + static_cast<std::ptrdiff_t>(count));
      it += static_cast<std::ptrdiff_t>(count);
    };
    take(split.train, alloc[c][0]);
    take(split.validation, alloc[c][1]);
    take(split.test, alloc[c][2]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::size_t> stratified_folds(const Dataset& data, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("cross-validation needs k >= 2");
  std::mt19937_64 rng(seed);
  const auto members = shuffled_members(data, rng);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (!members[c].empty() && members[c].size() < k) {
      throw ArgumentError("class '" + data.class_names[c] + "' has fewer than " + std::to_string(k) + " samples");
    }
  }
  std::vector<std::size_t> fold(data.size());
  std::size_t offset = 0;
  for (const auto& m : members) {
    for (std::size_t j = 0; j < m.size(); ++j) fold[m[j]] = (offset + j) % k;
    offset = (offset + m.size()) % k;
  }
  return fold;
}

EvaluationReport kfold_cv(const Dataset& data, std::size_t k, const classifiers::TrainerSpec& trainer,
                          std::uint64_t seed) {
  data.validate();
  const auto fold = stratified_folds(data, k, seed);
  const std::size_t classes = data.class_count();
  std::vector<std::size_t> predicted(data.size());
  std::vector<double> scores(data.size() * classes);
  std::vector<double> per_fold;

  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < data.size(); ++i) (fold[i] == f ? test_idx : train_idx).push_back(i);
    const Dataset train_set = data.subset(train_idx);
    const std::uint64_t fold_seed = classifiers::derived_rng(seed, f)();
    const auto model = classifiers::train(train_set, trainer, fold_seed);
    std::size_t correct = 0;
    for (std::size_t i : test_idx) {
      const auto p = model.predict(data.row(i));
      predicted[i] = p.label;
      std::copy(p.scores.begin(), p.scores.end(), scores.begin() + static_cast<std::ptrdiff_t>(i * classes));
      correct += p.label == data.labels[i] ? 1 : 0;
    }
    per_fold.push_back(test_idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_idx.size()));
  }
  auto report = make_report(data.labels, predicted, scores, data.class_names);
  report.per_fold_accuracy = std::move(per_fold);
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::json doc;
  doc["accuracy"] = report.accuracy;
  std::vector<std::vector<std::size_t>> rows(report.confusion.class_count);
  for (std::size_t r = 0; r < report.confusion.class_count; ++r) {
    for (std::size_t c = 0; c < report.confusion.class_count; ++c) rows[r].push_back(report.confusion.at(r, c));
  }
  doc["confusion"] = rows;
  doc["macro_f1"] = report.macro_f1;
  doc["roc_auc"] = std::isfinite(report.roc_auc) ? nlohmann::json(report.roc_auc) : nlohmann::json(nullptr);
  doc["per_fold_accuracy"] = report.per_fold_accuracy;
  doc["class_names"] = report.class_names;
  return doc.dump(2) + "\n";
}

}  // namespace speechlab::evaluation
