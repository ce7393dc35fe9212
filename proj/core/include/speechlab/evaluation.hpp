#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "speechlab/classifiers.hpp"

namespace speechlab::evaluation {

/// counts[true][predicted], row-major K x K.
struct ConfusionMatrix {
  std::size_t class_count = 0;
  std::vector<std::size_t> counts;

  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * class_count + predicted]; }
  std::size_t total() const;
  std::size_t trace() const;
  double accuracy() const;  // trace / total; 0 for an empty matrix
};

/// Throws ArgumentError on length mismatch or a label >= class_count.
/// `class_count` 0 means one more than the largest label seen.
ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::size_t class_count = 0);

/// Unweighted mean of per-class F1; a class with precision + recall = 0
/// contributes 0.
double macro_f1(const ConfusionMatrix& matrix);

/// Rank-statistic AUC for one positive class; ties count one half.
/// Throws UndefinedMetricError without both positives and negatives.
double binary_auc(std::span<const double> scores, std::span<const bool> positive);

/// Two classes: AUC of the class-1 score. More classes: macro average of
/// one-vs-rest AUCs over classes having both positives and negatives.
/// `scores` is row-major n x K. Throws UndefinedMetricError when no class
/// qualifies.
double roc_auc(std::span<const std::size_t> y_true, std::span<const double> scores, std::size_t class_count);

struct EvaluationReport {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  double macro_f1 = 0.0;
  double roc_auc = 0.0;
  std::vector<double> per_fold_accuracy;
  std::vector<std::string> class_names;
};

/// Predicts every row of `data` with `model`; class lists must match.
EvaluationReport evaluate(const classifiers::TrainedModel& model, const classifiers::Dataset& data);

/// Builds a report from labels and row-major n x K scores. ROC-AUC is NaN
/// when undefined for the given labels.
EvaluationReport make_report(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                             std::span<const double> scores, std::vector<std::string> class_names);

/// Index partition of a dataset.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Per-class shuffled partition. Every class's part sizes are within one
/// sample of the exact fractions and the part totals match the rounded
/// overall fractions whenever that is reachable. Throws ArgumentError when a
/// present class has fewer than 3 samples or fractions do not sum to 1.
Split stratified_split(const classifiers::Dataset& data, std::array<double, 3> fractions, std::uint64_t seed);

/// Stratified fold assignment: fold index per row. Per-class fold sizes
/// differ by at most one. Throws ArgumentError when k < 2 or a present
/// class has fewer than k samples.
std::vector<std::size_t> stratified_folds(const classifiers::Dataset& data, std::size_t k, std::uint64_t seed);

/// k-fold cross-validation. Fold f trains with seed derived from (seed, f).
/// The report pools held-out predictions: accuracy is the pooled
/// trace / total, per_fold_accuracy lists each fold.
EvaluationReport kfold_cv(const classifiers::Dataset& data, std::size_t k, const classifiers::TrainerSpec& trainer,
                          std::uint64_t seed);

/// JSON object with accuracy, confusion (row-major K x K), macro_f1,
/// roc_auc (null when undefined), per_fold_accuracy, class_names.
std::string report_to_json(const EvaluationReport& report);

}  // namespace speechlab::evaluation
