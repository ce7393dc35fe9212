#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "speechlab/features.hpp"

namespace speechlab::classifiers {

/// Row-major design matrix with class-index labels.
struct Dataset {
  std::size_t feature_count = 0;
  std::vector<double> rows;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t class_count() const noexcept { return class_names.size(); }
  std::span<const double> row(std::size_t i) const {
    return {rows.data() + i * feature_count, feature_count};
  }
  void add(std::span<const double> values, std::size_t label);

  // Rows at `indices`, in that order (repeats allowed). Class list is kept.
  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset select_columns(std::span<const std::size_t> columns) const;
  std::vector<std::size_t> class_counts() const;
  std::size_t distinct_classes() const;

  // Throws ArgumentError unless n >= 2, every label < class count, every
  // value finite, and at least two classes occur.
  void validate() const;
};

/// Builds a dataset from feature vectors restricted to `columns`. Classes are
/// the labels present, in canonical label order.
Dataset make_dataset(std::span<const features::FeatureVector> vectors,
                     std::span<const std::size_t> columns);

enum class Family { LDA, LinearSVM, WeightedKNN, BoostedTrees, BaggedTrees, RUSBoostedTrees };

std::string_view to_string(Family family) noexcept;  // lda, svm, knn, boosted, bagged, rusboost
std::optional<Family> parse_family(std::string_view name) noexcept;

struct Prediction {
  std::size_t label = 0;
  std::vector<double> scores;  // sums to 1
};

/// Column-wise z-score. Columns with (near) zero spread keep scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Dataset& data);
  std::vector<double> apply(std::span<const double> x) const;
  Dataset apply(const Dataset& data) const;
};

// ---------------------------------------------------------------------------
// CART

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

struct TreeOptions {
  std::size_t max_depth = kUnlimitedDepth;
  std::size_t min_leaf = 1;
  double feature_subsample = 1.0;  // fraction of features tried per node
};

struct Tree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // x[feature] <= threshold goes left
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::vector<double> distribution;  // normalized class weights (leaves only)
  };
  std::vector<Node> nodes;
  std::size_t class_count = 0;

  const std::vector<double>& leaf_distribution(std::span<const double> x) const;
  // Argmax of the leaf distribution, lowest index on ties.
  std::size_t predict_class(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

/// Weighted-Gini CART. Candidate thresholds are midpoints between sorted
/// distinct values; ties go to the lowest feature, then the lowest threshold.
/// An empty `weights` span means uniform weights.
Tree train_decision_tree(const Dataset& data, std::span<const double> weights,
                         const TreeOptions& options, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Family payloads

struct LdaModel {
  Standardizer standardizer;
  std::vector<double> coefficients;  // K x d
  std::vector<double> intercepts;    // K; -inf for classes absent in training
};

struct SvmModel {
  Standardizer standardizer;
  // One weight row per one-vs-rest machine, last entry of each row is the
  // bias. Two-class problems use a single machine separating class 1 from 0.
  std::vector<std::vector<double>> machines;
};

struct KnnModel {
  Standardizer standardizer;
  std::size_t k = 10;
  Dataset reference;  // standardized training rows
};

struct BaggedModel {
  std::vector<Tree> trees;
};

struct BoostedModel {
  std::vector<Tree> trees;
  std::vector<double> alphas;
};

using Payload = std::variant<LdaModel, SvmModel, KnnModel, BaggedModel, BoostedModel>;

struct TrainedModel {
  Family family = Family::LDA;
  std::vector<std::string> class_names;
  std::size_t feature_count = 0;
  std::vector<std::string> feature_names;  // optional column names
  std::uint64_t training_seed = 0;
  Payload payload;

  /// Throws ArgumentError for a wrong-length or non-finite input.
  Prediction predict(std::span<const double> x) const;
};

// ---------------------------------------------------------------------------
// Trainers

struct SvmOptions {
  std::size_t epochs = 50;
  double reg = 1e-4;
};

struct KnnOptions {
  std::size_t k = 10;
};

struct BaggingOptions {
  std::size_t n_trees = 30;
  bool bootstrap = true;  // false trains every tree on the full set
};

struct BoostingOptions {
  std::size_t n_rounds = 30;
  std::size_t max_depth = 3;
  std::size_t max_resets = 3;
};

/// Per-round record of a boosting run.
struct BoostRound {
  double weighted_error = 0.0;
  double alpha = 0.0;
  bool accepted = false;
  std::vector<std::size_t> fit_class_counts;  // class counts the tree was fit on
  std::vector<double> weights_after;          // normalized sample weights
};

using BoostTrace = std::vector<BoostRound>;

TrainedModel train_lda(const Dataset& data);
TrainedModel train_linear_svm(const Dataset& data, const SvmOptions& options, std::uint64_t seed);
TrainedModel train_weighted_knn(const Dataset& data, const KnnOptions& options);
TrainedModel train_bagged_trees(const Dataset& data, const BaggingOptions& options, std::uint64_t seed);
TrainedModel train_boosted_trees(const Dataset& data, const BoostingOptions& options, std::uint64_t seed,
                                 BoostTrace* trace = nullptr);
TrainedModel train_rusboost(const Dataset& data, const BoostingOptions& options, std::uint64_t seed,
                            BoostTrace* trace = nullptr);

/// Family plus hyperparameters, enough to retrain on any fold.
struct TrainerSpec {
  Family family = Family::BaggedTrees;
  SvmOptions svm;
  KnnOptions knn;
  BaggingOptions bagging;
  BoostingOptions boosting;
};

TrainedModel train(const Dataset& data, const TrainerSpec& spec, std::uint64_t seed);

/// Derives an independent engine for sub-task `index` of a seeded job.
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index);

// ---------------------------------------------------------------------------
// Persistence

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const TrainedModel& model);
/// Throws ParseError for malformed content, IncompatibleVersionError for a
/// version newer than kModelFormatVersion.
TrainedModel deserialize_model(std::string_view text);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace speechlab::classifiers
