#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "classifiers_internal.hpp"
#include "speechlab/classifiers.hpp"
#include "speechlab/error.hpp"

namespace speechlab::classifiers {

namespace {

// Stand-in error for a perfect round so alpha stays finite.
constexpr double kMinBoostError = 1e-10;

TrainedModel shell(const Dataset& data, Family family, std::uint64_t seed) {
  TrainedModel model;
  model.family = family;
  model.class_names = data.class_names;
  model.feature_count = data.feature_count;
  model.training_seed = seed;
  return model;
}

enum class Sampling { Full, RandomUndersample };

// SAMME over CART base learners. With RandomUndersample every round fits on
// a class-balanced random subset; errors and weight updates always use the
// full weighted set.
TrainedModel boost(const Dataset& data, const BoostingOptions& options, std::uint64_t seed,
                   Sampling sampling, Family family, BoostTrace* trace) {
  detail::require_trainable(data);
  if (options.n_rounds < 1) throw ArgumentError("boosting needs at least one round");
  if (options.max_depth < 1) throw ArgumentError("boosted tree depth must be >= 1");

  const std::size_t n = data.size();
  const std::size_t k = data.class_count();
  const double chance_error = 1.0 - 1.0 / static_cast<double>(k);
  const TreeOptions tree_options{options.max_depth, 1, 1.0};

  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < n; ++i) by_class[data.labels[i]].push_back(i);
  std::size_t minority = n;
  for (const auto& members : by_class) {
    if (!members.empty()) minority = std::min(minority, members.size());
  }

  std::mt19937_64 rng(seed);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  BoostedModel payload;
  std::size_t consecutive_resets = 0;
  std::size_t accepted = 0;
  if (trace) trace->clear();

  while (accepted < options.n_rounds) {
    BoostRound round;
    Tree tree;
    if (sampling == Sampling::RandomUndersample) {
      std::vector<std::size_t> chosen;
      for (auto members : by_class) {
        for (std::size_t i = 0; i < minority && i < members.size(); ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
          std::swap(members[i], members[pick(rng)]);
        }
        if (members.size() > minority) members.resize(minority);
        chosen.insert(chosen.end(), members.begin(), members.end());
      }
      std::sort(chosen.begin(), chosen.end());
      const Dataset fit_set = data.subset(chosen);
      std::vector<double> fit_weights;
      fit_weights.reserve(chosen.size());
      for (std::size_t i : chosen) fit_weights.push_back(weights[i]);
      round.fit_class_counts = fit_set.class_counts();
      tree = train_decision_tree(fit_set, fit_weights, tree_options, rng);
    } else {
      round.fit_class_counts = data.class_counts();
      tree = train_decision_tree(data, weights, tree_options, rng);
    }

    std::vector<bool> missed(n);
    double error = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      missed[i] = tree.predict_class(data.row(i)) != data.labels[i];
      if (missed[i]) error += weights[i];
      total += weights[i];
    }
    error /= total;
    round.weighted_error = error;

    if (error >= chance_error) {
      if (consecutive_resets == options.max_resets) {
        throw TrainingError("base learner no better than chance after " + std::to_string(options.max_resets) +
                            " weight resets");
      }
      ++consecutive_resets;
      std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(n));
      round.weights_after = weights;
      if (trace) trace->push_back(std::move(round));
      continue;
    }
    consecutive_resets = 0;

    const double clipped = std::max(error, kMinBoostError);
    const double alpha = std::log((1.0 - clipped) / clipped) + std::log(static_cast<double>(k) - 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (missed[i]) weights[i] *= std::exp(alpha);
      sum += weights[i];
    }
    for (auto& w : weights) w /= sum;

    round.alpha = alpha;
    round.accepted = true;
    round.weights_after = weights;
    if (trace) trace->push_back(std::move(round));
    payload.trees.push_back(std::move(tree));
    payload.alphas.push_back(alpha);
    ++accepted;
    // A perfect learner leaves nothing to reweight.
    if (error <= 0.0) break;
  }

  auto model = shell(data, family, seed);
  model.payload = std::move(payload);
  return model;
}

}  // namespace

TrainedModel train_boosted_trees(const Dataset& data, const BoostingOptions& options, std::uint64_t seed,
                                 BoostTrace* trace) {
  return boost(data, options, seed, Sampling::Full, Family::BoostedTrees, trace);
}

TrainedModel train_rusboost(const Dataset& data, const BoostingOptions& options, std::uint64_t seed,
                            BoostTrace* trace) {
  return boost(data, options, seed, Sampling::RandomUndersample, Family::RUSBoostedTrees, trace);
}

TrainedModel train_bagged_trees(const Dataset& data, const BaggingOptions& options, std::uint64_t seed) {
  detail::require_trainable(data);
  if (options.n_trees < 1) throw ArgumentError("bagging needs at least one tree");
  const std::size_t n = data.size();
  const TreeOptions tree_options{kUnlimitedDepth, 1, 1.0};

  BaggedModel payload;
  payload.trees.reserve(options.n_trees);
  for (std::size_t t = 0; t < options.n_trees; ++t) {
    auto rng = derived_rng(seed, t);
    if (!options.bootstrap) {
      payload.trees.push_back(train_decision_tree(data, {}, tree_options, rng));
      continue;
    }
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    std::vector<std::size_t> sample(n);
    for (auto& i : sample) i = draw(rng);
    payload.trees.push_back(train_decision_tree(data.subset(sample), {}, tree_options, rng));
  }

  auto model = shell(data, Family::BaggedTrees, seed);
  model.payload = std::move(payload);
  return model;
}

namespace {

TrainedModel dispatch(const Dataset& data, const TrainerSpec& spec, std::uint64_t seed) {
  switch (spec.family) {
    case Family::LDA: return train_lda(data);
    case Family::LinearSVM: return train_linear_svm(data, spec.svm, seed);
    case Family::WeightedKNN: return train_weighted_knn(data, spec.knn);
    case Family::BoostedTrees: return train_boosted_trees(data, spec.boosting, seed);
    case Family::BaggedTrees: return train_bagged_trees(data, spec.bagging, seed);
    case Family::RUSBoostedTrees: return train_rusboost(data, spec.boosting, seed);
  }
  throw ArgumentError("unknown classifier family");
}

}  // namespace

TrainedModel train(const Dataset& data, const TrainerSpec& spec, std::uint64_t seed) {
  auto model = dispatch(data, spec, seed);
  // LDA and kNN ignore the seed but the file still records what was asked for
  model.training_seed = seed;
  return model;
}

}  // namespace speechlab::classifiers
