#include <algorithm>
#include <cmath>
#include <numeric>

#include "classifiers_internal.hpp"
#include "speechlab/classifiers.hpp"
#include "speechlab/error.hpp"

namespace speechlab::classifiers {

namespace {

// Impurity comparisons closer than this are ties.
constexpr double kTieTolerance = 1e-12;

double gini(std::span<const double> class_weight, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double w : class_weight) sum_sq += (w / total) * (w / total);
  return 1.0 - sum_sq;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::span<const double> weights, const TreeOptions& options,
              std::mt19937_64& rng)
      : data_(data), weights_(weights), options_(options), rng_(rng), k_(data.class_count()) {}

  Tree build() {
    std::vector<std::size_t> all(data_.size());
    std::iota(all.begin(), all.end(), 0);
    tree_.class_count = k_;
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  double weight(std::size_t i) const { return weights_.empty() ? 1.0 : weights_[i]; }

  std::vector<std::size_t> candidate_features() {
    const std::size_t d = data_.feature_count;
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (options_.feature_subsample >= 1.0) return features;
    const auto keep = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(options_.feature_subsample * static_cast<double>(d))), 1, d);
    for (std::size_t i = 0; i < keep; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, d - 1);
      std::swap(features[i], features[pick(rng_)]);
    }
    features.resize(keep);
    std::sort(features.begin(), features.end());
    return features;
  }

  std::uint32_t make_leaf(std::vector<double> class_weight, double total) {
    Tree::Node leaf;
    if (total > 0.0) {
      for (auto& w : class_weight) w /= total;
    } else {
      std::fill(class_weight.begin(), class_weight.end(), 1.0 / static_cast<double>(k_));
    }
    leaf.distribution = std::move(class_weight);
    tree_.nodes.push_back(std::move(leaf));
    return static_cast<std::uint32_t>(tree_.nodes.size() - 1);
  }

  std::uint32_t grow(std::vector<std::size_t>& indices, std::size_t depth) {
    std::vector<double> class_weight(k_, 0.0);
    double total = 0.0;
    for (std::size_t i : indices) {
      class_weight[data_.labels[i]] += weight(i);
      total += weight(i);
    }
    const auto present = std::count_if(class_weight.begin(), class_weight.end(), [](double w) { return w > 0.0; });
    if (present <= 1 || depth >= options_.max_depth || indices.size() < 2 * options_.min_leaf) {
      return make_leaf(std::move(class_weight), total);
    }

    bool found = false;
    double best_impurity = 0.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    std::vector<std::size_t> order = indices;
    std::vector<double> left(k_);
    std::vector<double> right(k_);
    for (std::size_t f : candidate_features()) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data_.row(a)[f] < data_.row(b)[f];
      });
      std::fill(left.begin(), left.end(), 0.0);
      right = class_weight;
      double left_total = 0.0;
      for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
        const std::size_t i = order[pos];
        left[data_.labels[i]] += weight(i);
        right[data_.labels[i]] -= weight(i);
        left_total += weight(i);
        const double v = data_.row(i)[f];
        const double next = data_.row(order[pos + 1])[f];
        if (!(v < next)) continue;
        const std::size_t n_left = pos + 1;
        if (n_left < options_.min_leaf || order.size() - n_left < options_.min_leaf) continue;
        const double right_total = total - left_total;
        const double impurity =
            total > 0.0 ? (left_total * gini(left, left_total) + right_total * gini(right, right_total)) / total
                        : 0.0;
        if (!found || impurity < best_impurity - kTieTolerance) {
          found = true;
          best_impurity = impurity;
          best_feature = f;
          best_threshold = v + (next - v) / 2.0;
          // Adjacent doubles: keep `next` on the right-hand side.
          if (!(best_threshold < next)) best_threshold = v;
        }
      }
    }
    if (!found) return make_leaf(std::move(class_weight), total);

    std::vector<std::size_t> go_left;
    std::vector<std::size_t> go_right;
    for (std::size_t i : indices) {
      (data_.row(i)[best_feature] <= best_threshold ? go_left : go_right).push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    const auto node = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[node].feature = static_cast<int>(best_feature);
    tree_.nodes[node].threshold = best_threshold;
    const auto l = grow(go_left, depth + 1);
    const auto r = grow(go_right, depth + 1);
    tree_.nodes[node].left = l;
    tree_.nodes[node].right = r;
    return node;
  }

  const Dataset& data_;
  std::span<const double> weights_;
  const TreeOptions& options_;
  std::mt19937_64& rng_;
  std::size_t k_;
  Tree tree_;
};

}  // namespace

Tree train_decision_tree(const Dataset& data, std::span<const double> weights, const TreeOptions& options,
                         std::mt19937_64& rng) {
  if (options.max_depth < 1) throw ArgumentError("max_depth must be >= 1");
  if (options.min_leaf < 1) throw ArgumentError("min_leaf must be >= 1");
  if (!(options.feature_subsample > 0.0 && options.feature_subsample <= 1.0)) {
    throw ArgumentError("feature_subsample must be in (0, 1]");
  }
  if (!weights.empty() && weights.size() != data.size()) throw ArgumentError("one weight per row required");
  if (data.size() == 0 || data.class_count() == 0) throw ArgumentError("cannot fit a tree to no data");
  return TreeBuilder(data, weights, options, rng).build();
}

const std::vector<double>& Tree::leaf_distribution(std::span<const double> x) const {
  std::uint32_t at = 0;
  while (nodes[at].feature >= 0) {
    const auto& node = nodes[at];
    at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[at].distribution;
}

std::size_t Tree::predict_class(std::span<const double> x) const {
  return detail::argmax(leaf_distribution(x));
}

std::size_t Tree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [at, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes[at].feature >= 0) {
      stack.emplace_back(nodes[at].left, d + 1);
      stack.emplace_back(nodes[at].right, d + 1);
    }
  }
  return deepest;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.feature < 0; }));
}

}  // namespace speechlab::classifiers
