#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "classifiers_internal.hpp"
#include "speechlab/classifiers.hpp"
#include "speechlab/error.hpp"

namespace speechlab::classifiers {

using nlohmann::json;

namespace {

constexpr double kKnnEpsilon = 1e-12;

std::vector<double> lda_logits(const LdaModel& m, std::span<const double> x, std::size_t k) {
  const auto z = m.standardizer.apply(x);
  std::vector<double> logits(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (!std::isfinite(m.intercepts[c])) {
      logits[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double acc = m.intercepts[c];
    for (std::size_t j = 0; j < z.size(); ++j) acc += m.coefficients[c * z.size() + j] * z[j];
    logits[c] = acc;
  }
  return logits;
}

std::vector<double> svm_logits(const SvmModel& m, std::span<const double> x, std::size_t k) {
  const auto z = m.standardizer.apply(x);
  auto margin = [&](const std::vector<double>& w) {
    double acc = w.back();
    for (std::size_t j = 0; j < z.size(); ++j) acc += w[j] * z[j];
    return acc;
  };
  if (k == 2 && m.machines.size() == 1) {
    const double s = margin(m.machines.front());
    return {-s, s};
  }
  std::vector<double> logits;
  logits.reserve(k);
  for (const auto& w : m.machines) logits.push_back(margin(w));
  return logits;
}

std::vector<double> knn_scores(const KnnModel& m, std::span<const double> x, std::size_t k) {
  const auto z = m.standardizer.apply(x);
  const Dataset& ref = m.reference;
  std::vector<std::pair<double, std::size_t>> dist(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto r = ref.row(i);
    double d2 = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) d2 += (r[j] - z[j]) * (r[j] - z[j]);
    dist[i] = {d2, i};
  }
  const auto kth = dist.begin() + static_cast<std::ptrdiff_t>(m.k);
  std::partial_sort(dist.begin(), kth, dist.end());
  std::vector<double> scores(k, 0.0);
  double total = 0.0;
  for (auto it = dist.begin(); it != kth; ++it) {
    const double w = 1.0 / (it->first + kKnnEpsilon);
    scores[ref.labels[it->second]] += w;
    total += w;
  }
  for (auto& s : scores) s /= total;
  return scores;
}

}  // namespace

Prediction TrainedModel::predict(std::span<const double> x) const {
  if (x.size() != feature_count) {
    throw ArgumentError("model expects " + std::to_string(feature_count) + " features, got " +
                        std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw ArgumentError("prediction input contains a non-finite value");
  }
  const std::size_t k = class_names.size();
  Prediction p;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LdaModel>) {
          p.scores = detail::softmax(lda_logits(m, x, k));
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          p.scores = detail::softmax(svm_logits(m, x, k));
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          p.scores = knn_scores(m, x, k);
        } else if constexpr (std::is_same_v<T, BaggedModel>) {
          p.scores.assign(k, 0.0);
          for (const auto& tree : m.trees) {
            const auto& dist = tree.leaf_distribution(x);
            for (std::size_t c = 0; c < k; ++c) p.scores[c] += dist[c];
          }
          for (auto& s : p.scores) s /= static_cast<double>(m.trees.size());
        } else {
          std::vector<double> votes(k, 0.0);
          for (std::size_t t = 0; t < m.trees.size(); ++t) votes[m.trees[t].predict_class(x)] += m.alphas[t];
          p.scores = detail::softmax(votes);
        }
      },
      payload);
  p.label = detail::argmax(p.scores);
  return p;
}

// ---------------------------------------------------------------------------
// JSON model format

namespace {

json to_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

Standardizer standardizer_from(const json& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
}

json to_json(const Tree& tree) {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
  json leaves = json::array();
  for (const auto& node : tree.nodes) {
    feature.push_back(node.feature);
    threshold.push_back(node.threshold);
    left.push_back(node.left);
    right.push_back(node.right);
    leaves.push_back(node.distribution);
  }
  return {{"class_count", tree.class_count}, {"feature", feature}, {"threshold", threshold},
          {"left", left},                    {"right", right},     {"distribution", leaves}};
}

Tree tree_from(const json& j) {
  Tree tree;
  tree.class_count = j.at("class_count").get<std::size_t>();
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<std::uint32_t>>();
  const auto right = j.at("right").get<std::vector<std::uint32_t>>();
  const auto& leaves = j.at("distribution");
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || leaves.size() != n || n == 0) {
    throw ParseError("tree arrays have inconsistent lengths");
  }
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = tree.nodes[i];
    node.feature = feature[i];
    node.threshold = threshold[i];
    node.left = left[i];
    node.right = right[i];
    node.distribution = leaves[i].get<std::vector<double>>();
    if (node.feature >= 0) {
      // Children are always stored after their parent.
      if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
        throw ParseError("tree node " + std::to_string(i) + " has invalid children");
      }
    } else if (node.distribution.size() != tree.class_count) {
      throw ParseError("tree leaf " + std::to_string(i) + " has a wrong-sized distribution");
    }
  }
  return tree;
}

json payload_to_json(const Payload& payload) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LdaModel>) {
          // JSON has no infinity; absent classes are written as null.
          json intercepts = json::array();
          for (double v : m.intercepts) intercepts.push_back(std::isfinite(v) ? json(v) : json(nullptr));
          return {{"standardizer", to_json(m.standardizer)},
                  {"coefficients", m.coefficients},
                  {"intercepts", intercepts}};
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          return {{"standardizer", to_json(m.standardizer)}, {"machines", m.machines}};
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          return {{"standardizer", to_json(m.standardizer)},
                  {"k", m.k},
                  {"rows", m.reference.rows},
                  {"labels", m.reference.labels}};
        } else if constexpr (std::is_same_v<T, BaggedModel>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(to_json(t));
          return {{"trees", trees}};
        } else {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(to_json(t));
          return {{"trees", trees}, {"alphas", m.alphas}};
        }
      },
      payload);
}

Payload payload_from(Family family, const json& j, const TrainedModel& shell) {
  const std::size_t d = shell.feature_count;
  const std::size_t k = shell.class_names.size();
  auto check_standardizer = [&](const Standardizer& s) {
    if (s.mean.size() != d || s.scale.size() != d) throw ParseError("standardizer size mismatch");
  };
  switch (family) {
    case Family::LDA: {
      LdaModel m;
      m.standardizer = standardizer_from(j.at("standardizer"));
      check_standardizer(m.standardizer);
      m.coefficients = j.at("coefficients").get<std::vector<double>>();
      for (const auto& v : j.at("intercepts")) {
        m.intercepts.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
      }
      if (m.coefficients.size() != k * d || m.intercepts.size() != k) throw ParseError("LDA payload size mismatch");
      return m;
    }
    case Family::LinearSVM: {
      SvmModel m;
      m.standardizer = standardizer_from(j.at("standardizer"));
      check_standardizer(m.standardizer);
      m.machines = j.at("machines").get<std::vector<std::vector<double>>>();
      const std::size_t expected = k == 2 ? 1 : k;
      if (m.machines.size() != expected) throw ParseError("SVM machine count mismatch");
      for (const auto& w : m.machines) {
        if (w.size() != d + 1) throw ParseError("SVM weight length mismatch");
      }
      return m;
    }
    case Family::WeightedKNN: {
      KnnModel m;
      m.standardizer = standardizer_from(j.at("standardizer"));
      check_standardizer(m.standardizer);
      m.k = j.at("k").get<std::size_t>();
      m.reference.feature_count = d;
      m.reference.class_names = shell.class_names;
      m.reference.rows = j.at("rows").get<std::vector<double>>();
      m.reference.labels = j.at("labels").get<std::vector<std::size_t>>();
      if (m.reference.rows.size() != m.reference.labels.size() * d || m.k < 1 || m.k > m.reference.size()) {
        throw ParseError("kNN payload size mismatch");
      }
      for (std::size_t y : m.reference.labels) {
        if (y >= k) throw ParseError("kNN label out of range");
      }
      return m;
    }
    case Family::BaggedTrees: {
      BaggedModel m;
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from(t));
      if (m.trees.empty()) throw ParseError("bagged model has no trees");
      return m;
    }
    case Family::BoostedTrees:
    case Family::RUSBoostedTrees: {
      BoostedModel m;
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from(t));
      m.alphas = j.at("alphas").get<std::vector<double>>();
      if (m.trees.empty() || m.alphas.size() != m.trees.size()) throw ParseError("boosted payload size mismatch");
      return m;
    }
  }
  throw ParseError("unknown family");
}

void check_tree_shapes(const TrainedModel& model) {
  auto check = [&](const std::vector<Tree>& trees) {
    for (const auto& tree : trees) {
      if (tree.class_count != model.class_names.size()) throw ParseError("tree class count mismatch");
      for (const auto& node : tree.nodes) {
        if (node.feature >= static_cast<int>(model.feature_count)) throw ParseError("tree feature out of range");
      }
    }
  };
  if (const auto* m = std::get_if<BaggedModel>(&model.payload)) check(m->trees);
  if (const auto* m = std::get_if<BoostedModel>(&model.payload)) check(m->trees);
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  const json doc = {{"format", "speechlab-model"},
                    {"version", kModelFormatVersion},
                    {"family", std::string(to_string(model.family))},
                    {"class_names", model.class_names},
                    {"feature_count", model.feature_count},
                    {"feature_names", model.feature_names},
                    {"training_seed", model.training_seed},
                    {"payload", payload_to_json(model.payload)}};
  return doc.dump(1) + "\n";
}

TrainedModel deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != "speechlab-model") {
      throw ParseError("not a speechlab model file");
    }
    const auto& version_field = doc.at("version");
    const int version = version_field.is_string() ? std::stoi(version_field.get<std::string>())
                                                  : version_field.get<int>();
    if (version > kModelFormatVersion) {
      throw IncompatibleVersionError("model format version " + std::to_string(version) +
                                     " is newer than supported version " + std::to_string(kModelFormatVersion));
    }
    if (version < 1) throw ParseError("invalid model format version " + std::to_string(version));
    const auto family = parse_family(doc.at("family").get<std::string>());
    if (!family) throw ParseError("unknown model family '" + doc.at("family").get<std::string>() + "'");

    TrainedModel model;
    model.family = *family;
    model.class_names = doc.at("class_names").get<std::vector<std::string>>();
    model.feature_count = doc.at("feature_count").get<std::size_t>();
    model.feature_names = doc.value("feature_names", std::vector<std::string>{});
    model.training_seed = doc.at("training_seed").get<std::uint64_t>();
    if (model.class_names.size() < 2) throw ParseError("model needs at least two classes");
    if (model.feature_count == 0) throw ParseError("model has no features");
    if (!model.feature_names.empty() && model.feature_names.size() != model.feature_count) {
      throw ParseError("feature name count mismatch");
    }
    model.payload = payload_from(model.family, doc.at("payload"), model);
    check_tree_shapes(model);
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw Error("short write to " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace speechlab::classifiers
