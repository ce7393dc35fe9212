#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "classifiers_internal.hpp"
#include "speechlab/classifiers.hpp"
#include "speechlab/error.hpp"

namespace speechlab::classifiers {

namespace {

TrainedModel shell(const Dataset& data, Family family, std::uint64_t seed) {
  TrainedModel model;
  model.family = family;
  model.class_names = data.class_names;
  model.feature_count = data.feature_count;
  model.training_seed = seed;
  return model;
}

}  // namespace

TrainedModel train_lda(const Dataset& raw) {
  detail::require_trainable(raw);
  const auto standardizer = Standardizer::fit(raw);
  const Dataset data = standardizer.apply(raw);
  const auto d = static_cast<Eigen::Index>(data.feature_count);
  const std::size_t k = data.class_count();
  const auto counts = data.class_counts();

  std::vector<Eigen::VectorXd> means(k, Eigen::VectorXd::Zero(d));
  for (std::size_t i = 0; i < data.size(); ++i) {
    means[data.labels[i]] += Eigen::Map<const Eigen::VectorXd>(data.row(i).data(), d);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) means[c] /= static_cast<double>(counts[c]);
  }

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd diff = Eigen::Map<const Eigen::VectorXd>(data.row(i).data(), d) - means[data.labels[i]];
    pooled.noalias() += diff * diff.transpose();
  }
  const std::size_t present = data.distinct_classes();
  const double dof = data.size() > present ? static_cast<double>(data.size() - present)
                                           : static_cast<double>(data.size());
  pooled /= dof;
  const double trace = pooled.trace();
  const double ridge = 1e-6 * (trace > 0.0 ? trace : 1.0) / static_cast<double>(d);
  pooled.diagonal().array() += ridge;

  const Eigen::LDLT<Eigen::MatrixXd> solver(pooled);
  if (solver.info() != Eigen::Success) throw TrainingError("pooled covariance is not invertible");

  LdaModel payload;
  payload.standardizer = standardizer;
  payload.coefficients.assign(k * data.feature_count, 0.0);
  payload.intercepts.assign(k, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    const Eigen::VectorXd coef = solver.solve(means[c]);
    std::copy(coef.data(), coef.data() + d, payload.coefficients.begin() + static_cast<std::ptrdiff_t>(c * data.feature_count));
    const double prior = static_cast<double>(counts[c]) / static_cast<double>(data.size());
    payload.intercepts[c] = -0.5 * means[c].dot(coef) + std::log(prior);
  }

  auto model = shell(raw, Family::LDA, 0);
  model.payload = std::move(payload);
  return model;
}

TrainedModel train_linear_svm(const Dataset& raw, const SvmOptions& options, std::uint64_t seed) {
  detail::require_trainable(raw);
  if (options.epochs < 1) throw ArgumentError("SVM needs at least one epoch");
  if (!(options.reg > 0.0)) throw ArgumentError("SVM regularization must be positive");
  const auto standardizer = Standardizer::fit(raw);
  const Dataset data = standardizer.apply(raw);
  const std::size_t n = data.size();
  const std::size_t d = data.feature_count;

  // One visiting order per epoch, shared by every one-vs-rest machine.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> orders(options.epochs, std::vector<std::size_t>(n));
  for (auto& order : orders) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
  }

  const double lambda = options.reg;
  const double radius = 1.0 / std::sqrt(lambda);
  // Pegasos on [x, 1]; the bias is regularized with the weights.
  auto fit_machine = [&](auto&& sign_of) {
    std::vector<double> w(d + 1, 0.0);
    std::size_t t = 0;
    for (const auto& order : orders) {
      for (std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const auto x = data.row(i);
        const double y = sign_of(data.labels[i]);
        double margin = w[d];
        for (std::size_t j = 0; j < d; ++j) margin += w[j] * x[j];
        margin *= y;
        const double shrink = 1.0 - eta * lambda;
        for (auto& v : w) v *= shrink;
        if (margin < 1.0) {
          for (std::size_t j = 0; j < d; ++j) w[j] += eta * y * x[j];
          w[d] += eta * y;
        }
        double norm_sq = 0.0;
        for (double v : w) norm_sq += v * v;
        const double norm = std::sqrt(norm_sq);
        if (norm > radius) {
          const double scale = radius / norm;
          for (auto& v : w) v *= scale;
        }
      }
    }
    return w;
  };

  SvmModel payload;
  payload.standardizer = standardizer;
  const std::size_t k = data.class_count();
  if (k == 2) {
    payload.machines.push_back(fit_machine([](std::size_t y) { return y == 1 ? 1.0 : -1.0; }));
  } else {
    for (std::size_t c = 0; c < k; ++c) {
      payload.machines.push_back(fit_machine([c](std::size_t y) { return y == c ? 1.0 : -1.0; }));
    }
  }

  auto model = shell(raw, Family::LinearSVM, seed);
  model.payload = std::move(payload);
  return model;
}

TrainedModel train_weighted_knn(const Dataset& raw, const KnnOptions& options) {
  detail::require_trainable(raw);
  if (options.k < 1) throw ArgumentError("k must be >= 1");
  if (options.k > raw.size()) {
    throw ArgumentError("k = " + std::to_string(options.k) + " exceeds the " + std::to_string(raw.size()) +
                        " training rows");
  }
  KnnModel payload;
  payload.standardizer = Standardizer::fit(raw);
  payload.k = options.k;
  payload.reference = payload.standardizer.apply(raw);

  auto model = shell(raw, Family::WeightedKNN, 0);
  model.payload = std::move(payload);
  return model;
}

}  // namespace speechlab::classifiers
