#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "speechlab/error.hpp"
#include "speechlab/evaluation.hpp"

using namespace speechlab;
using namespace speechlab::evaluation;
using speechlab::classifiers::Dataset;

namespace {

Dataset labelled(const std::vector<std::size_t>& per_class) {
  Dataset d;
  d.feature_count = 1;
  for (std::size_t c = 0; c < per_class.size(); ++c) d.class_names.push_back("k" + std::to_string(c));
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    for (std::size_t i = 0; i < per_class[c]; ++i) d.add(std::vector<double>{double(d.size())}, c);
  }
  return d;
}

double binary(std::vector<double> scores, std::vector<int> pos) {
  auto flags = std::make_unique<bool[]>(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) flags[i] = pos[i] != 0;
  return binary_auc(scores, std::span<const bool>(flags.get(), pos.size()));
}

}  // namespace

TEST(Confusion, SmallCases) {
  const std::vector<std::size_t> t{0, 1, 1};
  const auto m = confusion(t, t);
  EXPECT_EQ(m.counts, (std::vector<std::size_t>{1, 0, 0, 2}));
  const std::vector<std::size_t> yt{0, 0, 1, 1}, yp{1, 1, 0, 0};
  const auto w = confusion(yt, yp);
  EXPECT_EQ(w.counts, (std::vector<std::size_t>{0, 2, 2, 0}));
  EXPECT_EQ(w.accuracy(), 0.0);
  EXPECT_THROW(confusion(t, std::vector<std::size_t>{0, 1}), ArgumentError);
}

TEST(Confusion, MatchesHashOracle) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> c(0, 4);
  std::vector<std::size_t> yt(1000), yp(1000);
  for (std::size_t i = 0; i < 1000; ++i) yt[i] = c(rng), yp[i] = c(rng);
  const auto m = confusion(yt, yp, 5);
  const auto want = oracle::hash_confusion(yt, yp, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(m.at(i, j), want[i][j]);
  }
  EXPECT_EQ(m.total(), 1000u);
  EXPECT_EQ(m.accuracy(), static_cast<double>(m.trace()) / 1000.0);
}

TEST(MacroF1, Fixtures) {
  ConfusionMatrix m{2, {5, 5, 5, 5}};
  EXPECT_DOUBLE_EQ(macro_f1(m), 0.5);
  ConfusionMatrix perfect{3, {4, 0, 0, 0, 2, 0, 0, 0, 9}};
  EXPECT_EQ(macro_f1(perfect), 1.0);
  // class 2 never predicted correctly
  ConfusionMatrix missing{3, {3, 0, 0, 0, 3, 0, 1, 0, 0}};
  const double f0 = 2.0 * 0.75 * 1.0 / 1.75;
  EXPECT_NEAR(macro_f1(missing), (f0 + 1.0 + 0.0) / 3.0, 1e-15);
}

TEST(Auc, Fixtures) {
  EXPECT_NEAR(binary({0.9, 0.8, 0.4, 0.7, 0.3, 0.1}, {1, 1, 1, 0, 0, 0}), 8.0 / 9.0, 1e-15);
  EXPECT_EQ(binary({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}), 1.0);
  EXPECT_EQ(binary({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}), 0.5);
  EXPECT_THROW(binary({0.5, 0.2}, {1, 1}), UndefinedMetricError);
}

TEST(Auc, MatchesPairwiseOracleAndMonotoneTransform) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  std::vector<double> s(300);
  std::vector<int> y(300);
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < 300; ++i) {
    s[i] = std::round(u(rng) * 40) / 40;  // plenty of ties
    y[i] = u(rng) < 0.3 + 0.4 * s[i];
    (y[i] ? pos : neg).push_back(s[i]);
  }
  const double a = binary(s, y);
  EXPECT_NEAR(a, oracle::pairwise_auc(pos, neg), 1e-12);
  std::vector<double> t(300);
  for (std::size_t i = 0; i < 300; ++i) t[i] = std::exp(3 * s[i]) - 7;
  EXPECT_NEAR(binary(t, y), a, 1e-12);
}

TEST(Auc, MulticlassMacroAndSkipping) {
  const std::vector<std::size_t> yt{0, 1, 2, 0, 1, 2};
  const std::vector<double> perfect{0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.8,
                                    0.7, 0.2, 0.1, 0.2, 0.7, 0.1, 0.1, 0.2, 0.7};
  EXPECT_EQ(roc_auc(yt, perfect, 3), 1.0);
  // class 2 absent: skipped, the others still average
  const std::vector<std::size_t> yt2{0, 1, 0, 1};
  const std::vector<double> sc{0.6, 0.3, 0.1, 0.4, 0.5, 0.1, 0.7, 0.2, 0.1, 0.2, 0.7, 0.1};
  EXPECT_EQ(roc_auc(yt2, sc, 3), 1.0);
  const std::vector<std::size_t> only{0, 0};
  EXPECT_THROW(roc_auc(only, std::vector<double>{0.5, 0.5, 0.5, 0.5}, 2), UndefinedMetricError);
}

TEST(Metrics, ClassPermutationInvariance) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> c(0, 2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<std::size_t> yt(60), yp(60);
  std::vector<double> scores(180);
  for (std::size_t i = 0; i < 60; ++i) {
    yt[i] = c(rng);
    double sum = 0;
    for (std::size_t k = 0; k < 3; ++k) sum += scores[i * 3 + k] = u(rng);
    for (std::size_t k = 0; k < 3; ++k) scores[i * 3 + k] /= sum;
    yp[i] = std::max_element(scores.begin() + i * 3, scores.begin() + i * 3 + 3) - (scores.begin() + i * 3);
  }
  const std::array<std::size_t, 3> perm{2, 0, 1};
  std::vector<std::size_t> pt(60), pp(60);
  std::vector<double> ps(180);
  for (std::size_t i = 0; i < 60; ++i) {
    pt[i] = perm[yt[i]];
    pp[i] = perm[yp[i]];
    for (std::size_t k = 0; k < 3; ++k) ps[i * 3 + perm[k]] = scores[i * 3 + k];
  }
  const auto a = make_report(yt, yp, scores, {"a", "b", "c"});
  const auto b = make_report(pt, pp, ps, {"c", "a", "b"});
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_NEAR(a.macro_f1, b.macro_f1, 1e-15);
  EXPECT_NEAR(a.roc_auc, b.roc_auc, 1e-15);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(a.confusion.at(i, j), b.confusion.at(perm[i], perm[j]));
  }
}

TEST(Split, SeventyFifteenFifteen) {
  const auto d = labelled({50, 50});
  const auto s = stratified_split(d, {0.70, 0.15, 0.15}, 3);
  EXPECT_EQ(s.train.size(), 70u);
  EXPECT_EQ(s.validation.size(), 15u);
  EXPECT_EQ(s.test.size(), 15u);
  std::size_t train_zero = 0;
  for (auto i : s.train) train_zero += d.labels[i] == 0;
  EXPECT_EQ(train_zero, 35u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 100u);
  const auto again = stratified_split(d, {0.70, 0.15, 0.15}, 3);
  EXPECT_EQ(again.train, s.train);
  EXPECT_EQ(again.test, s.test);
}

TEST(Split, PerClassCountsCloseToFractions) {
  const auto d = labelled({37, 11, 8});
  const auto s = stratified_split(d, {0.70, 0.15, 0.15}, 9);
  const std::array<const std::vector<std::size_t>*, 3> parts{&s.train, &s.validation, &s.test};
  const std::array<double, 3> frac{0.70, 0.15, 0.15};
  for (std::size_t c = 0; c < 3; ++c) {
    const double n = static_cast<double>(d.class_counts()[c]);
    for (std::size_t p = 0; p < 3; ++p) {
      const auto count = std::count_if(parts[p]->begin(), parts[p]->end(), [&](auto i) { return d.labels[i] == c; });
      EXPECT_LT(std::abs(static_cast<double>(count) - frac[p] * n), 1.0) << c << "," << p;
    }
  }
  EXPECT_THROW(stratified_split(labelled({10, 2}), {0.7, 0.15, 0.15}, 1), ArgumentError);
}

TEST(Folds, StratifiedDisjointExhaustive) {
  const auto d = labelled({23, 17, 10});
  const auto folds = stratified_folds(d, 5, 4);
  ASSERT_EQ(folds.size(), d.size());
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<std::size_t> sizes(5, 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.labels[i] == c) ++sizes[folds[i]];
    }
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
  }
  for (auto f : folds) EXPECT_LT(f, 5u);
  EXPECT_EQ(stratified_folds(d, 5, 4), folds);
  EXPECT_THROW(stratified_folds(labelled({10, 3}), 5, 1), ArgumentError);
}

TEST(KFold, SeparableBaggedTrees) {
  const auto d = fixture::separated_pair(200, 14, 7);
  classifiers::TrainerSpec spec;
  const auto r = kfold_cv(d, 5, spec, 7);
  EXPECT_GE(r.accuracy, 0.99);
  EXPECT_EQ(r.confusion.total(), d.size());
  EXPECT_EQ(r.accuracy, static_cast<double>(r.confusion.trace()) / static_cast<double>(r.confusion.total()));
  EXPECT_EQ(r.per_fold_accuracy.size(), 5u);
  const auto again = kfold_cv(d, 5, spec, 7);
  EXPECT_EQ(again.confusion.counts, r.confusion.counts);
}

TEST(Report, JsonSchema) {
  const std::vector<std::size_t> yt{0, 1, 1, 0}, yp{0, 1, 0, 0};
  const std::vector<double> sc{0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.7, 0.3};
  auto r = make_report(yt, yp, sc, {"Human", "AI"});
  r.per_fold_accuracy = {0.5, 1.0};
  const auto j = nlohmann::json::parse(report_to_json(r));
  for (const char* key : {"accuracy", "confusion", "macro_f1", "roc_auc", "per_fold_accuracy", "class_names"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["class_names"], nlohmann::json({"Human", "AI"}));
  EXPECT_EQ(j["confusion"], nlohmann::json({{2, 0}, {1, 1}}));
  EXPECT_DOUBLE_EQ(j["accuracy"].get<double>(), 0.75);
  EXPECT_EQ(j["per_fold_accuracy"].size(), 2u);
}
