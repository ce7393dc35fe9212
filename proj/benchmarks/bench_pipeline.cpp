#include <benchmark/benchmark.h>

#include <random>

#include "speechlab/bicoherence.hpp"
#include "speechlab/cepstral.hpp"
#include "speechlab/classifiers.hpp"
#include "speechlab/dsp.hpp"
#include "speechlab/features.hpp"
#include "speechlab/melspec_image.hpp"
#include "speechlab/synth.hpp"

using namespace speechlab;

namespace {

audio::AudioClip voice_clip() {
  std::mt19937_64 rng(1);
  return synth::generate_clip(ClassLabel::Human, rng);
}

void BM_FftForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const dsp::FftPlan plan(n);
  std::vector<dsp::Complex> data(n, dsp::Complex(0.5, -0.25));
  for (auto _ : state) {
    plan.forward(data);
    benchmark::DoNotOptimize(data.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FftForward)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oNLogN);

void BM_Bicoherence(benchmark::State& state) {
  const auto clip = voice_clip();
  const auto seg = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bicoherence::estimate_bicoherence(clip, seg));
}
BENCHMARK(BM_Bicoherence)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Mfcc(benchmark::State& state) {
  const auto clip = voice_clip();
  for (auto _ : state) benchmark::DoNotOptimize(cepstral::mfcc(clip));
}
BENCHMARK(BM_Mfcc)->Unit(benchmark::kMillisecond);

void BM_ExtractFeatures(benchmark::State& state) {
  const auto clip = voice_clip();
  for (auto _ : state) benchmark::DoNotOptimize(features::extract(clip, LabelingMode::Multiclass, ClassLabel::Human));
}
BENCHMARK(BM_ExtractFeatures)->Unit(benchmark::kMillisecond);

void BM_MelImage(benchmark::State& state) {
  const auto clip = voice_clip();
  for (auto _ : state) benchmark::DoNotOptimize(melspec::melspectrogram_image(clip));
}
BENCHMARK(BM_MelImage)->Unit(benchmark::kMillisecond);

classifiers::Dataset random_dataset(std::size_t n) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  classifiers::Dataset d;
  d.feature_count = features::kFeatureCount;
  d.class_names = {"a", "b", "c", "d", "e"};
  std::vector<double> row(d.feature_count);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = i % 5;
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = g(rng) + (j == y ? 1.5 : 0.0);
    d.add(row, y);
  }
  return d;
}

void BM_TreeTraining(benchmark::State& state) {
  const auto d = random_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    std::mt19937_64 rng(1);
    benchmark::DoNotOptimize(classifiers::train_decision_tree(d, {}, {}, rng));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TreeTraining)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

void BM_BaggedTraining(benchmark::State& state) {
  const auto d = random_dataset(1000);
  for (auto _ : state) benchmark::DoNotOptimize(classifiers::train_bagged_trees(d, {}, 7));
}
BENCHMARK(BM_BaggedTraining)->Unit(benchmark::kMillisecond);

void BM_KnnPredict(benchmark::State& state) {
  const auto d = random_dataset(5000);
  const auto m = classifiers::train_weighted_knn(d, {});
  const std::vector<double> q(features::kFeatureCount, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(q));
}
BENCHMARK(BM_KnnPredict)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
