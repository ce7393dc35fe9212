// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "speechlab/bicoherence.hpp"
#include "speechlab/cepstral.hpp"
#include "speechlab/dsp.hpp"
#include "speechlab/evaluation.hpp"
#include "speechlab/features.hpp"
#include "speechlab/melspec_image.hpp"
#include "speechlab/parallel.hpp"
#include "speechlab/synth.hpp"

using namespace speechlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  // records the first failure, keeps going
  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome bicoherence_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t seg = std::size_t{16} << (s % 3);  // 16, 32, 64
    const std::size_t segments = 8 + s % 9;              // 8..16
    const auto clip = fixture::noise(seg + (segments - 1) * seg / 2, 1000 + s, 0.3);
    const auto map = bicoherence::estimate_bicoherence(clip, seg, 0.5);
    o.require(map.segment_count == segments, "unexpected segment count");
    for (const auto& c : oracle::brute_bicoherence(clip.samples, seg, 0.5)) {
      const double rel_m = std::abs(map.magnitude_at(c.f1, c.f2) - c.magnitude) / c.magnitude;
      const double rel_p = std::abs(map.phase_at(c.f1, c.f2) - c.phase) / std::max(1.0, std::abs(c.phase));
      worst = std::max({worst, rel_m, rel_p});
    }
  }
  const double secs = seconds_since(t0);
  o.require(worst <= 1e-9, "relative error " + fmt("%.3g", worst));
  o.require(secs < 10.0, "took " + fmt("%.1f s", secs));
  if (o.pass) o.detail = "max rel err " + fmt("%.2g", worst) + ", " + fmt("%.2f s", secs);
  return o;
}

audio::AudioClip random_clip(std::mt19937_64& rng, std::size_t i) {
  switch (i % 3) {
    case 0:
      return fixture::noise(audio::kCanonicalLength, rng(), 0.01 + 0.5 * std::uniform_real_distribution<double>()(rng));
    case 1: {
      auto c = fixture::tone(std::uniform_real_distribution<double>(60, 7000)(rng), audio::kCanonicalLength);
      const auto n = fixture::noise(audio::kCanonicalLength, rng(), 0.05);
      for (std::size_t k = 0; k < c.samples.size(); ++k) c.samples[k] += n.samples[k];
      return c;
    }
    default:
      return synth::generate_clip(synth::kSourceClasses[rng() % 5], rng);
  }
}

Outcome bicoherence_bounds() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double top = 0, drift = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    const auto clip = random_clip(rng, i);
    const auto base = bicoherence::estimate_bicoherence(clip);
    for (double m : base.magnitude) {
      top = std::max(top, m);
      o.require(m >= 0.0, "negative magnitude");
    }
    for (double c : {0.1, 10.0}) {
      auto scaled = clip;
      for (auto& s : scaled.samples) s *= c;
      const auto m = bicoherence::estimate_bicoherence(scaled);
      for (std::size_t k = 0; k < m.magnitude.size(); ++k) drift = std::max(drift, std::abs(m.magnitude[k] - base.magnitude[k]));
    }
  }
  const double secs = seconds_since(t0);
  o.require(top <= 1.0 + 1e-9, "magnitude " + fmt("%.12g", top));
  o.require(drift < 1e-9, "scale drift " + fmt("%.3g", drift));
  o.require(secs < 60.0, "took " + fmt("%.1f s", secs));
  if (o.pass) o.detail = "max |b| " + fmt("%.6f", top) + ", scale drift " + fmt("%.2g", drift) + ", " + fmt("%.1f s", secs);
  return o;
}

Outcome phase_coupling() {
  Outcome o;
  const auto locked = bicoherence::estimate_bicoherence(fixture::coupled_tones(true, 1));
  const std::size_t f1 = 11, f2 = 8;  // 700 Hz, 500 Hz at 62.5 Hz bins
  const double coupled = locked.magnitude_at(f1, f2);
  const auto cells = locked.triangle_magnitudes();
  const auto above = std::count_if(cells.begin(), cells.end(), [&](double m) { return m > coupled; });
  const double rank_limit = 0.01 * static_cast<double>(cells.size());
  o.require(coupled >= 0.9, "coupled magnitude " + fmt("%.4f", coupled));
  o.require(static_cast<double>(above) < rank_limit, std::to_string(above) + " cells above the coupled bin");

  const auto control = bicoherence::estimate_bicoherence(fixture::coupled_tones(false, 1));
  const double ctrl = control.magnitude_at(f1, f2);
  o.require(ctrl <= 0.3, "control magnitude " + fmt("%.4f", ctrl));
  if (o.pass) {
    o.detail = "coupled " + fmt("%.4f", coupled) + " (" + std::to_string(above) + " of " + std::to_string(cells.size()) +
               " cells higher), control " + fmt("%.4f", ctrl);
  }
  return o;
}

Outcome moments_precision() {
  Outcome o;
  std::mt19937_64 rng(99);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(1 + rng() % 5000);
    if (t % 10 == 0) {
      std::fill(x.begin(), x.end(), std::uniform_real_distribution<double>(-3, 3)(rng));
    } else if (t % 3 == 0) {
      std::gamma_distribution<double> g(0.5 + t % 4, 2.0);  // skewed
      for (auto& v : x) v = g(rng);
    } else {
      std::normal_distribution<double> g(std::uniform_real_distribution<double>(-10, 10)(rng), 0.1 + t % 7);
      for (auto& v : x) v = g(rng);
    }
    const auto got = bicoherence::moments(x);
    const auto want = oracle::precise_moments(x);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    worst = std::max({worst, rel(got.mean, want.mean), rel(got.variance, want.variance), rel(got.skewness, want.skewness),
                      rel(got.kurtosis, want.kurtosis)});
    if (t % 10 == 0) o.require(got.skewness == 0.0 && got.kurtosis == 0.0, "degenerate rule not applied");
  }
  o.require(worst <= 1e-12, "rel err " + fmt("%.3g", worst));
  if (o.pass) o.detail = "max rel err " + fmt("%.2g", worst) + " over 100 collections (10 constant)";
  return o;
}

Outcome dft_mfcc_chain() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (std::size_t n : {1, 2, 3, 4, 5, 7, 8, 16, 36, 64, 100, 128, 200, 256}) {
    std::vector<double> x(n);
    for (auto& v : x) v = u(rng);
    const auto got = dsp::dft(x);
    const auto want = oracle::naive_dft(x);
    double scale = 0, err = 0;
    for (std::size_t k = 0; k < n; ++k) {
      scale = std::max(scale, std::abs(want[k]));
      err = std::max(err, std::abs(got[k] - want[k]));
    }
    worst = std::max(worst, err / scale);
  }
  o.require(worst <= 1e-9, "dft rel err " + fmt("%.3g", worst));

  const auto m = cepstral::mfcc(fixture::noise(audio::kCanonicalLength, 8));
  o.require(m.n_frames == 498 && m.n_coeffs == 13, "mfcc shape " + std::to_string(m.n_frames) + "x" + std::to_string(m.n_coeffs));

  cepstral::CepstralMatrix flat{40, 13, std::vector<double>(40 * 13, -2.5), 0.01, 0};
  const auto d0 = cepstral::delta(flat);
  o.require(std::all_of(d0.coefficients.begin(), d0.coefficients.end(), [](double v) { return v == 0.0; }),
            "delta of constant not zero");

  cepstral::CepstralMatrix ramp{40, 13, std::vector<double>(40 * 13), 0.01, 0};
  for (std::size_t t = 0; t < 40; ++t) {
    for (std::size_t j = 0; j < 13; ++j) ramp.at(t, j) = static_cast<double>(t);
  }
  const auto d1 = cepstral::delta(ramp, 2);
  bool ones = true;
  for (std::size_t t = 2; t + 2 < 40; ++t) {
    for (std::size_t j = 0; j < 13; ++j) ones = ones && d1.at(t, j) == 1.0;
  }
  o.require(ones, "delta of ramp not exactly 1 inside");
  if (o.pass) o.detail = "dft rel err " + fmt("%.2g", worst) + ", mfcc 498x13, delta exact";
  return o;
}

Outcome feature_contract() {
  Outcome o;
  std::string joined;
  for (auto name : features::kColumnNames) joined += std::string(name) + ",";
  o.require(joined + "label" == features::kCsvHeader, "column names disagree with header");
  o.require(features::kCsvHeader ==
                "bic_mag_mean,bic_mag_var,bic_mag_skew,bic_mag_kurt,bic_ph_mean,bic_ph_var,bic_ph_skew,bic_ph_kurt,"
                "mfcc_mean,mfcc_var,delta_mean,delta_var,delta2_mean,delta2_var,label",
            "header changed");

  std::mt19937_64 rng(17);
  std::vector<features::FeatureVector> vectors;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto label = synth::kSourceClasses[i];
    const auto clip = synth::generate_clip(label, rng);
    const auto fv = features::extract(clip, LabelingMode::Multiclass, label);
    const auto bic = bicoherence::bicoherence_features(bicoherence::estimate_bicoherence(clip));
    const auto cep = cepstral::cepstral_features(clip);
    o.require(fv.values.size() == 14, "vector length");
    o.require(std::equal(bic.begin(), bic.end(), fv.values.begin()), "bicoherence block out of order");
    o.require(std::equal(cep.begin(), cep.end(), fv.values.begin() + 8), "cepstral block out of order");
    o.require(fv.label == label, "label");
    o.require(std::all_of(fv.values.begin(), fv.values.end(), [](double v) { return std::isfinite(v); }), "non-finite value");
    vectors.push_back(fv);
  }
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> e(-40, 40);
  for (std::size_t i = 0; i < 95; ++i) {
    features::FeatureVector v;
    for (auto& x : v.values) x = std::ldexp(u(rng), e(rng));
    v.label = kAllLabels[i % 5];
    vectors.push_back(v);
  }
  const auto back = features::parse_csv(features::to_csv(vectors));
  double worst = 0;
  o.require(back.size() == vectors.size(), "row count");
  for (std::size_t i = 0; i < std::min(back.size(), vectors.size()); ++i) {
    o.require(back[i].label == vectors[i].label, "label round trip");
    for (std::size_t j = 0; j < 14; ++j) {
      worst = std::max(worst, std::abs(back[i].values[j] - vectors[i].values[j]) / std::max(1e-300, std::abs(vectors[i].values[j])));
    }
  }
  o.require(worst <= 1e-15, "csv rel err " + fmt("%.3g", worst));
  if (o.pass) o.detail = "order verified on 5 clips, csv round trip rel err " + fmt("%.2g", worst);
  return o;
}

Outcome classifier_suite() {
  using namespace classifiers;
  Outcome o;

  {  // kNN against the exhaustive scan
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    Dataset d;
    d.feature_count = 6;
    d.class_names = {"a", "b", "c"};
    std::vector<double> row(6);
    for (int i = 0; i < 500; ++i) {
      for (std::size_t j = 0; j < 6; ++j) row[j] = g(rng) * (j + 1) + (j == 0 ? i % 3 : 0);
      d.add(row, (i % 3 + (rng() % 4 == 0)) % 3);
    }
    const auto m = train_weighted_knn(d, {10});
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < 500; ++i) {
      std::vector<double> q(6);
      for (std::size_t j = 0; j < 6; ++j) q[j] = g(rng) * (j + 1);
      const auto want = oracle::exhaustive_knn(d.rows, d.labels, 6, 3, 10, q);
      mismatches += m.predict(q).label != want.label;
    }
    o.require(mismatches == 0, "knn mismatches " + std::to_string(mismatches));
  }

  {  // one tree, no bootstrap
    std::vector<double> a(4, 0.0), b(4, 1.0);
    const auto d = fixture::gaussian_blobs(50, 4, {a, b}, 3);
    const auto bag = train_bagged_trees(d, {1, false}, 9);
    auto rng = derived_rng(9, 0);
    const auto tree = train_decision_tree(d, {}, {}, rng);
    std::mt19937_64 qr(1);
    std::uniform_real_distribution<double> u(-3, 4);
    bool same = true;
    for (int i = 0; i < 500; ++i) {
      std::vector<double> q{u(qr), u(qr), u(qr), u(qr)};
      same = same && bag.predict(q).scores == tree.leaf_distribution(q);
    }
    o.require(same, "bagging with one tree differs from the tree");
  }

  double xor_acc = 0;
  {
    const auto tr = fixture::xor_points(400, 1), te = fixture::xor_points(1000, 2);
    const auto m = train_bagged_trees(tr, {}, 7);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < te.size(); ++i) hit += m.predict(te.row(i)).label == te.labels[i];
    xor_acc = static_cast<double>(hit) / static_cast<double>(te.size());
    o.require(xor_acc >= 0.95, "xor accuracy " + fmt("%.3f", xor_acc));
  }

  {  // boosting hand trace: x = 1..6, y = 0 0 1 0 1 1, stumps
    Dataset d;
    d.feature_count = 1;
    d.class_names = {"a", "b"};
    const std::size_t y[6] = {0, 0, 1, 0, 1, 1};
    for (int i = 0; i < 6; ++i) d.add(std::vector<double>{double(i + 1)}, y[i]);
    BoostTrace trace;
    train_boosted_trees(d, {1, 1, 3}, 1, &trace);
    o.require(trace.size() == 1 && trace[0].accepted, "boost trace length");
    if (!trace.empty()) {
      o.require(std::abs(trace[0].weighted_error - 1.0 / 6.0) <= 1e-12, "boost error");
      o.require(std::abs(trace[0].alpha - std::log(5.0)) <= 1e-12, "boost alpha " + fmt("%.15g", trace[0].alpha));
      const double want[6] = {0.1, 0.1, 0.1, 0.5, 0.1, 0.1};
      for (int i = 0; i < 6; ++i) o.require(std::abs(trace[0].weights_after[i] - want[i]) <= 1e-12, "boost weights");
    }
  }

  {  // undersampling balance
    std::vector<double> a(3, 0.0), b(3, 1.0), c(3, -1.0);
    Dataset d = fixture::gaussian_blobs(12, 3, {a, b, c}, 5);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int i = 0; i < 60; ++i) d.add(std::vector<double>{g(rng), g(rng), g(rng)}, i % 2);
    BoostTrace trace;
    train_rusboost(d, {}, 3, &trace);
    bool balanced = !trace.empty();
    for (const auto& r : trace) balanced = balanced && r.fit_class_counts == std::vector<std::size_t>{12, 12, 12};
    o.require(balanced, "rusboost round not balanced");
  }

  {  // determinism
    std::vector<double> a(5, 0.0), b(5, 0.8), c(5, -0.8);
    const auto d = fixture::gaussian_blobs(30, 5, {a, b, c}, 6);
    for (auto f : {Family::LDA, Family::LinearSVM, Family::WeightedKNN, Family::BoostedTrees, Family::BaggedTrees,
                   Family::RUSBoostedTrees}) {
      TrainerSpec spec;
      spec.family = f;
      o.require(serialize_model(train(d, spec, 42)) == serialize_model(train(d, spec, 42)),
                std::string(to_string(f)) + " not deterministic");
    }
  }
  if (o.pass) o.detail = "knn exact on 500, reduction exact, xor " + fmt("%.3f", xor_acc) + ", trace/balance/determinism exact";
  return o;
}

Outcome metrics() {
  Outcome o;
  const std::vector<double> scores{0.9, 0.8, 0.4, 0.7, 0.3, 0.1};
  bool pos[6] = {true, true, true, false, false, false};
  const double auc = evaluation::binary_auc(scores, std::span<const bool>(pos, 6));
  o.require(auc == 8.0 / 9.0, "auc " + fmt("%.17g", auc));
  const double f1 = evaluation::macro_f1({2, {5, 5, 5, 5}});
  o.require(f1 == 0.5, "macro f1 " + fmt("%.17g", f1));

  std::mt19937_64 rng(3);
  std::vector<std::size_t> yt(777), yp(777);
  for (std::size_t i = 0; i < yt.size(); ++i) yt[i] = rng() % 5, yp[i] = rng() % 5;
  const auto cm = evaluation::confusion(yt, yp, 5);
  const auto want = oracle::hash_confusion(yt, yp, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) o.require(cm.at(i, j) == want[i][j], "confusion cell");
  }
  o.require(cm.total() == yt.size(), "confusion total");
  o.require(cm.accuracy() == static_cast<double>(cm.trace()) / static_cast<double>(cm.total()), "accuracy identity");

  classifiers::Dataset d;
  d.feature_count = 1;
  d.class_names = {"a", "b", "c"};
  for (std::size_t i = 0; i < 103; ++i) d.add(std::vector<double>{double(i)}, i % 7 == 0 ? 2 : i % 3 == 0);
  const auto folds = evaluation::stratified_folds(d, 5, 11);
  o.require(folds.size() == d.size(), "every row assigned once");
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<std::size_t> sizes(5, 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.labels[i] == c) {
        o.require(folds[i] < 5, "fold index out of range");
        if (folds[i] < 5) ++sizes[folds[i]];
      }
    }
    o.require(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1,
              "fold not stratified");
  }

  classifiers::TrainerSpec spec;
  spec.family = classifiers::Family::LDA;
  const auto report = evaluation::kfold_cv(fixture::separated_pair(100, 3, 1), 5, spec, 2);
  o.require(report.confusion.total() == 100, "pooled total");
  o.require(report.accuracy == static_cast<double>(report.confusion.trace()) / 100.0, "report accuracy identity");
  if (o.pass) o.detail = "auc 8/9, f1 0.5, confusion/accuracy exact, folds stratified";
  return o;
}

double bagged_cv(const std::vector<features::FeatureVector>& v) {
  const auto cols = *features::feature_group("all");
  const auto data = classifiers::make_dataset(v, cols);
  classifiers::TrainerSpec spec;
  spec.family = classifiers::Family::BaggedTrees;
  return evaluation::kfold_cv(data, 5, spec, 7).accuracy;
}

Outcome end_to_end() {
  Outcome o;
  const auto t0 = Clock::now();
  fixture::TempDir dir("e2e");
  const auto manifest = synth::synthesize_corpus(dir.path(), 20, 7);
  o.require(manifest.entries.size() == 100, "corpus size");

  std::vector<features::FeatureVector> multi(manifest.entries.size()), binary(manifest.entries.size());
  parallel_for(manifest.entries.size(), [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    const auto clip = audio::canonicalize(audio::load_wav(manifest.resolve(e))).at(0);
    multi[i] = features::extract(clip, LabelingMode::Multiclass, e.label);
    binary[i] = multi[i];
    binary[i].label = project_label(e.label, LabelingMode::Binary);
  });
  const double acc_multi = bagged_cv(multi);
  const double acc_binary = bagged_cv(binary);
  const double secs = seconds_since(t0);
  o.require(acc_multi >= 0.90, "multiclass cv " + fmt("%.3f", acc_multi));
  o.require(acc_binary >= acc_multi, "binary " + fmt("%.3f", acc_binary) + " < multiclass " + fmt("%.3f", acc_multi));
  o.require(secs < 300.0, "took " + fmt("%.0f s", secs));
  if (o.pass) {
    o.detail = "multiclass " + fmt("%.3f", acc_multi) + ", binary " + fmt("%.3f", acc_binary) + ", " + fmt("%.1f s", secs);
  }
  return o;
}

Outcome mel_image_contract() {
  Outcome o;
  fixture::TempDir dir("mel");
  const auto manifest = synth::synthesize_corpus(dir / "corpus", 3, 21);
  const auto a = melspec::export_dataset(manifest, dir / "a");
  const auto b = melspec::export_dataset(manifest, dir / "b");
  o.require(a.failures.empty() && a.images.size() == manifest.entries.size(), "export count");
  double worst = 0;
  std::mt19937_64 rng(0);
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    const auto decoded = melspec::read_png(dir / "a" / a.images[i].path);
    o.require(decoded.width == 64 && decoded.height == 64 && decoded.pixels.size() == 64 * 64 * 3, "png shape");
    o.require(fixture::slurp(dir / "a" / a.images[i].path) == fixture::slurp(dir / "b" / b.images[i].path),
              "re-export differs: " + a.images[i].path);
    const auto& e = manifest.entries[i];
    const auto img = melspec::melspectrogram_image(audio::canonicalize(audio::load_wav(manifest.resolve(e))).at(0));
    o.require(img.pixels.size() == 64 * 64 * 3, "image shape");
    for (std::size_t k = 0; k < img.pixels.size() && k < decoded.pixels.size(); ++k) {
      o.require(img.pixels[k] >= 0.0 && img.pixels[k] <= 1.0, "pixel out of range");
      worst = std::max(worst, std::abs(img.pixels[k] - decoded.pixels[k]));
    }
  }
  o.require(fixture::slurp(a.index_path) == fixture::slurp(b.index_path), "index differs");
  o.require(worst <= 1.0 / 255.0, "png error " + fmt("%.4g", worst));
  if (o.pass) o.detail = std::to_string(a.images.size()) + " images, png err " + fmt("%.4f", worst) + ", byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"bicoherence-oracle-equivalence", bicoherence_oracle},
      {"bicoherence-bounds-and-invariance", bicoherence_bounds},
      {"quadratic-phase-coupling-detection", phase_coupling},
      {"moments-correctness", moments_precision},
      {"dft-mfcc-chain", dft_mfcc_chain},
      {"feature-vector-contract", feature_contract},
      {"classifier-suite", classifier_suite},
      {"metrics", metrics},
      {"end-to-end-desk-run", end_to_end},
      {"mel-image-contract", mel_image_contract},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(checks.size()) - failed, checks.size());
  return failed == 0 ? 0 : 1;
}
