#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "speechlab/bicoherence.hpp"
#include "speechlab/classifiers.hpp"
#include "speechlab/error.hpp"
#include "speechlab/evaluation.hpp"
#include "speechlab/features.hpp"
#include "speechlab/melspec_image.hpp"
#include "speechlab/parallel.hpp"
#include "speechlab/synth.hpp"

namespace speechlab::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kModelNames = {"lda", "svm", "knn", "boosted", "bagged", "rusboost"};
const std::vector<std::string> kFeatureGroups = {"all", "bicoherence", "mfcc", "delta", "delta2", "bic_mag", "bic_phase"};

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct ExtractResult {
  std::vector<features::FeatureVector> vectors;
  std::vector<std::pair<std::string, std::string>> failures;
};

// Features for every canonical segment of every manifest entry, in
// manifest order.
ExtractResult extract_manifest(const audio::CorpusManifest& manifest, LabelingMode mode) {
  const std::size_t n = manifest.entries.size();
  std::vector<std::vector<features::FeatureVector>> rows(n);
  std::vector<std::optional<std::string>> errors(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    try {
      const ClassLabel label = project_label(entry.label, mode);
      const auto segments = audio::canonicalize(audio::load_wav(manifest.resolve(entry)));
      if (segments.empty()) throw InsufficientDataError("clip shorter than 5 s");
      for (const auto& seg : segments) rows[i].push_back(features::extract(seg, mode, label));
    } catch (const std::exception& e) {
      rows[i].clear();
      errors[i] = e.what();
    }
  });
  ExtractResult result;
  for (std::size_t i = 0; i < n; ++i) {
    result.vectors.insert(result.vectors.end(), rows[i].begin(), rows[i].end());
    if (errors[i]) result.failures.emplace_back(manifest.entries[i].path, *errors[i]);
  }
  return result;
}

void print_class_counts(const std::vector<features::FeatureVector>& vectors, std::ostream& out) {
  for (ClassLabel label : kAllLabels) {
    const auto count = std::count_if(vectors.begin(), vectors.end(), [&](const auto& fv) { return fv.label == label; });
    if (count > 0) out << "  " << to_string(label) << ": " << count << "\n";
  }
}

void print_report(const evaluation::EvaluationReport& report, std::ostream& out) {
  out << "accuracy: " << fixed(report.accuracy) << "\n";
  out << "macro-F1: " << fixed(report.macro_f1) << "\n";
  out << "ROC-AUC: " << (std::isfinite(report.roc_auc) ? fixed(report.roc_auc) : std::string("undefined")) << "\n";
  out << "confusion (rows = true, columns = predicted):\n";
  std::size_t width = 6;
  for (const auto& name : report.class_names) width = std::max(width, name.size() + 1);
  out << std::string(width, ' ');
  for (const auto& name : report.class_names) out << std::string(width - name.size(), ' ') << name;
  out << "\n";
  for (std::size_t r = 0; r < report.class_names.size(); ++r) {
    const auto& name = report.class_names[r];
    out << name << std::string(width - name.size(), ' ');
    for (std::size_t c = 0; c < report.class_names.size(); ++c) {
      const auto cell = std::to_string(report.confusion.at(r, c));
      out << std::string(width - cell.size(), ' ') << cell;
    }
    out << "\n";
  }
}

int cmd_extract(const std::string& manifest_path, const std::string& out_csv, const std::string& mode_text,
                std::ostream& out, std::ostream& err) {
  const auto manifest = audio::read_manifest(manifest_path);
  if (manifest.entries.empty()) {
    err << "error: manifest has no entries\n";
    return kExitFailure;
  }
  const LabelingMode mode = mode_text.empty() ? manifest.labeling_mode : *parse_mode(mode_text);
  auto result = extract_manifest(manifest, mode);
  for (const auto& [path, reason] : result.failures) err << "failed: " << path << ": " << reason << "\n";
  if (result.vectors.empty()) {
    err << "error: no clip could be processed\n";
    return kExitFailure;
  }
  features::write_csv(result.vectors, out_csv);
  out << "wrote " << result.vectors.size() << " feature rows (" << to_string(mode) << ") to " << out_csv << "\n";
  print_class_counts(result.vectors, out);
  return kExitOk;
}

int cmd_train(const std::string& csv_path, const std::string& model_path, const std::string& model_name,
              const std::string& group, std::uint64_t seed, std::size_t folds, std::ostream& out) {
  const auto vectors = features::read_csv(csv_path);
  const auto columns = *features::feature_group(group);
  auto data = classifiers::make_dataset(vectors, columns);
  data.validate();

  classifiers::TrainerSpec spec;
  spec.family = *classifiers::parse_family(model_name);
  const auto report = evaluation::kfold_cv(data, folds, spec, seed);
  out << folds << "-fold CV accuracy: " << fixed(report.accuracy) << " (model " << model_name << ", features "
      << group << ", " << data.size() << " rows)\n";
  out << "per-fold:";
  for (double a : report.per_fold_accuracy) out << " " << fixed(a);
  out << "\nmacro-F1: " << fixed(report.macro_f1) << "\n";

  auto model = classifiers::train(data, spec, seed);
  for (std::size_t c : columns) model.feature_names.emplace_back(features::kColumnNames[c]);
  classifiers::save_model(model, model_path);
  out << "saved model to " << model_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, const std::string& group,
             const std::string& report_path, std::ostream& out, std::ostream& err) {
  const auto model = classifiers::load_model(model_path);

  std::vector<features::FeatureVector> vectors;
  if (fs::path(data_path).extension() == ".json") {
    const bool binary = std::find(model.class_names.begin(), model.class_names.end(), "AI") != model.class_names.end();
    auto result = extract_manifest(audio::read_manifest(data_path), binary ? LabelingMode::Binary : LabelingMode::Multiclass);
    for (const auto& [path, reason] : result.failures) err << "failed: " << path << ": " << reason << "\n";
    vectors = std::move(result.vectors);
  } else {
    vectors = features::read_csv(data_path);
  }
  if (vectors.empty()) {
    err << "error: no evaluation rows\n";
    return kExitFailure;
  }

  const auto columns = *features::feature_group(group);
  if (columns.size() != model.feature_count) {
    err << "error: feature mismatch: model expects " << model.feature_count << " columns";
    if (!model.feature_names.empty()) {
      err << " (";
      for (std::size_t i = 0; i < model.feature_names.size(); ++i) err << (i ? "," : "") << model.feature_names[i];
      err << ")";
    }
    err << " but --features " << group << " selects " << columns.size()
        << "; pass the --features group the model was trained with\n";
    return kExitFailure;
  }
  if (!model.feature_names.empty()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (model.feature_names[i] != features::kColumnNames[columns[i]]) {
        err << "error: feature mismatch: model column " << i + 1 << " is " << model.feature_names[i]
            << ", data column is " << features::kColumnNames[columns[i]] << "\n";
        return kExitFailure;
      }
    }
  }

  classifiers::Dataset data;
  data.feature_count = columns.size();
  data.class_names = model.class_names;
  std::vector<double> row(columns.size());
  for (const auto& fv : vectors) {
    const auto name = std::string(to_string(fv.label));
    const auto it = std::find(model.class_names.begin(), model.class_names.end(), name);
    if (it == model.class_names.end()) {
      err << "error: label '" << name << "' is not one of the model's classes\n";
      return kExitFailure;
    }
    for (std::size_t c = 0; c < columns.size(); ++c) row[c] = fv.values[columns[c]];
    data.add(row, static_cast<std::size_t>(it - model.class_names.begin()));
  }

  const auto report = evaluation::evaluate(model, data);
  print_report(report, out);
  if (!report_path.empty()) {
    std::ofstream file(report_path, std::ios::trunc);
    if (!file) throw Error("cannot write " + report_path);
    file << evaluation::report_to_json(report);
    out << "wrote report to " << report_path << "\n";
  }
  return kExitOk;
}

int cmd_export_melspec(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
                       std::ostream& err) {
  const auto manifest = audio::read_manifest(manifest_path);
  if (manifest.entries.empty()) {
    err << "error: no entries in " << manifest_path << "\n";
    return kExitFailure;
  }
  const auto summary = melspec::export_dataset(manifest, out_dir);
  for (const auto& f : summary.failures) err << "failed: " << f.path << ": " << f.reason << "\n";
  out << "wrote " << summary.images.size() << " images and " << summary.index_path.string() << "\n";
  return summary.images.empty() ? kExitFailure : kExitOk;
}

int cmd_synth_corpus(const std::string& out_dir, std::size_t n_per_class, std::uint64_t seed, std::ostream& out) {
  const auto manifest = synth::synthesize_corpus(out_dir, n_per_class, seed);
  out << "wrote " << manifest.entries.size() << " clips and " << (fs::path(out_dir) / "manifest.json").string() << "\n";
  return kExitOk;
}

int cmd_dump_bicoherence(const std::string& wav, const std::string& out_csv, std::size_t seg_len, std::ostream& out) {
  const auto segments = audio::canonicalize(audio::load_wav(wav));
  if (segments.empty()) throw InsufficientDataError(wav + ": clip shorter than 5 s");
  const auto map = bicoherence::estimate_bicoherence(segments.front(), seg_len);
  std::ofstream file(out_csv, std::ios::trunc);
  if (!file) throw Error("cannot write " + out_csv);
  const double bin_hz = static_cast<double>(audio::kCanonicalRate) / static_cast<double>(seg_len);
  file << "f1_bin,f2_bin,f1_hz,f2_hz,magnitude,phase\n";
  char line[160];
  std::size_t cells = 0;
  for (std::size_t f1 = 0; f1 < map.grid_size; ++f1) {
    for (std::size_t f2 = 0; f2 < map.grid_size; ++f2) {
      if (!bicoherence::in_triangle(f1, f2, seg_len)) continue;
      std::snprintf(line, sizeof line, "%zu,%zu,%.17g,%.17g,%.17g,%.17g\n", f1, f2, f1 * bin_hz, f2 * bin_hz,
                    map.magnitude_at(f1, f2), map.phase_at(f1, f2));
      file << line;
      ++cells;
    }
  }
  out << "wrote " << cells << " triangle cells (first 5 s segment, " << map.segment_count << " segments) to "
      << out_csv << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"speechlab: synthetic speech detection toolkit"};
  app.name("speechlab");
  app.require_subcommand(1);

  std::string manifest, out_csv, mode;
  std::uint64_t seed = 7;
  auto* extract = app.add_subcommand("extract", "Extract 14-D feature vectors from a manifest into CSV");
  extract->add_option("manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  extract->add_option("out_csv", out_csv, "Output feature CSV")->required();
  extract->add_option("--mode", mode, "binary or multiclass (default: the manifest's labels)")
      ->check(CLI::IsMember({"binary", "multiclass"}));
  extract->add_option("--seed", seed, "Seed (extraction is deterministic; recorded for symmetry)");

  std::string features_csv, out_model, model_name = "bagged", group = "all";
  std::size_t folds = 5;
  auto* train = app.add_subcommand("train", "Train a classifier on a feature CSV and report k-fold CV accuracy");
  train->add_option("features_csv", features_csv, "Feature CSV")->required()->check(CLI::ExistingFile);
  train->add_option("out_model", out_model, "Output model file")->required();
  train->add_option("--model", model_name, "lda|svm|knn|boosted|bagged|rusboost")->check(CLI::IsMember(kModelNames));
  train->add_option("--features", group, "all|bicoherence|mfcc|delta|delta2|bic_mag|bic_phase")
      ->check(CLI::IsMember(kFeatureGroups));
  train->add_option("--seed", seed, "Training and fold-assignment seed");
  train->add_option("--folds", folds, "Cross-validation folds")->check(CLI::Range(2, 100));

  std::string model_path, data_path, report_path, eval_group = "all";
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a feature CSV or a manifest");
  eval->add_option("model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  eval->add_option("data", data_path, "Feature CSV or manifest JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--features", eval_group, "Feature group the model was trained on")
      ->check(CLI::IsMember(kFeatureGroups));
  eval->add_option("--report", report_path, "Write the evaluation report JSON here");

  std::string export_manifest, export_dir;
  auto* export_cmd = app.add_subcommand("export-melspec", "Export 64x64x3 mel-spectrogram PNGs and an index");
  export_cmd->add_option("manifest", export_manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("out_dir", export_dir, "Output directory")->required();

  std::string corpus_dir;
  std::size_t n_per_class = 20;
  auto* synth_cmd = app.add_subcommand("synth-corpus", "Generate a labeled synthetic corpus");
  synth_cmd->add_option("out_dir", corpus_dir, "Output directory")->required();
  synth_cmd->add_option("--n-per-class", n_per_class, "Clips per class")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", seed, "Corpus seed");

  std::string dump_wav, dump_csv;
  std::size_t seg_len = bicoherence::kDefaultSegmentLength;
  auto* dump = app.add_subcommand("dump-bicoherence", "Write the bicoherence triangle of a clip as CSV (debugging)");
  dump->add_option("wav", dump_wav, "Input WAV")->required()->check(CLI::ExistingFile);
  dump->add_option("out_csv", dump_csv, "Output CSV")->required();
  dump->add_option("--segment", seg_len, "Segment length (power of two)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*extract) return cmd_extract(manifest, out_csv, mode, out, err);
    if (*train) return cmd_train(features_csv, out_model, model_name, group, seed, folds, out);
    if (*eval) return cmd_eval(model_path, data_path, eval_group, report_path, out, err);
    if (*export_cmd) return cmd_export_melspec(export_manifest, export_dir, out, err);
    if (*synth_cmd) return cmd_synth_corpus(corpus_dir, n_per_class, seed, out);
    if (*dump) return cmd_dump_bicoherence(dump_wav, dump_csv, seg_len, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace speechlab::cli
