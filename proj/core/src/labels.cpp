#include "speechlab/labels.hpp"

#include "speechlab/error.hpp"

namespace speechlab {

std::string_view to_string(ClassLabel label) noexcept {
  switch (label) {
    case ClassLabel::Human: return "Human";
    case ClassLabel::IITM_TTS: return "IITM_TTS";
    case ClassLabel::Hearling: return "Hearling";
    case ClassLabel::AmazonPolly: return "AmazonPolly";
    case ClassLabel::VoiceMaker: return "VoiceMaker";
    case ClassLabel::AI: return "AI";
  }
  return "?";
}

std::optional<ClassLabel> parse_label(std::string_view text) noexcept {
  for (ClassLabel label : kAllLabels) {
    if (to_string(label) == text) return label;
  }
  return std::nullopt;
}

std::string_view to_string(LabelingMode mode) noexcept {
  return mode == LabelingMode::Binary ? "binary" : "multiclass";
}

std::optional<LabelingMode> parse_mode(std::string_view text) noexcept {
  if (text == "binary") return LabelingMode::Binary;
  if (text == "multiclass") return LabelingMode::Multiclass;
  return std::nullopt;
}

bool is_legal(ClassLabel label, LabelingMode mode) noexcept {
  if (mode == LabelingMode::Binary) {
    return label == ClassLabel::Human || label == ClassLabel::AI;
  }
  return label != ClassLabel::AI;
}

ClassLabel project_label(ClassLabel label, LabelingMode mode) {
  if (mode == LabelingMode::Binary) {
    return label == ClassLabel::Human ? ClassLabel::Human : ClassLabel::AI;
  }
  if (label == ClassLabel::AI) {
    throw ArgumentError("label 'AI' is not valid in multiclass mode");
  }
  return label;
}

}  // namespace speechlab
