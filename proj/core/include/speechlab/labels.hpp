#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace speechlab {

enum class ClassLabel { Human, IITM_TTS, Hearling, AmazonPolly, VoiceMaker, AI };

enum class LabelingMode { Binary, Multiclass };

// Canonical ordering used whenever class names are enumerated.
inline constexpr std::array<ClassLabel, 6> kAllLabels = {
    ClassLabel::Human,       ClassLabel::IITM_TTS,   ClassLabel::Hearling,
    ClassLabel::AmazonPolly, ClassLabel::VoiceMaker, ClassLabel::AI};

std::string_view to_string(ClassLabel label) noexcept;
std::optional<ClassLabel> parse_label(std::string_view text) noexcept;

std::string_view to_string(LabelingMode mode) noexcept;
std::optional<LabelingMode> parse_mode(std::string_view text) noexcept;

// Binary mode admits {Human, AI}; multiclass admits everything except AI.
bool is_legal(ClassLabel label, LabelingMode mode) noexcept;

// Maps a manifest label into `mode`: TTS sources collapse to AI in binary
// mode. Throws ArgumentError for AI in multiclass mode.
ClassLabel project_label(ClassLabel label, LabelingMode mode);

}  // namespace speechlab
