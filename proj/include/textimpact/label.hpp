#pragma once

#include <optional>
#include <string_view>

namespace textimpact {

enum class Label { High, Moderate };

std::string_view label_name(Label label) noexcept;
// Case-insensitive "HIGH" / "MODERATE".
std::optional<Label> parse_label(std::string_view text);

// HIGH is the positive class for scores and ROC analysis.
constexpr int label_code(Label label) noexcept { return label == Label::High ? 1 : 0; }
constexpr Label label_from_code(int code) noexcept { return code == 1 ? Label::High : Label::Moderate; }

}  // namespace textimpact
