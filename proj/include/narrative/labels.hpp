#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace narrative {

// The seven narrative categories. The enumerator order is the class index
// used by every matrix, report and checkpoint in the project.
enum class Label : std::uint8_t { Cons, DPA, LF, MRE, PE, SEN, AnimalVac };

inline constexpr std::size_t kNumClasses = 7;

inline constexpr std::array<Label, kNumClasses> kAllLabels = {
    Label::Cons, Label::DPA, Label::LF,       Label::MRE,
    Label::PE,   Label::SEN, Label::AnimalVac};

constexpr std::size_t label_index(Label label) {
  return static_cast<std::size_t>(label);
}

Label label_from_index(std::size_t index);

std::string_view label_name(Label label);

// Case-insensitive, surrounding whitespace ignored ("mre " -> MRE).
std::optional<Label> parse_label(std::string_view text);

}  // namespace narrative
