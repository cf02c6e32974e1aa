#include "narrative/labels.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "narrative/error.hpp"

namespace narrative {
namespace {

constexpr std::array<std::string_view, kNumClasses> kNames = {
    "Cons", "DPA", "LF", "MRE", "PE", "SEN", "AnimalVac"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

Label label_from_index(std::size_t index) {
  if (index >= kNumClasses) {
    throw Error("class index out of range: " + std::to_string(index));
  }
  return static_cast<Label>(index);
}

std::string_view label_name(Label label) { return kNames[label_index(label)]; }

std::optional<Label> parse_label(std::string_view text) {
  auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (iequals(text, kNames[i])) return static_cast<Label>(i);
  }
  return std::nullopt;
}

}  // namespace narrative
