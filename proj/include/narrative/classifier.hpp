#pragma once

#include <array>
#include <string>
#include <string_view>

#include "narrative/corpus.hpp"
#include "narrative/labels.hpp"

namespace narrative {

struct ClassProbs {
  std::array<double, kNumClasses> probs{};

  static ClassProbs uniform();
  // Argmax with ties going to the lowest class index.
  Label label() const;
  double sum() const;
};

// Common prediction contract shared by the topic model and the baselines.
class TextClassifier {
 public:
  virtual ~TextClassifier() = default;
  virtual ClassProbs predict_proba(const Document& doc) const = 0;
  virtual std::string_view kind() const = 0;

  Label predict(const Document& doc) const { return predict_proba(doc).label(); }
};

}  // namespace narrative
