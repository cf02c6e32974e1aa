#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "narrative/corpus.hpp"
#include "narrative/nn.hpp"
#include "narrative/preprocess.hpp"

namespace narrative {

// One document after cleaning, tokenization, truncation and vectorization.
struct Example {
  std::string id;
  TokenSeq tokens;                     // truncated token sequence
  std::vector<std::uint32_t> token_ids;  // vocab index, vocab.size() for OOV
  BowVector bow;
  std::optional<Label> label;
  bool truncated = false;
};

// The vocabulary plus the truncation policy; everything a model needs to
// turn raw documents into examples. Built from training data only.
class Featurizer {
 public:
  Featurizer() = default;
  Featurizer(Vocabulary vocab, TruncationStrategy truncation)
      : vocab_(std::move(vocab)), truncation_(truncation) {}

  static Featurizer fit(std::span<const Document> docs,
                        const VocabOptions& options,
                        const TruncationStrategy& truncation);

  Example featurize(const Document& doc) const;
  std::vector<Example> featurize(std::span<const Document> docs) const;

  const Vocabulary& vocab() const { return vocab_; }
  const TruncationStrategy& truncation() const { return truncation_; }

 private:
  Vocabulary vocab_;
  TruncationStrategy truncation_ = TruncationStrategy::head(400);
};

// Dense (rows = examples) count matrix over the vocabulary.
Matrix bow_matrix(std::span<const Example* const> batch, std::size_t vocab_size);

}  // namespace narrative
