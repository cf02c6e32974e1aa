#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "narrative/corpus.hpp"

namespace narrative {

// Generator for labeled corpora with known class vocabularies. Each token is
// drawn from the document's class words with probability class_ratio and
// from the shared noise words otherwise.
struct SyntheticSpec {
  std::array<std::size_t, kNumClasses> docs_per_class = {100, 100, 100, 100,
                                                         100, 100, 100};
  std::size_t class_words = 20;
  std::size_t noise_words = 60;
  double class_ratio = 0.7;
  std::size_t min_len = 20;
  std::size_t max_len = 40;
  std::uint64_t seed = 1;
  std::string id_prefix = "syn";
};

struct SyntheticCorpus {
  std::vector<Document> documents;
  std::array<std::vector<std::string>, kNumClasses> keywords;
  std::vector<std::string> noise;
};

// "c<class>w<j>" and "n<j>"; both zero-padded to two digits.
std::string class_word(Label label, std::size_t j);
std::string noise_word(std::size_t j);

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

// Documents that only carry labels and origins, for replaying published
// class counts through the statistics and splitting code. `fd` documents get
// origin fd, `added` ones origin augmented.
std::vector<Document> count_replay_corpus(
    const std::array<std::size_t, kNumClasses>& fd,
    const std::array<std::size_t, kNumClasses>& added);

}  // namespace narrative
