#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrative/cantm.hpp"

namespace narrative {

enum class TopicStage { m1, m2 };

struct WordScore {
  std::string word;
  double score = 0;
};

// Ranked words for one topic (or class): scores non-increasing, ties in
// lexicographic order, no repeats.
struct TopicWordList {
  std::size_t id = 0;
  std::vector<WordScore> words;
};

// Top-n words of row `row` of a (rows x V) decoder weight matrix.
TopicWordList rank_row(const Matrix& weights, std::size_t row,
                       const Vocabulary& vocab, std::size_t n);

// Words of topic `topic` of the M1 decoder (stage m1, topic < K) or of the
// M2 decoder (stage m2, topic < K_s). Throws Error when out of range.
TopicWordList topic_words(const CantmModel& model, TopicStage stage,
                          std::size_t topic, std::size_t n = 10);

// classifier_decoder reads p(x_bow|y) directly; m2_decoder reads the label
// rows of the M2 decoder instead.
enum class ClassWordSource { classifier_decoder, m2_decoder };

TopicWordList class_associated_words(
    const CantmModel& model, Label label, std::size_t n = 10,
    ClassWordSource source = ClassWordSource::classifier_decoder);

struct TopicActivation {
  std::size_t topic = 0;
  double activation = 0;
  TopicWordList words;
};

struct Explanation {
  Label predicted = Label::Cons;
  ClassProbs probabilities;
  std::optional<std::vector<std::pair<std::string, double>>> attention;
  Vector z_weights;    // posterior mean of z, length K
  Vector z_s_weights;  // posterior mean of z_s, length K_s
  std::vector<TopicActivation> top_topics_m1;
  std::vector<TopicActivation> top_topics_m2;
  TopicWordList class_words;
};

struct ExplainOptions {
  std::size_t n_words = 10;
  std::size_t n_topics = 3;
  ClassWordSource class_source = ClassWordSource::classifier_decoder;
};

Explanation explain(const Document& doc, const CantmModel& model,
                    const ExplainOptions& options = {});
Explanation explain(const Example& ex, const CantmModel& model,
                    const ExplainOptions& options = {});

nlohmann::json to_json(const TopicWordList& list);
nlohmann::json to_json(const Explanation& e);
std::string render_text(const Explanation& e);

}  // namespace narrative
