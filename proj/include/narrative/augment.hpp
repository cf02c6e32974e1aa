#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "narrative/corpus.hpp"
#include "narrative/labels.hpp"

namespace narrative {

struct KeywordRule {
  Label target_class;
  std::vector<std::string> keywords;  // phrases, matched on word boundaries
  std::vector<std::string> hashtags;  // stored verbatim, '#' optional
};

// Keyword and hashtag lists used to collect minority-class and AnimalVac
// candidates. Classes without collection rules (DPA, PE, SEN) are absent.
const std::vector<KeywordRule>& default_rules();

// {"<class>": {"keywords": [...], "hashtags": [...]}, ...}
std::vector<KeywordRule> load_rules(const std::filesystem::path& path);
std::vector<KeywordRule> parse_rules(const nlohmann::json& j);
nlohmann::json rules_to_json(std::span<const KeywordRule> rules);

struct MatchResult {
  std::string doc_id;
  std::vector<std::pair<Label, std::string>> matches;  // pattern verbatim

  bool empty() const { return matches.empty(); }
  // Distinct matched classes in label order.
  std::vector<Label> suggested_classes() const;
};

// Runs on raw text (content(), before cleaning): hashtags vanish in cleaning.
MatchResult match_rules(const Document& doc, std::span<const KeywordRule> rules);

struct Candidate {
  Document document;
  MatchResult match;
};

// Documents with at least one match, excluding duplicates of `existing` and
// of earlier candidates. Output is sorted by document id.
std::vector<Candidate> filter_candidates(
    std::span<const Document> docs, std::span<const KeywordRule> rules,
    std::span<const Document> existing = {});

// CSV columns id,text,suggested_classes,label; label left empty.
void export_annotation_queue(std::span<const Candidate> candidates,
                             const std::filesystem::path& path);

// Reads an annotated queue back. Every row needs a valid label; documents
// come back with origin=augmented.
std::vector<Document> import_annotations(const std::filesystem::path& path);

struct BalanceReport {
  std::array<std::size_t, kNumClasses> current{};
  std::array<std::size_t, kNumClasses> target{};
  std::array<std::size_t, kNumClasses> deficit{};
};

BalanceReport balance_report(std::span<const Document> dataset,
                             const std::array<std::size_t, kNumClasses>& targets);
BalanceReport balance_report(const std::array<std::size_t, kNumClasses>& current,
                             const std::array<std::size_t, kNumClasses>& targets);

}  // namespace narrative
