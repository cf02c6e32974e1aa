#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrative/labels.hpp"

namespace narrative {

enum class Platform { twitter, facebook, instagram, news, other };
enum class Origin { fd, augmented, unlabeled };

std::string_view to_string(Platform p);
std::string_view to_string(Origin o);
std::optional<Platform> parse_platform(std::string_view text);
std::optional<Origin> parse_origin(std::string_view text);

struct Document {
  std::string id;
  std::string text;
  Platform platform = Platform::other;
  std::optional<Label> label;
  Origin origin = Origin::unlabeled;
  std::optional<std::string> alt_text;

  // text and alt_text joined by a single space (either may be empty).
  std::string content() const;
};

nlohmann::json to_json(const Document& doc);
// Same field rules as a JSONL row; nullopt when text and alt text are both
// blank. `where` prefixes error messages.
std::optional<Document> document_from_json(const nlohmann::json& obj,
                                           const std::string& where);

enum class DataFormat { jsonl, csv };

// Chooses by extension: ".csv" is CSV, everything else JSONL.
DataFormat format_for(const std::filesystem::path& path);

struct LoadResult {
  std::vector<Document> documents;
  std::size_t skipped_empty = 0;  // rows with no text and no alt text
};

// Throws Error naming the line for malformed rows, unknown labels or
// platforms, and repeated ids.
LoadResult load_dataset(const std::filesystem::path& path, DataFormat format);
LoadResult load_dataset(const std::filesystem::path& path);

void save_jsonl(std::span<const Document> docs,
                const std::filesystem::path& path);

// Cleaned, case-folded content; two documents are duplicates iff their keys
// are equal.
std::string duplicate_key(const Document& doc);

struct DedupResult {
  std::vector<Document> documents;
  std::size_t removed = 0;
};

DedupResult deduplicate(std::span<const Document> docs);

struct ClassDistribution {
  std::array<std::size_t, kNumClasses> counts{};
  std::array<double, kNumClasses> proportions{};
  std::size_t total = 0;

  // Percentages rounded to the nearest integer, for display.
  std::array<int, kNumClasses> rounded_percent() const;
};

ClassDistribution distribution_from_counts(
    const std::array<std::size_t, kNumClasses>& counts);
ClassDistribution class_distribution(std::span<const Document> docs);

struct FoldAssignment {
  int k = 0;
  std::map<std::string, int> fold_of;  // document id -> fold
  // Document positions (into the input span) per fold, ascending.
  std::vector<std::vector<std::size_t>> folds;
};

// Each class's members are shuffled and dealt round-robin over the folds.
// The deal continues where the previous class stopped, so fold sizes also
// differ by at most one. Unlabeled documents are not assigned.
FoldAssignment stratified_kfold(std::span<const Document> docs, int k,
                                std::uint64_t seed);

}  // namespace narrative
