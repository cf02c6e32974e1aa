#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace narrative {

// Text with mentions, URLs, hashtag tokens and emoji removed and whitespace
// collapsed to single spaces. Only `clean` produces one.
class CleanText {
 public:
  CleanText() = default;
  const std::string& value() const { return value_; }
  bool empty() const { return value_.empty(); }
  friend bool operator==(const CleanText&, const CleanText&) = default;

 private:
  friend CleanText clean(std::string_view text);
  explicit CleanText(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

using TokenSeq = std::vector<std::string>;

CleanText clean(std::string_view text);

// Lowercased whitespace tokens with punctuation stripped from both edges;
// tokens that were pure punctuation are dropped. Internal punctuation stays
// ("covid-19").
TokenSeq tokenize(const CleanText& text);

// ASCII case folding; bytes >= 0x80 are passed through untouched.
std::string fold_case(std::string_view text);

class TruncationStrategy {
 public:
  enum class Mode { head, tail, head_tail };

  static TruncationStrategy head(std::size_t n);
  static TruncationStrategy tail(std::size_t n);
  static TruncationStrategy head_tail(std::size_t head_len,
                                      std::size_t tail_len);
  // "head:400", "tail:300", "head_tail:300,212"
  static TruncationStrategy parse(std::string_view text);

  Mode mode() const { return mode_; }
  std::size_t head_len() const { return head_len_; }
  std::size_t tail_len() const { return tail_len_; }
  std::size_t budget() const { return head_len_ + tail_len_; }
  std::string to_string() const;

  friend bool operator==(const TruncationStrategy&,
                         const TruncationStrategy&) = default;

 private:
  TruncationStrategy(Mode mode, std::size_t head_len, std::size_t tail_len)
      : mode_(mode), head_len_(head_len), tail_len_(tail_len) {}
  Mode mode_ = Mode::head;
  std::size_t head_len_ = 400;
  std::size_t tail_len_ = 0;
};

TokenSeq truncate(const TokenSeq& tokens, const TruncationStrategy& strategy);

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::optional<std::uint32_t> index_of(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Newline-delimited, line number = index.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct VocabOptions {
  std::size_t min_df = 2;
  std::size_t max_vocab = 10000;
  std::set<std::string> stopwords;
};

const std::set<std::string>& default_stopwords();

Vocabulary build_vocab(std::span<const TokenSeq> docs,
                       const VocabOptions& options);

// Sparse counts, entries sorted by index, every stored count >= 1.
struct BowVector {
  std::size_t vocab_size = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;

  std::size_t total() const;
  bool empty() const { return entries.empty(); }
  friend bool operator==(const BowVector&, const BowVector&) = default;
};

BowVector to_bow(const TokenSeq& tokens, const Vocabulary& vocab);

}  // namespace narrative
