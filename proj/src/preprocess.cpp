#include "narrative/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>

#include "narrative/error.hpp"

namespace narrative {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

// Decodes one UTF-8 sequence at `pos`. Malformed bytes decode as themselves
// with length 1 so that no input is ever lost or rejected.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len) {
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  unsigned char b0 = byte(pos);
  auto cont = [&](std::size_t i) {
    return i < s.size() && (byte(i) & 0xC0) == 0x80;
  };
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
    len = 2;
    return ((b0 & 0x1F) << 6) | (byte(pos + 1) & 0x3F);
  }
  if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
    len = 3;
    return ((b0 & 0x0F) << 12) | ((byte(pos + 1) & 0x3F) << 6) |
           (byte(pos + 2) & 0x3F);
  }
  if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
    len = 4;
    return ((b0 & 0x07) << 18) | ((byte(pos + 1) & 0x3F) << 12) |
           ((byte(pos + 2) & 0x3F) << 6) | (byte(pos + 3) & 0x3F);
  }
  len = 1;
  return b0;
}

// Emoji blocks plus the "Symbol, other" ranges that render as pictographs,
// and the joiners/selectors used to compose emoji sequences.
bool is_emoji(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) ||  // mahjong .. symbols ext-A
         (cp >= 0x2600 && cp <= 0x27BF) ||    // misc symbols, dingbats
         (cp >= 0x2300 && cp <= 0x23FF) ||    // misc technical
         (cp >= 0x2B00 && cp <= 0x2BFF) ||    // misc symbols and arrows
         (cp >= 0x2190 && cp <= 0x21FF) ||    // arrows
         (cp >= 0x25A0 && cp <= 0x25FF) ||    // geometric shapes
         (cp >= 0xFE00 && cp <= 0xFE0F) ||    // variation selectors
         (cp >= 0xE0020 && cp <= 0xE007F) ||  // tag sequences
         cp == 0x200D || cp == 0x20E3 || cp == 0x00A9 || cp == 0x00AE ||
         cp == 0x2122 || cp == 0x3030 || cp == 0x303D || cp == 0x3297 ||
         cp == 0x3299;
}

std::string strip_emoji(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (std::size_t i = 0; i < token.size();) {
    std::size_t len = 1;
    char32_t cp = decode_utf8(token, i, len);
    if (!is_emoji(cp)) out.append(token.substr(i, len));
    i += len;
  }
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) {
      return false;
    }
  }
  return true;
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

std::string_view skip_openers(std::string_view token) {
  while (!token.empty() && (token.front() == '(' || token.front() == '[' ||
                            token.front() == '{' || token.front() == '"' ||
                            token.front() == '\'')) {
    token.remove_prefix(1);
  }
  return token;
}

bool is_url(std::string_view t) {
  return starts_with_ci(t, "http://") || starts_with_ci(t, "https://") ||
         starts_with_ci(t, "www.");
}

// Multi-byte punctuation that commonly wraps words in social media text.
constexpr std::string_view kWidePunct[] = {"“", "”", "‘",
                                           "’", "…", "—",
                                           "–", "«", "»"};

bool strip_edge(std::string_view& t, bool front) {
  if (t.empty()) return false;
  unsigned char c = front ? t.front() : t.back();
  if (c < 0x80 && std::ispunct(c)) {
    front ? t.remove_prefix(1) : t.remove_suffix(1);
    return true;
  }
  for (std::string_view p : kWidePunct) {
    if (front ? t.starts_with(p) : t.ends_with(p)) {
      front ? t.remove_prefix(p.size()) : t.remove_suffix(p.size());
      return true;
    }
  }
  return false;
}

}  // namespace

CleanText clean(std::string_view text) {
  std::string out;
  for (std::string_view raw : split_ws(text)) {
    // Rules are tested on the emoji-free form too, otherwise "😷#vax" would
    // survive one pass and be removed by the next.
    std::string kept = strip_emoji(raw);
    for (std::string_view form : {raw, std::string_view(kept)}) {
      std::string_view core = skip_openers(form);
      if (is_url(core) ||
          (!core.empty() && (core.front() == '@' || core.front() == '#'))) {
        kept.clear();
        break;
      }
    }
    if (kept.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += kept;
  }
  return CleanText(std::move(out));
}

std::string fold_case(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

TokenSeq tokenize(const CleanText& text) {
  TokenSeq tokens;
  for (std::string_view t : split_ws(text.value())) {
    while (strip_edge(t, true)) {
    }
    while (strip_edge(t, false)) {
    }
    if (!t.empty()) tokens.push_back(fold_case(t));
  }
  return tokens;
}

TruncationStrategy TruncationStrategy::head(std::size_t n) {
  return {Mode::head, n, 0};
}

TruncationStrategy TruncationStrategy::tail(std::size_t n) {
  return {Mode::tail, 0, n};
}

TruncationStrategy TruncationStrategy::head_tail(std::size_t head_len,
                                                 std::size_t tail_len) {
  if (head_len == 0 || tail_len == 0) {
    throw Error("head_tail truncation needs both lengths > 0");
  }
  return {Mode::head_tail, head_len, tail_len};
}

TruncationStrategy TruncationStrategy::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error("truncation must look like head:N, tail:N or head_tail:N,M");
  }
  std::string_view mode = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);
  auto number = [&](std::string_view s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw Error("bad truncation length: " + std::string(s));
    }
    return v;
  };
  if (mode == "head") return head(number(rest));
  if (mode == "tail") return tail(number(rest));
  if (mode == "head_tail") {
    auto comma = rest.find(',');
    if (comma == std::string_view::npos) {
      throw Error("head_tail truncation needs two lengths");
    }
    return head_tail(number(rest.substr(0, comma)),
                     number(rest.substr(comma + 1)));
  }
  throw Error("unknown truncation mode: " + std::string(mode));
}

std::string TruncationStrategy::to_string() const {
  switch (mode_) {
    case Mode::head:
      return "head:" + std::to_string(head_len_);
    case Mode::tail:
      return "tail:" + std::to_string(tail_len_);
    case Mode::head_tail:
      return "head_tail:" + std::to_string(head_len_) + "," +
             std::to_string(tail_len_);
  }
  return {};
}

TokenSeq truncate(const TokenSeq& tokens, const TruncationStrategy& strategy) {
  if (tokens.size() <= strategy.budget()) return tokens;
  TokenSeq out;
  out.reserve(strategy.budget());
  out.insert(out.end(), tokens.begin(),
             tokens.begin() + static_cast<std::ptrdiff_t>(strategy.head_len()));
  out.insert(out.end(),
             tokens.end() - static_cast<std::ptrdiff_t>(strategy.tail_len()),
             tokens.end());
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw Error("empty token in vocabulary");
    auto [it, inserted] =
        index_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
    if (!inserted) throw Error("duplicate vocabulary token: " + tokens_[i]);
  }
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vocabulary: " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read vocabulary: " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",     "about", "after", "all",   "also",  "am",    "an",    "and",
      "any",   "are",   "as",    "at",    "be",    "been",  "before", "being",
      "but",   "by",    "can",   "could", "did",   "do",    "does",  "for",
      "from",  "had",   "has",   "have",  "he",    "her",   "here",  "him",
      "his",   "how",   "i",     "if",    "in",    "into",  "is",    "it",
      "its",   "just",  "me",    "more",  "my",    "no",    "not",   "now",
      "of",    "on",    "one",   "or",    "our",   "out",   "over",  "she",
      "so",    "some",  "than",  "that",  "the",   "their", "them",  "then",
      "there", "these", "they",  "this",  "those", "to",    "too",   "up",
      "us",    "very",  "was",   "we",    "were",  "what",  "when",  "where",
      "which", "who",   "why",   "will",  "with",  "would", "you",   "your"};
  return words;
}

Vocabulary build_vocab(std::span<const TokenSeq> docs,
                       const VocabOptions& options) {
  if (options.min_df < 1 || options.max_vocab < 1) {
    throw Error("build_vocab: min_df and max_vocab must be >= 1");
  }
  struct Stat {
    std::size_t df = 0;
    std::size_t tf = 0;
  };
  std::map<std::string, Stat> stats;
  for (const auto& doc : docs) {
    std::set<std::string_view> seen;
    for (const auto& tok : doc) {
      auto& s = stats[tok];
      ++s.tf;
      if (seen.insert(tok).second) ++s.df;
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (const auto& [tok, s] : stats) {
    if (s.df >= options.min_df && !options.stopwords.contains(tok)) {
      ranked.emplace_back(tok, s.tf);
    }
  }
  // std::map iteration is lexicographic, so a stable sort on frequency keeps
  // ties in lexicographic order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > options.max_vocab) ranked.resize(options.max_vocab);
  if (ranked.empty()) throw Error("build_vocab: resulting vocabulary is empty");
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, _] : ranked) tokens.push_back(std::move(tok));
  return Vocabulary(std::move(tokens));
}

std::size_t BowVector::total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : entries) n += c;
  return n;
}

BowVector to_bow(const TokenSeq& tokens, const Vocabulary& vocab) {
  BowVector bow;
  bow.vocab_size = vocab.size();
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& t : tokens) {
    if (auto idx = vocab.index_of(t)) ++counts[*idx];
  }
  bow.entries.assign(counts.begin(), counts.end());
  return bow;
}

}  // namespace narrative
