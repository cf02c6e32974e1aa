#include "narrative/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

#include "narrative/csv.hpp"
#include "narrative/error.hpp"
#include "narrative/preprocess.hpp"

namespace narrative {
namespace {

constexpr std::array<std::string_view, 5> kPlatforms = {
    "twitter", "facebook", "instagram", "news", "other"};
constexpr std::array<std::string_view, 3> kOrigins = {"fd", "augmented",
                                                      "unlabeled"};

std::string row_ref(const std::filesystem::path& path, std::size_t line) {
  return path.filename().string() + ":" + std::to_string(line);
}

struct RawRow {
  std::string id;
  std::optional<std::string> text;
  std::optional<std::string> platform;
  std::optional<std::string> label;
  std::optional<std::string> origin;
  std::optional<std::string> alt_text;
};

std::optional<std::string> json_string(const nlohmann::json& obj,
                                       const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(where + ": field '" + key + "' must be a string or null");
  }
  return it->get<std::string>();
}

std::optional<Document> to_document(const RawRow& raw, const std::string& where) {
  if (raw.id.empty()) throw Error(where + ": missing id");
  Document doc;
  doc.id = raw.id;
  doc.text = raw.text.value_or("");
  doc.alt_text = raw.alt_text;
  if (raw.platform) {
    auto p = parse_platform(*raw.platform);
    if (!p) throw Error(where + ": unknown platform '" + *raw.platform + "'");
    doc.platform = *p;
  }
  if (raw.label) {
    auto l = parse_label(*raw.label);
    if (!l) throw Error(where + ": unknown label '" + *raw.label + "'");
    doc.label = *l;
  }
  if (raw.origin) {
    auto o = parse_origin(*raw.origin);
    if (!o) throw Error(where + ": unknown origin '" + *raw.origin + "'");
    doc.origin = *o;
  } else {
    doc.origin = doc.label ? Origin::fd : Origin::unlabeled;
  }
  auto blank = [](const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
  };
  if (blank(doc.text) && (!doc.alt_text || blank(*doc.alt_text))) {
    return std::nullopt;
  }
  return doc;
}

RawRow raw_from_json(const nlohmann::json& obj, const std::string& where) {
  if (!obj.is_object()) throw Error(where + ": expected a JSON object");
  RawRow raw;
  auto id = obj.find("id");
  if (id != obj.end() && id->is_string()) {
    raw.id = id->get<std::string>();
  } else if (id != obj.end() && id->is_number_integer()) {
    raw.id = std::to_string(id->get<long long>());
  }
  raw.text = json_string(obj, "text", where);
  raw.platform = json_string(obj, "platform", where);
  raw.label = json_string(obj, "label", where);
  raw.origin = json_string(obj, "origin", where);
  raw.alt_text = json_string(obj, "alt_text", where);
  return raw;
}

}  // namespace

std::optional<Document> document_from_json(const nlohmann::json& obj,
                                           const std::string& where) {
  return to_document(raw_from_json(obj, where), where);
}

std::string_view to_string(Platform p) {
  return kPlatforms[static_cast<std::size_t>(p)];
}

std::string_view to_string(Origin o) {
  return kOrigins[static_cast<std::size_t>(o)];
}

std::optional<Platform> parse_platform(std::string_view text) {
  for (std::size_t i = 0; i < kPlatforms.size(); ++i) {
    if (fold_case(text) == kPlatforms[i]) return static_cast<Platform>(i);
  }
  return std::nullopt;
}

std::optional<Origin> parse_origin(std::string_view text) {
  for (std::size_t i = 0; i < kOrigins.size(); ++i) {
    if (fold_case(text) == kOrigins[i]) return static_cast<Origin>(i);
  }
  return std::nullopt;
}

std::string Document::content() const {
  if (!alt_text || alt_text->empty()) return text;
  if (text.empty()) return *alt_text;
  return text + " " + *alt_text;
}

nlohmann::json to_json(const Document& doc) {
  nlohmann::json j;
  j["id"] = doc.id;
  j["text"] = doc.text;
  j["platform"] = to_string(doc.platform);
  j["label"] = doc.label ? nlohmann::json(label_name(*doc.label))
                         : nlohmann::json(nullptr);
  j["origin"] = to_string(doc.origin);
  j["alt_text"] =
      doc.alt_text ? nlohmann::json(*doc.alt_text) : nlohmann::json(nullptr);
  return j;
}

DataFormat format_for(const std::filesystem::path& path) {
  return fold_case(path.extension().string()) == ".csv" ? DataFormat::csv
                                                        : DataFormat::jsonl;
}

LoadResult load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, format_for(path));
}

LoadResult load_dataset(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset: " + path.string());
  LoadResult result;
  std::unordered_set<std::string> ids;
  auto accept = [&](const RawRow& raw, std::size_t line) {
    std::string where = row_ref(path, line);
    auto doc = to_document(raw, where);
    if (!doc) {
      ++result.skipped_empty;
      return;
    }
    if (!ids.insert(doc->id).second) {
      throw Error(where + ": duplicate id '" + doc->id + "'");
    }
    result.documents.push_back(std::move(*doc));
  };

  if (format == DataFormat::jsonl) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (std::all_of(line.begin(), line.end(),
                      [](unsigned char c) { return std::isspace(c); })) {
        continue;
      }
      std::string where = row_ref(path, line_no);
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(where + ": malformed JSON (" + e.what() + ")");
      }
      accept(raw_from_json(obj, where), line_no);
    }
    return result;
  }

  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw Error(path.string() + ": empty CSV, header row required");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->fields.size(); ++i) {
    col[fold_case(header->fields[i])] = i;
  }
  for (const char* required : {"id", "text", "platform", "label", "origin",
                               "alt_text"}) {
    if (!col.contains(required)) {
      throw Error(path.string() + ": CSV header missing column '" + required +
                  "'");
    }
  }
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    if (row->fields.size() != header->fields.size()) {
      throw Error(row_ref(path, row->line) + ": expected " +
                  std::to_string(header->fields.size()) + " columns, got " +
                  std::to_string(row->fields.size()));
    }
    auto field = [&](const char* name) -> std::optional<std::string> {
      const std::string& v = row->fields[col[name]];
      if (v.empty()) return std::nullopt;
      return v;
    };
    RawRow raw;
    raw.id = field("id").value_or("");
    raw.text = field("text");
    raw.platform = field("platform");
    raw.label = field("label");
    raw.origin = field("origin");
    raw.alt_text = field("alt_text");
    accept(raw, row->line);
  }
  return result;
}

void save_jsonl(std::span<const Document> docs,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset: " + path.string());
  for (const auto& d : docs) out << to_json(d).dump() << '\n';
}

std::string duplicate_key(const Document& doc) {
  return fold_case(clean(doc.content()).value());
}

DedupResult deduplicate(std::span<const Document> docs) {
  DedupResult result;
  std::unordered_set<std::string> seen;
  for (const auto& d : docs) {
    if (seen.insert(duplicate_key(d)).second) {
      result.documents.push_back(d);
    } else {
      ++result.removed;
    }
  }
  return result;
}

std::array<int, kNumClasses> ClassDistribution::rounded_percent() const {
  std::array<int, kNumClasses> out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out[c] = static_cast<int>(std::lround(proportions[c] * 100.0));
  }
  return out;
}

ClassDistribution distribution_from_counts(
    const std::array<std::size_t, kNumClasses>& counts) {
  ClassDistribution dist;
  dist.counts = counts;
  for (auto c : counts) dist.total += c;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    dist.proportions[c] =
        dist.total ? static_cast<double>(counts[c]) / dist.total : 0.0;
  }
  return dist;
}

ClassDistribution class_distribution(std::span<const Document> docs) {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& d : docs) {
    if (!d.label) {
      throw Error("class_distribution: document '" + d.id + "' is unlabeled");
    }
    ++counts[label_index(*d.label)];
  }
  return distribution_from_counts(counts);
}

FoldAssignment stratified_kfold(std::span<const Document> docs, int k,
                                std::uint64_t seed) {
  if (k < 2) throw Error("stratified_kfold: k must be >= 2");
  FoldAssignment out;
  out.k = k;
  out.folds.resize(static_cast<std::size_t>(k));
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].label) by_class[label_index(*docs[i].label)].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::size_t next_fold = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t pos : members) {
      out.folds[next_fold].push_back(pos);
      out.fold_of[docs[pos].id] = static_cast<int>(next_fold);
      next_fold = (next_fold + 1) % static_cast<std::size_t>(k);
    }
  }
  for (auto& f : out.folds) std::sort(f.begin(), f.end());
  return out;
}

}  // namespace narrative
