#include "narrative/augment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <unordered_set>

#include "narrative/csv.hpp"
#include "narrative/error.hpp"
#include "narrative/preprocess.hpp"

namespace narrative {
namespace {

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || u == '_';
}

// Lowercases and collapses whitespace runs so that phrase keywords match
// across line breaks and double spaces.
std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool boundary_before(const std::string& text, std::size_t pos) {
  return pos == 0 || !is_word_byte(text[pos - 1]);
}

bool boundary_after(const std::string& text, std::size_t end) {
  return end >= text.size() || !is_word_byte(text[end]);
}

bool contains_keyword(const std::string& text, const std::string& phrase) {
  if (phrase.empty()) return false;
  for (auto pos = text.find(phrase); pos != std::string::npos;
       pos = text.find(phrase, pos + 1)) {
    if (boundary_before(text, pos) && boundary_after(text, pos + phrase.size())) {
      return true;
    }
  }
  return false;
}

bool contains_hashtag(const std::string& text, const std::string& tag) {
  const std::string needle = "#" + tag;
  for (auto pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + 1)) {
    if (boundary_before(text, pos) && boundary_after(text, pos + needle.size())) {
      return true;
    }
  }
  return false;
}

std::string strip_hash(std::string_view tag) {
  while (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
  return std::string(tag);
}

}  // namespace

const std::vector<KeywordRule>& default_rules() {
  static const std::vector<KeywordRule> rules = {
      {Label::Cons,
       {"QAnon", "new world order", "nano", "ID2020", "deep state",
        "China weapon", "China DNA", "5g"},
       {}},
      {Label::LF,
       {"medical dictatorship", "mandatory"},
       {"#freedom", "#liberty", "#NoVaccineForMe", "#MyBodyMyChoice",
        "#InformedConsent", "#MandatoryVaccine", "#MedicalFreedom",
        "#NoJabNoPay"}},
      {Label::MRE,
       {"fetal", "fetus", "fetuses", "Mark of the beast", "guinea pig",
        "guinea pigs", "lab rat", "lab rats", "DNA", "mRNA", "medical ethics"},
       {}},
      {Label::AnimalVac,
       {"Feline Panleukopenia", "Feline Herpesvirus", "Feline Calicivirus",
        "Feline Leukaemia Virus", "Canine Distemper Virus", "Canine Parvovirus",
        "Canine Adenovirus", "Canine Rabies"},
       {"#animalhealth", "#animalwelfare", "#WorldAnimalVaccinationDay",
        "#petmedicine", "#vetmedicine"}},
  };
  return rules;
}

std::vector<KeywordRule> parse_rules(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("rules: expected a JSON object keyed by class");
  std::vector<KeywordRule> rules;
  for (const auto& [name, body] : j.items()) {
    auto label = parse_label(name);
    if (!label) throw Error("rules: unknown class '" + name + "'");
    KeywordRule rule{*label, {}, {}};
    auto list = [&](const char* key) {
      std::vector<std::string> out;
      if (!body.contains(key)) return out;
      for (const auto& v : body.at(key)) {
        if (!v.is_string() || v.get<std::string>().empty()) {
          throw Error("rules: class '" + name + "' has a non-string or empty " +
                      key + " entry");
        }
        out.push_back(v.get<std::string>());
      }
      return out;
    };
    rule.keywords = list("keywords");
    rule.hashtags = list("hashtags");
    if (rule.keywords.empty() && rule.hashtags.empty()) {
      throw Error("rules: class '" + name + "' has no keywords or hashtags");
    }
    rules.push_back(std::move(rule));
  }
  std::stable_sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) {
    return label_index(a.target_class) < label_index(b.target_class);
  });
  return rules;
}

std::vector<KeywordRule> load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rules file: " + path.string());
  try {
    return parse_rules(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("rules file " + path.string() + ": " + e.what());
  }
}

nlohmann::json rules_to_json(std::span<const KeywordRule> rules) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& r : rules) {
    out[std::string(label_name(r.target_class))] = {{"keywords", r.keywords},
                                                    {"hashtags", r.hashtags}};
  }
  return nlohmann::json::parse(out.dump());
}

std::vector<Label> MatchResult::suggested_classes() const {
  std::set<std::size_t> seen;
  for (const auto& [label, _] : matches) seen.insert(label_index(label));
  std::vector<Label> out;
  for (auto i : seen) out.push_back(label_from_index(i));
  return out;
}

MatchResult match_rules(const Document& doc, std::span<const KeywordRule> rules) {
  MatchResult result;
  result.doc_id = doc.id;
  const std::string text = normalize(doc.content());
  for (const auto& rule : rules) {
    for (const auto& kw : rule.keywords) {
      if (contains_keyword(text, normalize(kw))) {
        result.matches.emplace_back(rule.target_class, kw);
      }
    }
    for (const auto& tag : rule.hashtags) {
      if (contains_hashtag(text, normalize(strip_hash(tag)))) {
        result.matches.emplace_back(rule.target_class, tag);
      }
    }
  }
  return result;
}

std::vector<Candidate> filter_candidates(std::span<const Document> docs,
                                         std::span<const KeywordRule> rules,
                                         std::span<const Document> existing) {
  std::unordered_set<std::string> seen;
  for (const auto& d : existing) seen.insert(duplicate_key(d));
  std::vector<Candidate> out;
  for (const auto& d : docs) {
    MatchResult m = match_rules(d, rules);
    if (m.empty()) continue;
    if (!seen.insert(duplicate_key(d)).second) continue;
    out.push_back({d, std::move(m)});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.document.id < b.document.id;
  });
  return out;
}

void export_annotation_queue(std::span<const Candidate> candidates,
                             const std::filesystem::path& path) {
  if (candidates.empty()) throw Error("annotation queue: no candidates to export");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write annotation queue: " + path.string());
  csv::write_row(out, {"id", "text", "suggested_classes", "label"});
  for (const auto& c : candidates) {
    std::string suggested;
    for (Label l : c.match.suggested_classes()) {
      if (!suggested.empty()) suggested += ';';
      suggested += label_name(l);
    }
    csv::write_row(out, {c.document.id, c.document.content(), suggested, ""});
  }
}

std::vector<Document> import_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open annotation file: " + path.string());
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw Error(path.string() + ": empty annotation file");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->fields.size(); ++i) {
    col[fold_case(header->fields[i])] = i;
  }
  for (const char* required : {"id", "text", "label"}) {
    if (!col.contains(required)) {
      throw Error(path.string() + ": missing column '" + required + "'");
    }
  }
  std::vector<Document> docs;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    std::string where = path.filename().string() + ":" + std::to_string(row->line);
    if (row->fields.size() != header->fields.size()) {
      throw Error(where + ": wrong column count");
    }
    const std::string& raw_label = row->fields[col["label"]];
    auto label = parse_label(raw_label);
    if (!label) {
      throw Error(where + (raw_label.empty()
                               ? std::string(": row is not labeled")
                               : ": unknown label '" + raw_label + "'"));
    }
    Document d;
    d.id = row->fields[col["id"]];
    d.text = row->fields[col["text"]];
    d.label = *label;
    d.origin = Origin::augmented;
    docs.push_back(std::move(d));
  }
  return docs;
}

BalanceReport balance_report(const std::array<std::size_t, kNumClasses>& current,
                             const std::array<std::size_t, kNumClasses>& targets) {
  BalanceReport r;
  r.current = current;
  r.target = targets;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    r.deficit[c] = targets[c] > current[c] ? targets[c] - current[c] : 0;
  }
  return r;
}

BalanceReport balance_report(std::span<const Document> dataset,
                             const std::array<std::size_t, kNumClasses>& targets) {
  return balance_report(class_distribution(dataset).counts, targets);
}

}  // namespace narrative
