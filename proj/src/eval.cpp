#include "narrative/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "narrative/error.hpp"

namespace narrative {
namespace {

std::vector<Label> predict_all(const TextClassifier& model,
                               std::span<const Document> docs) {
  std::vector<Label> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(model.predict(d));
  return out;
}

std::vector<Label> gold_of(std::span<const Document> docs) {
  std::vector<Label> out;
  for (const auto& d : docs) out.push_back(*d.label);
  return out;
}

std::size_t train_count(std::size_t n, double ratio,
                        const std::optional<std::size_t>& pinned) {
  const std::size_t k =
      pinned ? *pinned : static_cast<std::size_t>(std::lround(ratio * static_cast<double>(n)));
  return std::min(k, n);
}

std::string two(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

CvResult run_cv(std::span<const Document> dataset, const Trainer& trainer, int k,
                std::uint64_t seed) {
  CvResult result;
  result.folds = stratified_kfold(dataset, k, seed);
  std::vector<ConfusionMatrix> runs;
  for (int f = 0; f < k; ++f) {
    std::vector<Document> train, test;
    for (int g = 0; g < k; ++g) {
      for (std::size_t i : result.folds.folds[static_cast<std::size_t>(g)]) {
        (g == f ? test : train).push_back(dataset[i]);
      }
    }
    if (test.empty()) throw Error("fold " + std::to_string(f) + " has no documents");
    try {
      const auto model = trainer(train, seed);
      runs.push_back(confusion_matrix(gold_of(test), predict_all(*model, test)));
    } catch (const std::exception& e) {
      throw Error("fold " + std::to_string(f) + ": " + e.what());
    }
  }
  result.report = aggregate(runs);
  return result;
}

SplitPlan proportional_split_plan() {
  SplitPlan plan;
  plan.test_only[label_index(Label::MRE)] = true;
  return plan;
}

SplitPlan default_split_plan() {
  SplitPlan plan = proportional_split_plan();
  plan.fd_train[label_index(Label::Cons)] = 16;
  plan.added_train[label_index(Label::MRE)] = 114;
  return plan;
}

AugmentationSplit split_for_augmentation(std::span<const Document> docs,
                                         const SplitPlan& plan, std::uint64_t seed) {
  if (plan.ratio < 0 || plan.ratio > 1) throw Error("split ratio must lie in [0, 1]");
  std::array<std::vector<const Document*>, kNumClasses> original, added;
  for (const auto& d : docs) {
    if (!d.label) continue;
    (d.origin == Origin::fd ? original : added)[label_index(*d.label)].push_back(&d);
  }
  std::mt19937_64 rng(seed);
  AugmentationSplit out;
  std::vector<const Document*> extra, new_train, new_test;
  auto cut = [&](std::vector<const Document*>& pool, std::size_t n_train,
                 std::vector<const Document*>& train, std::vector<const Document*>& test) {
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; i < pool.size(); ++i) (i < n_train ? train : test).push_back(pool[i]);
  };
  std::vector<const Document*> imbalanced, test_six;
  for (Label l : kAllLabels) {
    const std::size_t c = label_index(l);
    if (l == plan.new_class) {
      std::vector<const Document*> all = original[c];
      all.insert(all.end(), added[c].begin(), added[c].end());
      cut(all, train_count(all.size(), plan.ratio, plan.added_train[c]), new_train, new_test);
      continue;
    }
    if (plan.test_only[c]) {
      cut(original[c], 0, imbalanced, test_six);
      cut(added[c], train_count(added[c].size(), plan.ratio, plan.added_train[c]),
          imbalanced, test_six);
    } else {
      cut(original[c], train_count(original[c].size(), plan.ratio, plan.fd_train[c]),
          imbalanced, test_six);
      std::shuffle(added[c].begin(), added[c].end(), rng);
      extra.insert(extra.end(), added[c].begin(), added[c].end());
    }
  }
  auto copy = [](const std::vector<const Document*>& src, std::vector<Document>& dst) {
    for (const Document* d : src) dst.push_back(*d);
  };
  copy(imbalanced, out.train_imbalanced);
  out.train_balanced = out.train_imbalanced;
  copy(extra, out.train_balanced);
  out.train_seven_class = out.train_balanced;
  copy(new_train, out.train_seven_class);
  copy(test_six, out.test_six_class);
  out.test_seven_class = out.test_six_class;
  copy(new_test, out.test_seven_class);
  return out;
}

std::string to_string(TrainVariant v) {
  switch (v) {
    case TrainVariant::imbalanced: return "imbalanced";
    case TrainVariant::balanced: return "balanced";
    case TrainVariant::seven_class: return "seven_class";
  }
  return "?";
}

std::string to_string(TestVariant v) {
  return v == TestVariant::six_class ? "six_class" : "seven_class";
}

TrainVariant parse_train_variant(const std::string& text) {
  for (auto v : {TrainVariant::imbalanced, TrainVariant::balanced, TrainVariant::seven_class}) {
    if (text == to_string(v)) return v;
  }
  throw Error("unknown training variant '" + text +
              "' (expected imbalanced, balanced or seven_class)");
}

TestVariant parse_test_variant(const std::string& text) {
  for (auto v : {TestVariant::six_class, TestVariant::seven_class}) {
    if (text == to_string(v)) return v;
  }
  throw Error("unknown test variant '" + text + "' (expected six_class or seven_class)");
}

MetricsReport run_augmentation_experiment(const AugmentationSplit& split,
                                          TrainVariant train, TestVariant test,
                                          const Trainer& trainer, std::size_t repeats,
                                          std::uint64_t seed) {
  const bool valid = (test == TestVariant::six_class && train != TrainVariant::seven_class) ||
                     (test == TestVariant::seven_class && train == TrainVariant::seven_class);
  if (!valid) {
    throw Error("training variant " + to_string(train) + " cannot be paired with test variant " +
                to_string(test));
  }
  if (repeats == 0) throw Error("repeats must be >= 1");
  const auto& train_docs = train == TrainVariant::imbalanced ? split.train_imbalanced
                           : train == TrainVariant::balanced ? split.train_balanced
                                                             : split.train_seven_class;
  const auto& test_docs =
      test == TestVariant::six_class ? split.test_six_class : split.test_seven_class;
  if (train_docs.empty() || test_docs.empty()) {
    throw Error("augmentation experiment: empty training or test set");
  }
  std::vector<ConfusionMatrix> runs;
  const std::vector<Label> gold = gold_of(test_docs);
  for (std::size_t r = 0; r < repeats; ++r) {
    try {
      const auto model = trainer(train_docs, seed + r);
      runs.push_back(confusion_matrix(gold, predict_all(*model, test_docs)));
    } catch (const std::exception& e) {
      throw Error("run " + std::to_string(r) + ": " + e.what());
    }
  }
  return aggregate(runs);
}

std::string render_markdown(const MetricsReport& report, const std::string& title) {
  std::ostringstream out;
  out << "## " << title << "\n\n";
  out << "Runs: " << report.n_runs << "\n\n";
  out << "| Model | Macro-F1 | Accuracy |";
  for (Label l : kAllLabels) out << " " << label_name(l) << " |";
  out << "\n|---|---|---|";
  for (std::size_t i = 0; i < kNumClasses; ++i) out << "---|";
  out << "\n| " << title << " | " << two(report.macro_f1) << " | " << two(report.accuracy)
      << " |";
  for (Label l : kAllLabels) {
    const std::size_t c = label_index(l);
    out << " " << (report.present[c] ? two(report.per_class_f1[c]) : std::string("-")) << " |";
  }
  out << "\n\n### Confusion matrix (rows: gold, columns: predicted)\n\n|  |";
  for (Label l : kAllLabels) out << " " << label_name(l) << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < kNumClasses; ++i) out << "---|";
  out << "\n";
  for (Label g : kAllLabels) {
    out << "| " << label_name(g) << " |";
    for (Label p : kAllLabels) {
      out << " " << report.confusion.counts[label_index(g)][label_index(p)] << " |";
    }
    out << "\n";
  }
  return out.str();
}

nlohmann::json report_to_json(const MetricsReport& report) {
  auto per_class = [&](const std::array<double, kNumClasses>& values) {
    nlohmann::json j = nlohmann::json::object();
    for (Label l : kAllLabels) {
      const std::size_t c = label_index(l);
      j[std::string(label_name(l))] =
          report.present[c] ? nlohmann::json(values[c]) : nlohmann::json(nullptr);
    }
    return j;
  };
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& row : report.confusion.counts) {
    confusion.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) {
    runs.push_back({{"accuracy", r.accuracy}, {"macro_f1", r.macro_f1}});
  }
  std::vector<std::string> classes;
  for (Label l : kAllLabels) classes.emplace_back(label_name(l));
  return {{"n_runs", report.n_runs},
          {"accuracy", report.accuracy},
          {"macro_f1", report.macro_f1},
          {"per_class_f1", per_class(report.per_class_f1)},
          {"per_class_recall", per_class(report.per_class_recall)},
          {"classes", classes},
          {"confusion", confusion},
          {"runs", runs}};
}

void write_report(const MetricsReport& report, const std::string& title,
                  const std::filesystem::path& path) {
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write report " + p.string());
    out << text;
    if (!out) throw Error("short write to report " + p.string());
  };
  std::filesystem::path md_path = path;
  std::filesystem::path json_path = path;
  json_path.replace_extension(".json");
  if (md_path == json_path) md_path.replace_extension(".md");
  write(md_path, render_markdown(report, title));
  write(json_path, report_to_json(report).dump(2) + "\n");
}

}  // namespace narrative
