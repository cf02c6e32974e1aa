#include "narrative/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "narrative/augment.hpp"
#include "narrative/checkpoint.hpp"
#include "narrative/error.hpp"
#include "narrative/eval.hpp"
#include "narrative/explain.hpp"
#include "narrative/models.hpp"
#include "narrative/service.hpp"
#include "narrative/synthetic.hpp"

namespace narrative {
namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

fs::path default_checkpoint() {
  if (const char* home = std::getenv("NARRATIVE_CANTM_HOME"); home && *home) {
    return fs::path(home) / "model.ckpt";
  }
  return "model.ckpt";
}

std::string percent_cell(std::size_t count, int percent) {
  return std::to_string(count) + "(" + std::to_string(percent) + "%)";
}

struct ModelFlags {
  std::string model = "cantm";
  std::string encoder;
  std::string embeddings;
  std::string config;
  std::size_t epochs = 0;

  void add(CLI::App* app) {
    app->add_option("--model", model, "cantm, bow_lr, scholar or frozen_head")
        ->check(CLI::IsMember({"cantm", "bow_lr", "scholar", "frozen_head"}));
    app->add_option("--encoder", encoder, "CANTM text encoder")
        ->check(CLI::IsMember({"bow_mlp", "embed_avg", "external"}));
    app->add_option("--embeddings", embeddings,
                    "precomputed document vectors (external encoder, frozen_head)");
    app->add_option("--config", config, "JSON file with model settings");
    app->add_option("--epochs", epochs, "override the number of training epochs");
  }

  ModelSpec spec() const {
    ModelSpec s;
    s.kind = parse_model_kind(model);
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw Error("cannot open config " + config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw Error("config " + config + ": " + e.what());
      }
      apply_config(s, j);
    }
    if (!encoder.empty()) s.cantm.encoder.kind = parse_encoder_kind(encoder);
    if (epochs > 0) {
      s.cantm.epochs = s.scholar.epochs = s.frozen_head.epochs = epochs;
    }
    const bool needs_table = s.kind == ModelKind::frozen_head ||
                             (s.kind == ModelKind::cantm &&
                              s.cantm.encoder.kind == EncoderKind::external);
    if (!embeddings.empty()) {
      s.embeddings = std::make_shared<ExternalEmbeddings>(load_external_embeddings(embeddings));
    } else if (needs_table) {
      throw Error("--embeddings is required for this model");
    }
    return s;
  }
};

std::vector<Document> load_labeled(const std::string& path) {
  auto docs = load_dataset(path).documents;
  for (const auto& d : docs) {
    if (!d.label) throw Error(path + ": document '" + d.id + "' has no label");
  }
  return docs;
}

int cmd_stats(const std::string& data, std::ostream& out) {
  const auto loaded = load_dataset(data);
  const ClassDistribution dist = class_distribution(loaded.documents);
  const auto pct = dist.rounded_percent();
  out << "|  |";
  for (Label l : kAllLabels) out << " " << label_name(l) << " |";
  out << " Total |\n|---|";
  for (std::size_t i = 0; i <= kNumClasses; ++i) out << "---|";
  out << "\n| " << fs::path(data).filename().string() << " |";
  for (Label l : kAllLabels) {
    out << " " << percent_cell(dist.counts[label_index(l)], pct[label_index(l)]) << " |";
  }
  out << " " << dist.total << " |\n";
  if (loaded.skipped_empty) out << "skipped " << loaded.skipped_empty << " empty rows\n";
  return 0;
}

int cmd_train(const std::string& data, const ModelFlags& flags, std::uint64_t seed,
              fs::path checkpoint, std::ostream& out) {
  if (checkpoint.empty()) checkpoint = default_checkpoint();
  const auto docs = load_labeled(data);
  const auto model = train_model(flags.spec(), docs, seed);
  save_model(*model, checkpoint);
  out << "trained " << model->kind() << " on " << docs.size() << " documents\n";
  if (auto* cantm = dynamic_cast<const CantmModel*>(model.get())) {
    for (const auto& h : cantm->history()) {
      out << "epoch " << h.epoch << " loss " << h.train_loss.total << " dev macro-F1 "
          << h.dev_macro_f1 << "\n";
    }
  }
  out << "checkpoint " << checkpoint.string() << " (" << file_fingerprint(checkpoint) << ")\n";
  return 0;
}

int cmd_cv(const std::string& data, const ModelFlags& flags, int k, std::uint64_t seed,
           const std::string& out_path, std::ostream& out) {
  const auto docs = load_labeled(data);
  const ModelSpec spec = flags.spec();
  const CvResult cv = run_cv(
      docs, [&](std::span<const Document> train, std::uint64_t s) {
        return train_model(spec, train, s);
      },
      k, seed);
  if (out_path.empty()) {
    out << report_to_json(cv.report).dump(2) << "\n";
  } else {
    write_report(cv.report, flags.model + " (" + std::to_string(k) + "-fold CV)", out_path);
    out << render_markdown(cv.report, flags.model);
  }
  return 0;
}

int cmd_augment(const std::string& data, const ModelFlags& flags, const std::string& train,
                const std::string& test, const std::string& plan_name, std::size_t repeats,
                std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const auto docs = load_labeled(data);
  const SplitPlan plan =
      plan_name == "proportional" ? proportional_split_plan() : default_split_plan();
  const AugmentationSplit split = split_for_augmentation(docs, plan, seed);
  const ModelSpec spec = flags.spec();
  const MetricsReport report = run_augmentation_experiment(
      split, parse_train_variant(train), parse_test_variant(test),
      [&](std::span<const Document> d, std::uint64_t s) { return train_model(spec, d, s); },
      repeats, seed);
  const std::string title = "train " + train + " / test " + test;
  if (out_path.empty()) {
    out << report_to_json(report).dump(2) << "\n";
  } else {
    write_report(report, title, out_path);
    out << render_markdown(report, title);
  }
  return 0;
}

int cmd_classify(const fs::path& checkpoint, const std::string& text, const std::string& file,
                 bool with_explanation, std::ostream& out) {
  const auto model = load_model(checkpoint);
  std::vector<Document> docs;
  if (!file.empty()) {
    docs = load_dataset(file).documents;
  } else {
    Document d;
    d.id = "text";
    d.text = text;
    docs.push_back(std::move(d));
  }
  const auto* cantm = dynamic_cast<const CantmModel*>(model.get());
  for (const auto& d : docs) {
    if (with_explanation && cantm) {
      out << "id: " << d.id << "\n" << render_text(explain(d, *cantm)) << "\n";
      continue;
    }
    const ClassProbs p = model->predict_proba(d);
    out << d.id << "\t" << label_name(p.label());
    for (Label l : kAllLabels) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", p.probs[label_index(l)]);
      out << "\t" << label_name(l) << "=" << buf;
    }
    out << "\n";
  }
  return 0;
}

int cmd_match(const std::string& data, const std::string& rules_path,
              const std::string& existing_path, const std::string& out_path,
              std::ostream& out) {
  const std::vector<KeywordRule> rules =
      rules_path.empty() ? default_rules() : load_rules(rules_path);
  const auto docs = load_dataset(data).documents;
  std::vector<Document> existing;
  if (!existing_path.empty()) existing = load_dataset(existing_path).documents;
  const auto candidates = filter_candidates(docs, rules, existing);
  for (const auto& c : candidates) {
    out << c.document.id;
    for (const auto& [label, pattern] : c.match.matches) {
      out << "\t" << label_name(label) << ":" << pattern;
    }
    out << "\n";
  }
  if (!out_path.empty()) export_annotation_queue(candidates, out_path);
  out << candidates.size() << " candidates of " << docs.size() << " documents\n";
  return 0;
}

int cmd_dedup(const std::string& data, const std::string& out_path, std::ostream& out) {
  const auto loaded = load_dataset(data);
  const DedupResult result = deduplicate(loaded.documents);
  if (!out_path.empty()) save_jsonl(result.documents, out_path);
  out << "kept " << result.documents.size() << ", removed " << result.removed
      << " duplicates\n";
  return 0;
}

int cmd_serve(const fs::path& checkpoint, const std::string& host, int port,
              std::ostream& out) {
  const InferenceService service = InferenceService::from_checkpoint(checkpoint);
  HttpServer server(service);
  const int bound = server.bind(host, port);
  out << "serving " << service.model().kind() << " model " << service.model_version()
      << " on http://" << host << ":" << bound << std::endl;
  g_interrupted = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  server.listen();
  done = true;
  watcher.join();
  return 0;
}

int cmd_synth(std::size_t per_class, std::uint64_t seed, const std::string& out_path,
              std::ostream& out) {
  SyntheticSpec spec;
  spec.docs_per_class.fill(per_class);
  spec.seed = seed;
  const SyntheticCorpus corpus = generate_synthetic(spec);
  save_jsonl(corpus.documents, out_path);
  out << "wrote " << corpus.documents.size() << " documents to " << out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vaccine narrative classification with a classification-aware topic model",
               "narrative"};
  app.require_subcommand(1);

  std::string data, rules, existing, out_path, text, file, train_variant = "balanced",
                                                     test_variant = "six_class",
                                                     plan = "default", host = "127.0.0.1";
  std::string checkpoint;
  int k = 5, port = 8080;
  std::uint64_t seed = 1;
  std::size_t repeats = 5;
  bool with_explanation = false;
  ModelFlags flags;

  auto* stats = app.add_subcommand("stats", "class distribution of a dataset");
  stats->add_option("--data", data, "JSONL or CSV dataset")->required();

  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  train->add_option("--data", data, "labeled dataset")->required();
  train->add_option("--checkpoint", checkpoint, "output path");
  train->add_option("--seed", seed);
  flags.add(train);

  auto* cv = app.add_subcommand("cv", "stratified k-fold cross-validation");
  cv->add_option("--data", data, "labeled dataset")->required();
  cv->add_option("--k", k)->check(CLI::Range(2, 1000));
  cv->add_option("--seed", seed);
  cv->add_option("--out", out_path, "Markdown report path (JSON written alongside)");
  flags.add(cv);

  auto* aug = app.add_subcommand("augment-exp", "data-augmentation ablation");
  aug->add_option("--data", data, "dataset with origin fd/augmented")->required();
  aug->add_option("--train-variant", train_variant)
      ->check(CLI::IsMember({"imbalanced", "balanced", "seven_class"}));
  aug->add_option("--test-variant", test_variant)
      ->check(CLI::IsMember({"six_class", "seven_class"}));
  aug->add_option("--split", plan, "default or proportional")
      ->check(CLI::IsMember({"default", "proportional"}));
  aug->add_option("--repeats", repeats)->check(CLI::Range(1, 1000));
  aug->add_option("--seed", seed);
  aug->add_option("--out", out_path, "Markdown report path (JSON written alongside)");
  flags.add(aug);

  auto* classify = app.add_subcommand("classify", "label text with a trained model");
  classify->add_option("--checkpoint", checkpoint);
  auto* text_opt = classify->add_option("--text", text);
  auto* file_opt = classify->add_option("--file", file, "JSONL or CSV documents");
  text_opt->excludes(file_opt);
  classify->add_flag("--explain", with_explanation, "print the explanation report");

  auto* match = app.add_subcommand("match", "keyword/hashtag candidate collection");
  match->add_option("--data", data)->required();
  match->add_option("--rules", rules, "rule file (defaults to the built-in rules)");
  match->add_option("--existing", existing, "dataset to deduplicate against");
  match->add_option("--out", out_path, "annotation queue CSV");

  auto* dedup = app.add_subcommand("dedup", "drop duplicate posts");
  dedup->add_option("--data", data)->required();
  dedup->add_option("--out", out_path, "deduplicated JSONL");

  auto* serve = app.add_subcommand("serve", "HTTP inference service");
  serve->add_option("--checkpoint", checkpoint);
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));

  std::size_t per_class = 100;
  auto* synth = app.add_subcommand("synth", "write a synthetic labeled corpus");
  synth->add_option("--out", out_path, "JSONL output")->required();
  synth->add_option("--per-class", per_class)->check(CLI::Range(1, 1000000));
  synth->add_option("--seed", seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*stats) return cmd_stats(data, out);
    if (*train) return cmd_train(data, flags, seed, checkpoint, out);
    if (*cv) return cmd_cv(data, flags, k, seed, out_path, out);
    if (*aug) {
      return cmd_augment(data, flags, train_variant, test_variant, plan, repeats, seed,
                         out_path, out);
    }
    const fs::path ckpt = checkpoint.empty() ? default_checkpoint() : fs::path(checkpoint);
    if (*classify) {
      if (text.empty() && file.empty()) throw Error("classify needs --text or --file");
      return cmd_classify(ckpt, text, file, with_explanation, out);
    }
    if (*match) return cmd_match(data, rules, existing, out_path, out);
    if (*dedup) return cmd_dedup(data, out_path, out);
    if (*serve) return cmd_serve(ckpt, host, port, out);
    if (*synth) return cmd_synth(per_class, seed, out_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace narrative
