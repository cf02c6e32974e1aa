#include "narrative/models.hpp"

#include "narrative/checkpoint.hpp"
#include "narrative/error.hpp"

namespace narrative {
namespace {

using nlohmann::json;

json optimizer_to_json(const OptimizerConfig& o) {
  return {{"kind", to_string(o.kind)}, {"learning_rate", o.learning_rate},
          {"beta1", o.beta1},          {"beta2", o.beta2},
          {"epsilon", o.epsilon}};
}

OptimizerConfig optimizer_from_json(const json& j, OptimizerConfig o) {
  if (j.contains("kind")) o.kind = parse_optimizer(j.at("kind").get<std::string>());
  o.learning_rate = j.value("learning_rate", o.learning_rate);
  o.beta1 = j.value("beta1", o.beta1);
  o.beta2 = j.value("beta2", o.beta2);
  o.epsilon = j.value("epsilon", o.epsilon);
  return o;
}

json vocab_options_to_json(const VocabOptions& v) {
  return {{"min_df", v.min_df}, {"max_vocab", v.max_vocab},
          {"stopwords", std::vector<std::string>(v.stopwords.begin(), v.stopwords.end())}};
}

VocabOptions vocab_options_from_json(const json& j, VocabOptions v) {
  v.min_df = j.value("min_df", v.min_df);
  v.max_vocab = j.value("max_vocab", v.max_vocab);
  if (j.contains("stopwords")) {
    const auto words = j.at("stopwords").get<std::vector<std::string>>();
    v.stopwords = {words.begin(), words.end()};
  }
  return v;
}

TruncationStrategy truncation_from(const json& j, const char* key,
                                   TruncationStrategy fallback) {
  return j.contains(key) ? TruncationStrategy::parse(j.at(key).get<std::string>())
                         : fallback;
}

// Wraps JSON type errors so callers see which configuration failed.
template <class F>
auto config_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(std::string("invalid ") + what + " configuration: " + e.what());
  }
}

Checkpoint base(const char* kind, const Featurizer& f) {
  Checkpoint c;
  c.header["format"] = 1;
  c.header["kind"] = kind;
  c.header["vocab"] = f.vocab().tokens();
  c.header["truncation"] = f.truncation().to_string();
  return c;
}

Featurizer featurizer_from(const Checkpoint& c) {
  return {Vocabulary(c.header.at("vocab").get<std::vector<std::string>>()),
          TruncationStrategy::parse(c.header.at("truncation").get<std::string>())};
}

void put_embeddings(Checkpoint& c, const ExternalEmbeddings& table) {
  std::vector<std::string> ids;
  Matrix vectors(static_cast<Eigen::Index>(table.vectors.size()),
                 static_cast<Eigen::Index>(table.dim));
  Eigen::Index row = 0;
  for (const auto& [id, v] : table.vectors) {
    ids.push_back(id);
    vectors.row(row++) = v.transpose();
  }
  c.header["external_ids"] = ids;
  c.tensors["external.vectors"] = std::move(vectors);
}

std::shared_ptr<const ExternalEmbeddings> get_embeddings(const Checkpoint& c) {
  const auto ids = c.header.at("external_ids").get<std::vector<std::string>>();
  const Matrix& vectors = c.tensor("external.vectors");
  if (vectors.rows() != static_cast<Eigen::Index>(ids.size())) {
    throw Error("checkpoint: external id list does not match the vector table");
  }
  auto table = std::make_shared<ExternalEmbeddings>();
  table->dim = static_cast<std::size_t>(vectors.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    table->vectors.emplace(ids[i], vectors.row(static_cast<Eigen::Index>(i)).transpose());
  }
  return table;
}

template <class Params>
void put_params(Checkpoint& c, const std::string& prefix, const Params& p) {
  for (const auto& t : const_tensors(p)) c.tensors[prefix + t.name] = *t.value;
}

template <class Params>
void get_params(const Checkpoint& c, const std::string& prefix, Params& p) {
  for (auto& t : p.tensors()) *t.value = c.tensor(prefix + t.name);
}

json history_to_json(const std::vector<EpochLog>& history) {
  json out = json::array();
  for (const auto& h : history) {
    out.push_back({{"epoch", h.epoch},
                   {"train_loss", h.train_loss.total},
                   {"dev_macro_f1", h.dev_macro_f1}});
  }
  return out;
}

std::vector<EpochLog> history_from_json(const json& j) {
  std::vector<EpochLog> out;
  for (const auto& e : j) {
    EpochLog h;
    h.epoch = e.at("epoch").get<std::size_t>();
    h.train_loss.total = e.at("train_loss").get<double>();
    h.dev_macro_f1 = e.at("dev_macro_f1").get<double>();
    out.push_back(h);
  }
  return out;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::cantm: return "cantm";
    case ModelKind::bow_lr: return "bow_lr";
    case ModelKind::scholar: return "scholar";
    case ModelKind::frozen_head: return "frozen_head";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& text) {
  for (ModelKind k : {ModelKind::cantm, ModelKind::bow_lr, ModelKind::scholar,
                      ModelKind::frozen_head}) {
    if (text == to_string(k)) return k;
  }
  throw Error("unknown model kind '" + text +
              "' (expected cantm, bow_lr, scholar or frozen_head)");
}

json config_to_json(const CantmConfig& c) {
  const auto& w = c.loss.weights;
  return {{"topics", c.topics},
          {"class_topics", c.class_topics},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"optimizer", optimizer_to_json(c.optimizer)},
          {"seed", c.seed},
          {"loss_weights",
           {{"recon_m1", w.recon_m1}, {"kl_m1", w.kl_m1}, {"ce_m1", w.ce_m1},
            {"recon_clsdec", w.recon_clsdec}, {"recon_m2", w.recon_m2},
            {"kl_m2", w.kl_m2}, {"ce_m2", w.ce_m2}}},
          {"m2_teacher_forcing", c.loss.m2_teacher_forcing},
          {"dev_fraction", c.dev_fraction},
          {"truncation", c.truncation.to_string()},
          {"vocab", vocab_options_to_json(c.vocab)},
          {"encoder",
           {{"kind", to_string(c.encoder.kind)},
            {"dim", c.encoder.dim},
            {"learned_attention", c.encoder.learned_attention}}}};
}

CantmConfig cantm_config_from_json(const json& j) {
  return config_guard("cantm", [&] {
    CantmConfig c;
    c.topics = j.value("topics", c.topics);
    c.class_topics = j.value("class_topics", c.class_topics);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    if (j.contains("optimizer")) c.optimizer = optimizer_from_json(j.at("optimizer"), c.optimizer);
    c.seed = j.value("seed", c.seed);
    if (j.contains("loss_weights")) {
      const auto& lw = j.at("loss_weights");
      auto& w = c.loss.weights;
      w.recon_m1 = lw.value("recon_m1", w.recon_m1);
      w.kl_m1 = lw.value("kl_m1", w.kl_m1);
      w.ce_m1 = lw.value("ce_m1", w.ce_m1);
      w.recon_clsdec = lw.value("recon_clsdec", w.recon_clsdec);
      w.recon_m2 = lw.value("recon_m2", w.recon_m2);
      w.kl_m2 = lw.value("kl_m2", w.kl_m2);
      w.ce_m2 = lw.value("ce_m2", w.ce_m2);
    }
    c.loss.m2_teacher_forcing = j.value("m2_teacher_forcing", c.loss.m2_teacher_forcing);
    c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
    c.truncation = truncation_from(j, "truncation", c.truncation);
    if (j.contains("vocab")) c.vocab = vocab_options_from_json(j.at("vocab"), c.vocab);
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      if (e.contains("kind")) c.encoder.kind = parse_encoder_kind(e.at("kind").get<std::string>());
      c.encoder.dim = e.value("dim", c.encoder.dim);
      c.encoder.learned_attention = e.value("learned_attention", c.encoder.learned_attention);
    }
    return c;
  });
}

json config_to_json(const BowLrConfig& c) {
  return {{"l2", c.l2},
          {"max_iterations", c.max_iterations},
          {"tolerance", c.tolerance},
          {"init_scale", c.init_scale},
          {"seed", c.seed},
          {"truncation", c.truncation.to_string()},
          {"vocab", vocab_options_to_json(c.vocab)}};
}

BowLrConfig bow_lr_config_from_json(const json& j) {
  return config_guard("bow_lr", [&] {
    BowLrConfig c;
    c.l2 = j.value("l2", c.l2);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.init_scale = j.value("init_scale", c.init_scale);
    c.seed = j.value("seed", c.seed);
    c.truncation = truncation_from(j, "truncation", c.truncation);
    if (j.contains("vocab")) c.vocab = vocab_options_from_json(j.at("vocab"), c.vocab);
    return c;
  });
}

json config_to_json(const ScholarConfig& c) {
  return {{"embedding_dim", c.embedding_dim},
          {"topics", c.topics},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"optimizer", optimizer_to_json(c.optimizer)},
          {"seed", c.seed},
          {"dev_fraction", c.dev_fraction},
          {"truncation", c.truncation.to_string()},
          {"vocab", vocab_options_to_json(c.vocab)}};
}

ScholarConfig scholar_config_from_json(const json& j) {
  return config_guard("scholar", [&] {
    ScholarConfig c;
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.topics = j.value("topics", c.topics);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    if (j.contains("optimizer")) c.optimizer = optimizer_from_json(j.at("optimizer"), c.optimizer);
    c.seed = j.value("seed", c.seed);
    c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
    c.truncation = truncation_from(j, "truncation", c.truncation);
    if (j.contains("vocab")) c.vocab = vocab_options_from_json(j.at("vocab"), c.vocab);
    return c;
  });
}

json config_to_json(const FrozenHeadConfig& c) {
  return {{"hidden", c.hidden},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"optimizer", optimizer_to_json(c.optimizer)},
          {"seed", c.seed}};
}

FrozenHeadConfig frozen_head_config_from_json(const json& j) {
  return config_guard("frozen_head", [&] {
    FrozenHeadConfig c;
    c.hidden = j.value("hidden", c.hidden);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    if (j.contains("optimizer")) c.optimizer = optimizer_from_json(j.at("optimizer"), c.optimizer);
    c.seed = j.value("seed", c.seed);
    return c;
  });
}

void apply_config(ModelSpec& spec, const json& j) {
  if (!j.is_object()) throw Error("model configuration must be a JSON object");
  // Each section overlays the current values, so round-trip through JSON.
  auto overlay = [&](const char* key, auto& cfg, auto parse) {
    if (!j.contains(key)) return;
    json merged = config_to_json(cfg);
    merged.merge_patch(j.at(key));
    cfg = parse(merged);
  };
  overlay("cantm", spec.cantm, cantm_config_from_json);
  overlay("bow_lr", spec.bow_lr, bow_lr_config_from_json);
  overlay("scholar", spec.scholar, scholar_config_from_json);
  overlay("frozen_head", spec.frozen_head, frozen_head_config_from_json);
}

std::unique_ptr<TextClassifier> train_model(const ModelSpec& spec,
                                            std::span<const Document> train,
                                            std::uint64_t seed) {
  switch (spec.kind) {
    case ModelKind::cantm: {
      CantmConfig c = spec.cantm;
      c.seed = seed;
      return train_cantm(train, c, spec.embeddings);
    }
    case ModelKind::bow_lr: {
      BowLrConfig c = spec.bow_lr;
      c.seed = seed;
      return train_bow_lr(train, c);
    }
    case ModelKind::scholar: {
      ScholarConfig c = spec.scholar;
      c.seed = seed;
      return train_scholar(train, c);
    }
    case ModelKind::frozen_head: {
      FrozenHeadConfig c = spec.frozen_head;
      c.seed = seed;
      return train_frozen_head(train, spec.embeddings, c);
    }
  }
  throw Error("unknown model kind");
}

void save_model(const TextClassifier& model, const std::filesystem::path& path) {
  Checkpoint c;
  if (auto* m = dynamic_cast<const CantmModel*>(&model)) {
    c = base("cantm", m->featurizer());
    c.header["config"] = config_to_json(m->config());
    c.header["history"] = history_to_json(m->history());
    put_params(c, "", m->params());
    if (m->encoder().spec().kind == EncoderKind::external) {
      put_embeddings(c, *m->encoder().external());
    } else {
      put_params(c, "", m->encoder().params());
    }
  } else if (auto* m = dynamic_cast<const BowLrModel*>(&model)) {
    c = base("bow_lr", m->featurizer());
    c.header["l2"] = m->l2();
    put_params(c, "lr.", m->params());
  } else if (auto* m = dynamic_cast<const ScholarModel*>(&model)) {
    c = base("scholar", m->featurizer());
    c.header["config"] = config_to_json(m->config());
    put_params(c, "scholar.", m->params());
  } else if (auto* m = dynamic_cast<const FrozenHeadModel*>(&model)) {
    c.header["format"] = 1;
    c.header["kind"] = "frozen_head";
    put_params(c, "head.", m->params());
    put_embeddings(c, *m->embeddings());
  } else {
    throw Error("save_model: unsupported model kind '" + std::string(model.kind()) + "'");
  }
  write_checkpoint(c, path);
}

std::unique_ptr<TextClassifier> load_model(const std::filesystem::path& path) {
  const Checkpoint c = read_checkpoint(path);
  const std::string where = "checkpoint " + path.string() + ": ";
  try {
    if (c.header.value("format", 0) != 1) throw Error("unsupported format version");
    const ModelKind kind = parse_model_kind(c.header.at("kind").get<std::string>());
    switch (kind) {
      case ModelKind::cantm: {
        const CantmConfig config = cantm_config_from_json(c.header.at("config"));
        Featurizer f = featurizer_from(c);
        Encoder encoder;
        if (config.encoder.kind == EncoderKind::external) {
          encoder = Encoder::from_external(get_embeddings(c));
        } else {
          EncoderParams ep;
          for (const char* name : {"encoder.w", "encoder.b", "encoder.embedding",
                                   "encoder.attention"}) {
            auto it = c.tensors.find(name);
            if (it == c.tensors.end()) continue;
            const std::string n = name;
            if (n == "encoder.w") ep.w = it->second;
            else if (n == "encoder.b") ep.b = it->second;
            else if (n == "encoder.embedding") ep.embedding = it->second;
            else ep.attention = it->second;
          }
          encoder = Encoder::from_params(config.encoder, f.vocab().size(), std::move(ep));
        }
        CantmParams p;
        get_params(c, "", p);
        auto model = std::make_unique<CantmModel>(config, std::move(f),
                                                  std::move(encoder), std::move(p));
        if (c.header.contains("history")) {
          model->set_history(history_from_json(c.header.at("history")));
        }
        return model;
      }
      case ModelKind::bow_lr: {
        LinearParams p;
        get_params(c, "lr.", p);
        return std::make_unique<BowLrModel>(featurizer_from(c), std::move(p),
                                            c.header.at("l2").get<double>());
      }
      case ModelKind::scholar: {
        ScholarParams p;
        get_params(c, "scholar.", p);
        return std::make_unique<ScholarModel>(
            scholar_config_from_json(c.header.at("config")), featurizer_from(c),
            std::move(p));
      }
      case ModelKind::frozen_head: {
        FrozenHeadParams p;
        get_params(c, "head.", p);
        return std::make_unique<FrozenHeadModel>(get_embeddings(c), std::move(p));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + e.what());
  } catch (const Error& e) {
    throw Error(where + e.what());
  }
  throw Error(where + "unknown model kind");
}

}  // namespace narrative
