#include "narrative/service.hpp"

#include <httplib.h>

#include "narrative/baselines.hpp"
#include "narrative/cantm.hpp"
#include "narrative/checkpoint.hpp"
#include "narrative/error.hpp"
#include "narrative/models.hpp"

namespace narrative {
namespace {

HttpReply error_reply(int status, std::string message) {
  return {status, {{"error", std::move(message)}}};
}

// Cuts at most `limit` bytes without splitting a UTF-8 sequence.
std::string_view utf8_prefix(std::string_view text, std::size_t limit) {
  if (text.size() <= limit) return text;
  std::size_t end = limit;
  while (end > 0 && (static_cast<unsigned char>(text[end]) & 0xC0) == 0x80) --end;
  return text.substr(0, end);
}

const Featurizer* featurizer_of(const TextClassifier& m) {
  if (auto* p = dynamic_cast<const CantmModel*>(&m)) return &p->featurizer();
  if (auto* p = dynamic_cast<const BowLrModel*>(&m)) return &p->featurizer();
  if (auto* p = dynamic_cast<const ScholarModel*>(&m)) return &p->featurizer();
  return nullptr;
}

const ExternalEmbeddings* external_of(const TextClassifier& m) {
  if (auto* p = dynamic_cast<const CantmModel*>(&m)) return p->encoder().external().get();
  if (auto* p = dynamic_cast<const FrozenHeadModel*>(&m)) return p->embeddings().get();
  return nullptr;
}

nlohmann::json probabilities_json(const ClassProbs& p) {
  nlohmann::json j = nlohmann::json::object();
  for (Label l : kAllLabels) j[std::string(label_name(l))] = p.probs[label_index(l)];
  return j;
}

}  // namespace

InferenceService::InferenceService(std::shared_ptr<const TextClassifier> model,
                                   std::string model_version, ServiceOptions options)
    : model_(std::move(model)), version_(std::move(model_version)), options_(options) {
  if (!model_) throw Error("inference service needs a model");
}

InferenceService InferenceService::from_checkpoint(const std::filesystem::path& path,
                                                   ServiceOptions options) {
  std::shared_ptr<const TextClassifier> model = load_model(path);
  return {std::move(model), file_fingerprint(path), options};
}

HttpReply InferenceService::classify(std::string_view request_body) const {
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(request_body);
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }
  if (!request.is_object()) return error_reply(400, "request must be a JSON object");
  if (!request.contains("text") || !request["text"].is_string()) {
    return error_reply(400, "field 'text' (string) is required");
  }
  bool include_explanation = true;
  if (request.contains("include_explanation")) {
    if (!request["include_explanation"].is_boolean()) {
      return error_reply(400, "field 'include_explanation' must be a boolean");
    }
    include_explanation = request["include_explanation"].get<bool>();
  }
  if (request.contains("id") && !request["id"].is_string()) {
    return error_reply(400, "field 'id' must be a string");
  }

  try {
    const std::string& raw = request["text"].get_ref<const std::string&>();
    Document doc;
    doc.id = request.value("id", std::string("request"));
    doc.text = std::string(utf8_prefix(raw, options_.max_text_bytes));
    bool truncated = doc.text.size() < raw.size();

    const TokenSeq tokens = tokenize(clean(doc.text));
    if (tokens.empty()) return error_reply(422, "text is empty after cleaning");
    if (const Featurizer* f = featurizer_of(*model_)) {
      truncated = truncated || tokens.size() > f->truncation().budget();
    }
    if (const ExternalEmbeddings* table = external_of(*model_)) {
      if (!request.contains("id")) {
        return error_reply(422, "this model needs the document 'id' of a precomputed vector");
      }
      if (!table->vectors.contains(doc.id)) {
        return error_reply(422, "no precomputed vector for id '" + doc.id + "'");
      }
    }

    nlohmann::json body;
    ClassProbs probs;
    nlohmann::json explanation = nullptr;
    if (auto* cantm = dynamic_cast<const CantmModel*>(model_.get())) {
      const Explanation e = explain(doc, *cantm, options_.explain);
      probs = e.probabilities;
      if (include_explanation) explanation = to_json(e);
    } else {
      probs = model_->predict_proba(doc);
    }
    body["label"] = label_name(probs.label());
    body["probabilities"] = probabilities_json(probs);
    if (include_explanation) body["explanation"] = std::move(explanation);
    body["model_version"] = version_;
    body["truncated"] = truncated;
    return {200, std::move(body)};
  } catch (const std::exception&) {
    return error_reply(500, "internal error");
  }
}

HttpReply InferenceService::health() const {
  return {200, {{"status", "ok"}, {"model_version", version_}}};
}

HttpReply InferenceService::model_info() const {
  std::vector<std::string> classes;
  for (Label l : kAllLabels) classes.emplace_back(label_name(l));
  nlohmann::json body = {{"classes", classes},
                         {"model_kind", std::string(model_->kind())},
                         {"model_version", version_},
                         {"topics", nullptr},
                         {"class_topics", nullptr},
                         {"vocab_size", nullptr},
                         {"encoder", nullptr}};
  if (const Featurizer* f = featurizer_of(*model_)) body["vocab_size"] = f->vocab().size();
  if (auto* cantm = dynamic_cast<const CantmModel*>(model_.get())) {
    body["topics"] = cantm->config().topics;
    body["class_topics"] = cantm->config().class_topics;
    body["encoder"] = to_string(cantm->encoder().spec().kind);
  }
  return {200, std::move(body)};
}

struct HttpServer::Impl {
  explicit Impl(const InferenceService& s) : service(s) {}
  const InferenceService& service;
  httplib::Server server;
};

HttpServer::HttpServer(const InferenceService& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  const InferenceService& svc = impl_->service;
  impl_->server.set_payload_max_length(16 * 1024 * 1024);
  impl_->server.Post("/classify", [&svc, send](const httplib::Request& req,
                                                httplib::Response& res) {
    send(res, svc.classify(req.body));
  });
  impl_->server.Get("/health", [&svc, send](const httplib::Request&, httplib::Response& res) {
    send(res, svc.health());
  });
  impl_->server.Get("/model-info",
                    [&svc, send](const httplib::Request&, httplib::Response& res) {
                      send(res, svc.model_info());
                    });
  impl_->server.set_exception_handler(
      [send](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        send(res, error_reply(500, "internal error"));
      });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind to " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind to " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace narrative
