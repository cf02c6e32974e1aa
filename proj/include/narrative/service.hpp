#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "narrative/classifier.hpp"
#include "narrative/explain.hpp"

namespace narrative {

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

struct ServiceOptions {
  std::size_t max_text_bytes = 100 * 1024;
  ExplainOptions explain;
};

// Request handling without any networking, so it can be called directly.
// The model is never modified after construction.
class InferenceService {
 public:
  InferenceService(std::shared_ptr<const TextClassifier> model,
                   std::string model_version, ServiceOptions options = {});
  static InferenceService from_checkpoint(const std::filesystem::path& path,
                                          ServiceOptions options = {});

  // POST /classify with {"text": ..., "include_explanation": true, "id": ...}
  HttpReply classify(std::string_view request_body) const;
  HttpReply health() const;
  HttpReply model_info() const;

  const TextClassifier& model() const { return *model_; }
  const std::string& model_version() const { return version_; }

 private:
  std::shared_ptr<const TextClassifier> model_;
  std::string version_;
  ServiceOptions options_;
};

// cpp-httplib front end for an InferenceService.
class HttpServer {
 public:
  explicit HttpServer(const InferenceService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; port 0 picks a free one. Throws Error on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace narrative
