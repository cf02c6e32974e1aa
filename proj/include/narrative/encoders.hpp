#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "narrative/features.hpp"
#include "narrative/nn.hpp"

namespace narrative {

enum class EncoderKind { bow_mlp, embed_avg, external };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(const std::string& text);

struct EncoderSpec {
  EncoderKind kind = EncoderKind::bow_mlp;
  std::size_t dim = 500;
  bool learned_attention = true;  // embed_avg only
};

struct EncodedText {
  Vector h;
  // (token, weight), weights sum to 1; embed_avg only.
  std::optional<std::vector<std::pair<std::string, double>>> attention;
};

// Precomputed document vectors keyed by document id.
struct ExternalEmbeddings {
  std::size_t dim = 0;
  std::map<std::string, Vector> vectors;

  const Vector& at(const std::string& id) const;
};

// Header line "id <dim>" (or "<rows> <dim>"), then "<id> v1 ... v_dim" per
// whitespace-separated row.
ExternalEmbeddings load_external_embeddings(const std::filesystem::path& path);

// Learnable blocks; only those used by the encoder kind are non-empty.
struct EncoderParams {
  Matrix w;          // bow_mlp: V x D_h
  Matrix b;          // bow_mlp: 1 x D_h
  Matrix embedding;  // embed_avg: (V + 1) x D_h, last row is the OOV slot
  Matrix attention;  // embed_avg with learned attention: D_h x 1

  std::vector<TensorRef> tensors();
};

// Maps an example to the feature vector h. bow_mlp: tanh over the
// length-normalized BoW; embed_avg: tanh of the attention-weighted mean of
// token embeddings; external: lookup by document id (no parameters).
class Encoder {
 public:
  struct Cache {
    Matrix input;                        // bow_mlp: normalized BoW rows
    Matrix h;                            // B x D_h
    std::vector<Vector> weights;         // embed_avg: per-example attention
    std::vector<const Example*> batch;
  };

  Encoder() = default;
  static Encoder create(const EncoderSpec& spec, std::size_t vocab_size,
                        std::mt19937_64& rng);
  static Encoder from_external(std::shared_ptr<const ExternalEmbeddings> table);
  static Encoder from_params(const EncoderSpec& spec, std::size_t vocab_size,
                             EncoderParams params);

  const EncoderSpec& spec() const { return spec_; }
  std::size_t dim() const { return spec_.dim; }
  std::size_t vocab_size() const { return vocab_size_; }
  bool has_attention() const { return spec_.kind == EncoderKind::embed_avg; }

  EncodedText encode(const Example& ex) const;

  Matrix forward(std::span<const Example* const> batch, Cache* cache) const;
  // Accumulates into grads (same layout as params()).
  void backward(const Cache& cache, const Matrix& grad_h,
                EncoderParams& grads) const;

  EncoderParams& params() { return params_; }
  const EncoderParams& params() const { return params_; }
  const std::shared_ptr<const ExternalEmbeddings>& external() const {
    return external_;
  }

 private:
  Vector attention_weights(const Example& ex) const;

  EncoderSpec spec_;
  std::size_t vocab_size_ = 0;
  EncoderParams params_;
  std::shared_ptr<const ExternalEmbeddings> external_;
};

}  // namespace narrative
