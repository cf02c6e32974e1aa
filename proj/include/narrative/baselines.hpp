#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "narrative/cantm.hpp"
#include "narrative/classifier.hpp"
#include "narrative/encoders.hpp"
#include "narrative/features.hpp"
#include "narrative/nn.hpp"

namespace narrative {

// ---------------------------------------------------------------------------
// BOW-LR: multinomial logistic regression over raw bag-of-words counts.
// ---------------------------------------------------------------------------

struct BowLrConfig {
  double l2 = 0.01;  // coefficient of ||W||^2 / 2 added to the mean cross-entropy
  std::size_t max_iterations = 3000;
  double tolerance = 1e-6;  // stop when max |gradient| drops below this
  double init_scale = 0.0;  // uniform(-s, s) starting weights
  std::uint64_t seed = 1;
  TruncationStrategy truncation = TruncationStrategy::head(400);
  VocabOptions vocab{2, 10000, default_stopwords()};
};

struct LinearParams {
  Matrix w;  // features x 7
  Matrix b;  // 1 x 7, not regularized

  std::vector<TensorRef> tensors() { return {{"w", &w}, {"b", &b}}; }
};

// Mean cross-entropy + l2/2 ||w||^2; fills the gradient when asked.
double logistic_objective(const Matrix& x, std::span<const Label> labels,
                          const LinearParams& params, double l2,
                          LinearParams* grad = nullptr);

struct LogisticFit {
  LinearParams params;
  double objective = 0;
  std::size_t iterations = 0;
};

// Gradient descent with backtracking (Armijo) steps; the weight step is
// scaled by 1 / (1 + l2).
LogisticFit fit_logistic(const Matrix& x, std::span<const Label> labels,
                         double l2, const BowLrConfig& config);

class BowLrModel : public TextClassifier {
 public:
  BowLrModel(Featurizer featurizer, LinearParams params, double l2);

  ClassProbs predict_proba(const Document& doc) const override;
  std::string_view kind() const override { return "bow_lr"; }

  const Featurizer& featurizer() const { return featurizer_; }
  const LinearParams& params() const { return params_; }
  double l2() const { return l2_; }

 private:
  Featurizer featurizer_;
  LinearParams params_;
  double l2_;
};

std::unique_ptr<BowLrModel> train_bow_lr(std::span<const Document> train,
                                         const BowLrConfig& config);

// ---------------------------------------------------------------------------
// SCHOLAR-style supervised VAE: the gold label vector is appended to the
// encoder input during training and replaced by zeros at inference.
// ---------------------------------------------------------------------------

struct ScholarConfig {
  std::size_t embedding_dim = 500;
  std::size_t topics = 20;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  OptimizerConfig optimizer{OptimizerKind::adam, 0.01};
  std::uint64_t seed = 1;
  double dev_fraction = 0.2;
  TruncationStrategy truncation = TruncationStrategy::head(400);
  VocabOptions vocab{2, 10000, default_stopwords()};
};

struct ScholarParams {
  Matrix enc_w, enc_b;  // (V + 7) -> embedding_dim
  Matrix mu_w, mu_b;    // embedding_dim -> K
  Matrix lv_w, lv_b;
  Matrix dec_w, dec_b;  // K -> V, applied to theta = softmax(z)
  Matrix cls_w, cls_b;  // K -> 7, applied to theta

  static ScholarParams random(std::size_t vocab_size, std::size_t embedding_dim,
                              std::size_t topics, std::mt19937_64& rng);
  void validate(std::size_t vocab_size, std::size_t embedding_dim,
                std::size_t topics) const;
  std::vector<TensorRef> tensors();
};

// Batch-mean reconstruction + KL + cross-entropy. `label_input` is the
// B x 7 block appended to the encoder input (gold one-hot in training).
double scholar_loss(const Matrix& bow, const Matrix& label_input,
                    std::span<const Label> labels, const ScholarParams& params,
                    const Matrix& noise, ScholarParams* grads = nullptr);

class ScholarModel : public TextClassifier {
 public:
  ScholarModel(ScholarConfig config, Featurizer featurizer, ScholarParams params);

  ClassProbs predict_proba(const Document& doc) const override;
  std::string_view kind() const override { return "scholar"; }
  ClassProbs predict_example(const Example& ex) const;

  const ScholarConfig& config() const { return config_; }
  const Featurizer& featurizer() const { return featurizer_; }
  const ScholarParams& params() const { return params_; }
  ScholarParams& params() { return params_; }

 private:
  ScholarConfig config_;
  Featurizer featurizer_;
  ScholarParams params_;
};

std::unique_ptr<ScholarModel> train_scholar(std::span<const Document> train,
                                            const ScholarConfig& config);

// ---------------------------------------------------------------------------
// Frozen-encoder head: a 500-unit tanh layer and softmax over precomputed
// document vectors. The vectors themselves are never updated.
// ---------------------------------------------------------------------------

struct FrozenHeadConfig {
  std::size_t hidden = 500;
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  OptimizerConfig optimizer{OptimizerKind::adam, 0.001};
  std::uint64_t seed = 1;
};

struct FrozenHeadParams {
  Matrix w1, b1;  // D -> hidden
  Matrix w2, b2;  // hidden -> 7

  std::vector<TensorRef> tensors() {
    return {{"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}};
  }
};

double frozen_head_loss(const Matrix& features, std::span<const Label> labels,
                        const FrozenHeadParams& params,
                        FrozenHeadParams* grads = nullptr);

class FrozenHeadModel : public TextClassifier {
 public:
  FrozenHeadModel(std::shared_ptr<const ExternalEmbeddings> embeddings,
                  FrozenHeadParams params);

  // Throws Error when the document id has no precomputed vector.
  ClassProbs predict_proba(const Document& doc) const override;
  std::string_view kind() const override { return "frozen_head"; }
  ClassProbs predict_features(const Vector& features) const;

  const std::shared_ptr<const ExternalEmbeddings>& embeddings() const {
    return embeddings_;
  }
  const FrozenHeadParams& params() const { return params_; }

 private:
  std::shared_ptr<const ExternalEmbeddings> embeddings_;
  FrozenHeadParams params_;
};

std::unique_ptr<FrozenHeadModel> train_frozen_head(
    std::span<const Document> train,
    std::shared_ptr<const ExternalEmbeddings> embeddings,
    const FrozenHeadConfig& config);

}  // namespace narrative
