#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "narrative/classifier.hpp"
#include "narrative/encoders.hpp"
#include "narrative/features.hpp"
#include "narrative/nn.hpp"

namespace narrative {

inline constexpr double kLogvarBound = 10.0;

// Diagonal Gaussian posterior; logvar is clamped to [-10, 10].
struct GaussianParams {
  Vector mu;
  Vector logvar;
};

enum class LatentSource { m1, m2 };

struct LatentSample {
  Vector z;
  LatentSource source = LatentSource::m1;
};

struct LossWeights {
  double recon_m1 = 1.0;
  double kl_m1 = 1.0;
  double ce_m1 = 1.0;
  double recon_clsdec = 1.0;
  double recon_m2 = 1.0;
  double kl_m2 = 1.0;
  double ce_m2 = 1.0;
};

struct LossBreakdown {
  double recon_m1 = 0;
  double kl_m1 = 0;
  double ce_m1 = 0;
  double recon_clsdec = 0;
  double recon_m2 = 0;
  double kl_m2 = 0;
  double ce_m2 = 0;
  double total = 0;
};

struct CantmDims {
  std::size_t feature_dim = 0;   // D_h
  std::size_t topics = 0;        // K
  std::size_t class_topics = 0;  // K_s
  std::size_t vocab_size = 0;    // V
};

// Weight matrices are (inputs x outputs); biases are 1 x outputs. Rows of a
// decoder weight matrix therefore index topics (or classes) and columns index
// vocabulary words.
struct CantmParams {
  Matrix m1_mu_w, m1_mu_b;      // M1 encoder q(z|x): h -> mu
  Matrix m1_lv_w, m1_lv_b;      //                    h -> logvar
  Matrix m1_dec_w, m1_dec_b;    // M1 decoder p(x_bow|z): K -> V
  Matrix cls_w, cls_b;          // M1 classifier f(z): K -> 7
  Matrix clsdec_w, clsdec_b;    // classifier decoder p(x_bow|y): 7 -> V
  Matrix m2_mu_w, m2_mu_b;      // M2 encoder q(z_s|x,y): (h|y) -> mu
  Matrix m2_lv_w, m2_lv_b;      //                        (h|y) -> logvar
  Matrix m2_dec_w, m2_dec_b;    // M2 decoder p(x_bow|y,z_s): (K_s|y) -> V
  Matrix m2_cls_w, m2_cls_b;    // M2 class head p(y|z_s): K_s -> 7

  static CantmParams zeros(const CantmDims& dims);
  static CantmParams random(const CantmDims& dims, std::mt19937_64& rng);

  CantmDims dims() const;
  // Throws Error naming the first block whose shape disagrees with dims.
  void validate(const CantmDims& dims) const;
  std::vector<TensorRef> tensors();
};

GaussianParams m1_encode(const Vector& h, const CantmParams& params);
LatentSample reparameterize(const GaussianParams& params, const Vector& noise,
                            LatentSource source = LatentSource::m1);
double kl_std_normal(const GaussianParams& params);
// Normalized exponential of (input^T W + b) over the vocabulary.
Vector decode_bow(const Vector& input, const Matrix& w, const Matrix& b);
// -sum_w count(w) log p(w)
double bow_reconstruction_loss(const BowVector& bow, const Vector& probs);
ClassProbs classify_m1(const LatentSample& z, const CantmParams& params);
GaussianParams m2_encode(const Vector& h, const ClassProbs& yhat,
                         const CantmParams& params);
std::pair<Vector, ClassProbs> m2_decode(const LatentSample& z_s,
                                        const ClassProbs& yhat,
                                        const CantmParams& params);

struct CantmBatch {
  Matrix bow;                 // B x V counts
  Matrix h;                   // B x D_h
  std::vector<Label> labels;  // B gold labels
};

// Standard-normal draws for one batch.
struct LatentNoise {
  Matrix m1;  // B x K
  Matrix m2;  // B x K_s
};

struct LossOptions {
  LossWeights weights;
  bool m2_teacher_forcing = false;  // feed gold one-hot instead of y-hat to M2
};

// Batch-mean objective. When `grads` is given it receives dLoss/dparams
// (overwritten) and `grad_h`, if given, dLoss/dh. Throws Error naming any
// non-finite term.
LossBreakdown cantm_loss(const CantmBatch& batch, const CantmParams& params,
                         const LossOptions& options, const LatentNoise& noise,
                         CantmParams* grads = nullptr,
                         Matrix* grad_h = nullptr);

struct CantmConfig {
  std::size_t topics = 50;
  std::size_t class_topics = 25;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  OptimizerConfig optimizer{OptimizerKind::sgd, 0.05};
  std::uint64_t seed = 1;
  LossOptions loss;
  double dev_fraction = 0.2;
  TruncationStrategy truncation = TruncationStrategy::head(400);
  VocabOptions vocab{2, 10000, default_stopwords()};
  EncoderSpec encoder;
};

struct EpochLog {
  std::size_t epoch = 0;
  LossBreakdown train_loss;  // mean over batches
  double dev_macro_f1 = 0;
};

class CantmModel : public TextClassifier {
 public:
  CantmModel(CantmConfig config, Featurizer featurizer, Encoder encoder,
             CantmParams params);

  ClassProbs predict_proba(const Document& doc) const override;
  std::string_view kind() const override { return "cantm"; }

  ClassProbs predict_example(const Example& ex) const;

  // Deterministic inference pieces: encoder output and posterior means.
  EncodedText encode(const Example& ex) const;
  GaussianParams posterior_m1(const EncodedText& h) const;
  GaussianParams posterior_m2(const EncodedText& h, const ClassProbs& yhat) const;

  const CantmConfig& config() const { return config_; }
  const Featurizer& featurizer() const { return featurizer_; }
  const Encoder& encoder() const { return encoder_; }
  Encoder& encoder() { return encoder_; }
  const CantmParams& params() const { return params_; }
  CantmParams& params() { return params_; }
  const std::vector<EpochLog>& history() const { return history_; }
  void set_history(std::vector<EpochLog> h) { history_ = std::move(h); }

 private:
  CantmConfig config_;
  Featurizer featurizer_;
  Encoder encoder_;
  CantmParams params_;
  std::vector<EpochLog> history_;
};

// Loss of the whole pipeline (encoder + topic model) for prepared examples
// and fixed noise; fills encoder and model gradients when asked. Used by
// training and by gradient checks.
LossBreakdown cantm_pipeline_loss(const CantmModel& model,
                                  std::span<const Example* const> batch,
                                  const LatentNoise& noise,
                                  CantmParams* grads = nullptr,
                                  EncoderParams* encoder_grads = nullptr);

// Fits the featurizer on `train`, holds out a stratified dev split
// (dev_fraction) and returns the parameters of the best dev macro-F1 epoch.
// External encoders need `embeddings`.
std::unique_ptr<CantmModel> train_cantm(
    std::span<const Document> train, const CantmConfig& config,
    std::shared_ptr<const ExternalEmbeddings> embeddings = nullptr);

// Stratified split of labeled examples into (train, dev) positions.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> dev_split(
    std::span<const Example> examples, double dev_fraction, std::uint64_t seed);

}  // namespace narrative
