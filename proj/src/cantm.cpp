#include "narrative/cantm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "narrative/error.hpp"
#include "narrative/metrics.hpp"

namespace narrative {
namespace {

using Index = Eigen::Index;

constexpr auto kC = static_cast<Index>(kNumClasses);

struct Shape {
  const char* name;
  Index rows;
  Index cols;
};

std::vector<Shape> expected_shapes(const CantmDims& d) {
  const auto h = static_cast<Index>(d.feature_dim);
  const auto k = static_cast<Index>(d.topics);
  const auto ks = static_cast<Index>(d.class_topics);
  const auto v = static_cast<Index>(d.vocab_size);
  return {{"m1_mu_w", h, k},        {"m1_mu_b", 1, k},
          {"m1_lv_w", h, k},        {"m1_lv_b", 1, k},
          {"m1_dec_w", k, v},       {"m1_dec_b", 1, v},
          {"cls_w", k, kC},         {"cls_b", 1, kC},
          {"clsdec_w", kC, v},      {"clsdec_b", 1, v},
          {"m2_mu_w", h + kC, ks},  {"m2_mu_b", 1, ks},
          {"m2_lv_w", h + kC, ks},  {"m2_lv_b", 1, ks},
          {"m2_dec_w", ks + kC, v}, {"m2_dec_b", 1, v},
          {"m2_cls_w", ks, kC},     {"m2_cls_b", 1, kC}};
}

Matrix one_hot(const std::vector<Label>& labels) {
  Matrix y = Matrix::Zero(static_cast<Index>(labels.size()), kC);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y(static_cast<Index>(i), static_cast<Index>(label_index(labels[i]))) = 1.0;
  }
  return y;
}

Matrix clamp_logvar(const Matrix& raw) {
  return raw.cwiseMax(-kLogvarBound).cwiseMin(kLogvarBound);
}

// 1 where the clamp is inactive, 0 where it cut the value.
Matrix clamp_mask(const Matrix& raw) {
  return (raw.array().abs() < kLogvarBound).cast<double>();
}

// Per-row -sum x log p, computed from logits.
Vector multinomial_nll(const Matrix& counts, const Matrix& log_probs) {
  return -(counts.array() * log_probs.array()).rowwise().sum();
}

Vector gaussian_kl_rows(const Matrix& mu, const Matrix& logvar) {
  return 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array())
                   .rowwise()
                   .sum();
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

ClassProbs to_class_probs(const Vector& p) {
  ClassProbs out;
  for (std::size_t c = 0; c < kNumClasses; ++c) out.probs[c] = p(static_cast<Index>(c));
  return out;
}

Vector to_vector(const ClassProbs& p) {
  Vector v(kC);
  for (std::size_t c = 0; c < kNumClasses; ++c) v(static_cast<Index>(c)) = p.probs[c];
  return v;
}

void check_term(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw Error(std::string("non-finite loss term: ") + name);
  }
}

}  // namespace

CantmParams CantmParams::zeros(const CantmDims& dims) {
  CantmParams p;
  auto refs = p.tensors();
  auto shapes = expected_shapes(dims);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    *refs[i].value = Matrix::Zero(shapes[i].rows, shapes[i].cols);
  }
  return p;
}

CantmParams CantmParams::random(const CantmDims& dims, std::mt19937_64& rng) {
  CantmParams p = zeros(dims);
  for (auto& t : p.tensors()) {
    if (t.value->rows() == 1) continue;  // biases stay at zero
    *t.value = glorot(static_cast<std::size_t>(t.value->rows()),
                      static_cast<std::size_t>(t.value->cols()), rng);
  }
  // Start posteriors near unit variance.
  p.m1_lv_w *= 0.1;
  p.m2_lv_w *= 0.1;
  return p;
}

CantmDims CantmParams::dims() const {
  return {static_cast<std::size_t>(m1_mu_w.rows()),
          static_cast<std::size_t>(m1_mu_w.cols()),
          static_cast<std::size_t>(m2_mu_w.cols()),
          static_cast<std::size_t>(m1_dec_w.cols())};
}

void CantmParams::validate(const CantmDims& dims) const {
  auto refs = const_cast<CantmParams*>(this)->tensors();
  auto shapes = expected_shapes(dims);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const Matrix& m = *refs[i].value;
    if (m.rows() != shapes[i].rows || m.cols() != shapes[i].cols) {
      throw Error("tensor '" + refs[i].name + "' has shape " +
                  std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                  ", expected " + std::to_string(shapes[i].rows) + "x" +
                  std::to_string(shapes[i].cols));
    }
  }
}

std::vector<TensorRef> CantmParams::tensors() {
  return {{"m1_mu_w", &m1_mu_w},   {"m1_mu_b", &m1_mu_b},
          {"m1_lv_w", &m1_lv_w},   {"m1_lv_b", &m1_lv_b},
          {"m1_dec_w", &m1_dec_w}, {"m1_dec_b", &m1_dec_b},
          {"cls_w", &cls_w},       {"cls_b", &cls_b},
          {"clsdec_w", &clsdec_w}, {"clsdec_b", &clsdec_b},
          {"m2_mu_w", &m2_mu_w},   {"m2_mu_b", &m2_mu_b},
          {"m2_lv_w", &m2_lv_w},   {"m2_lv_b", &m2_lv_b},
          {"m2_dec_w", &m2_dec_w}, {"m2_dec_b", &m2_dec_b},
          {"m2_cls_w", &m2_cls_w}, {"m2_cls_b", &m2_cls_b}};
}

GaussianParams m1_encode(const Vector& h, const CantmParams& params) {
  if (h.size() != params.m1_mu_w.rows()) {
    throw Error("m1_encode: feature dimension " + std::to_string(h.size()) +
                " does not match model dimension " +
                std::to_string(params.m1_mu_w.rows()));
  }
  Matrix x = h.transpose();
  return {affine(x, params.m1_mu_w, params.m1_mu_b).row(0).transpose(),
          clamp_logvar(affine(x, params.m1_lv_w, params.m1_lv_b)).row(0).transpose()};
}

LatentSample reparameterize(const GaussianParams& params, const Vector& noise,
                            LatentSource source) {
  if (noise.size() != params.mu.size()) {
    throw Error("reparameterize: noise dimension mismatch");
  }
  return {params.mu.array() + (params.logvar.array() / 2).exp() * noise.array(),
          source};
}

double kl_std_normal(const GaussianParams& params) {
  return gaussian_kl_rows(params.mu.transpose(), params.logvar.transpose())(0);
}

Vector decode_bow(const Vector& input, const Matrix& w, const Matrix& b) {
  if (input.size() != w.rows()) throw Error("decode_bow: input dimension mismatch");
  return softmax_rows(affine(input.transpose(), w, b)).row(0).transpose();
}

double bow_reconstruction_loss(const BowVector& bow, const Vector& probs) {
  double loss = 0;
  for (const auto& [idx, count] : bow.entries) {
    loss -= count * std::log(probs(idx));
  }
  return loss;
}

ClassProbs classify_m1(const LatentSample& z, const CantmParams& params) {
  return to_class_probs(decode_bow(z.z, params.cls_w, params.cls_b));
}

GaussianParams m2_encode(const Vector& h, const ClassProbs& yhat,
                         const CantmParams& params) {
  if (h.size() + kC != params.m2_mu_w.rows()) {
    throw Error("m2_encode: feature dimension " + std::to_string(h.size()) +
                " does not match model dimension " +
                std::to_string(params.m2_mu_w.rows() - kC));
  }
  Matrix x = hcat(h.transpose(), to_vector(yhat).transpose());
  return {affine(x, params.m2_mu_w, params.m2_mu_b).row(0).transpose(),
          clamp_logvar(affine(x, params.m2_lv_w, params.m2_lv_b)).row(0).transpose()};
}

std::pair<Vector, ClassProbs> m2_decode(const LatentSample& z_s,
                                        const ClassProbs& yhat,
                                        const CantmParams& params) {
  Vector joint(z_s.z.size() + kC);
  joint << z_s.z, to_vector(yhat);
  return {decode_bow(joint, params.m2_dec_w, params.m2_dec_b),
          to_class_probs(decode_bow(z_s.z, params.m2_cls_w, params.m2_cls_b))};
}

LossBreakdown cantm_loss(const CantmBatch& batch, const CantmParams& params,
                         const LossOptions& options, const LatentNoise& noise,
                         CantmParams* grads, Matrix* grad_h) {
  const Index n = batch.h.rows();
  if (n == 0) throw Error("cantm_loss: empty batch");
  if (static_cast<Index>(batch.labels.size()) != n || batch.bow.rows() != n) {
    throw Error("cantm_loss: batch parts disagree on size");
  }
  const LossWeights& w = options.weights;
  const Matrix& x = batch.bow;
  const Matrix& h = batch.h;
  const Matrix y = one_hot(batch.labels);
  const Vector doc_len = x.rowwise().sum();
  const Index ks = params.m2_mu_w.cols();

  // M1 inference network and reparameterized draw.
  const Matrix mu1 = affine(h, params.m1_mu_w, params.m1_mu_b);
  const Matrix lv1_raw = affine(h, params.m1_lv_w, params.m1_lv_b);
  const Matrix lv1 = clamp_logvar(lv1_raw);
  const Matrix sd1 = (lv1.array() / 2).exp();
  const Matrix z = mu1.array() + sd1.array() * noise.m1.array();

  // M1 decoder, classifier and classifier decoder.
  const Matrix logp1 = log_softmax_rows(affine(z, params.m1_dec_w, params.m1_dec_b));
  const Matrix log_yhat = log_softmax_rows(affine(z, params.cls_w, params.cls_b));
  const Matrix yhat = log_yhat.array().exp();
  const Matrix logpc =
      log_softmax_rows(affine(yhat, params.clsdec_w, params.clsdec_b));

  // M2 on (h | y-hat).
  const Matrix ycond = options.m2_teacher_forcing ? y : yhat;
  const Matrix g = hcat(h, ycond);
  const Matrix mu2 = affine(g, params.m2_mu_w, params.m2_mu_b);
  const Matrix lv2_raw = affine(g, params.m2_lv_w, params.m2_lv_b);
  const Matrix lv2 = clamp_logvar(lv2_raw);
  const Matrix sd2 = (lv2.array() / 2).exp();
  const Matrix zs = mu2.array() + sd2.array() * noise.m2.array();
  const Matrix zsy = hcat(zs, ycond);
  const Matrix logp2 = log_softmax_rows(affine(zsy, params.m2_dec_w, params.m2_dec_b));
  const Matrix log_y2 = log_softmax_rows(affine(zs, params.m2_cls_w, params.m2_cls_b));

  const double inv_n = 1.0 / static_cast<double>(n);
  LossBreakdown out;
  out.recon_m1 = multinomial_nll(x, logp1).sum() * inv_n;
  out.kl_m1 = gaussian_kl_rows(mu1, lv1).sum() * inv_n;
  out.ce_m1 = -(y.array() * log_yhat.array()).sum() * inv_n;
  out.recon_clsdec = multinomial_nll(x, logpc).sum() * inv_n;
  out.recon_m2 = multinomial_nll(x, logp2).sum() * inv_n;
  out.kl_m2 = gaussian_kl_rows(mu2, lv2).sum() * inv_n;
  out.ce_m2 = -(y.array() * log_y2.array()).sum() * inv_n;
  check_term(out.recon_m1, "recon_m1");
  check_term(out.kl_m1, "kl_m1");
  check_term(out.ce_m1, "ce_m1");
  check_term(out.recon_clsdec, "recon_clsdec");
  check_term(out.recon_m2, "recon_m2");
  check_term(out.kl_m2, "kl_m2");
  check_term(out.ce_m2, "ce_m2");
  out.total = w.recon_m1 * out.recon_m1 + w.kl_m1 * out.kl_m1 +
              w.ce_m1 * out.ce_m1 + w.recon_clsdec * out.recon_clsdec +
              w.recon_m2 * out.recon_m2 + w.kl_m2 * out.kl_m2 +
              w.ce_m2 * out.ce_m2;
  check_term(out.total, "total");
  if (!grads && !grad_h) return out;

  CantmParams local;
  CantmParams& gp = grads ? *grads : local;
  if (!grads) gp = CantmParams::zeros(params.dims());
  auto multinomial_grad = [&](const Matrix& logp, double weight) -> Matrix {
    Matrix p = logp.array().exp();
    return (p.array().colwise() * doc_len.array() - x.array()) * (weight * inv_n);
  };
  auto bias_grad = [](const Matrix& d) -> Matrix { return d.colwise().sum(); };

  // M2 class head.
  const Matrix d_lc2 = (log_y2.array().exp() - y.array()) * (w.ce_m2 * inv_n);
  gp.m2_cls_w = zs.transpose() * d_lc2;
  gp.m2_cls_b = bias_grad(d_lc2);
  Matrix d_zs = d_lc2 * params.m2_cls_w.transpose();

  // M2 decoder over (z_s | y).
  const Matrix d_l2 = multinomial_grad(logp2, w.recon_m2);
  gp.m2_dec_w = zsy.transpose() * d_l2;
  gp.m2_dec_b = bias_grad(d_l2);
  const Matrix d_zsy = d_l2 * params.m2_dec_w.transpose();
  d_zs += d_zsy.leftCols(ks);
  Matrix d_ycond = d_zsy.rightCols(kC);

  // M2 encoder, including its KL term.
  const Matrix d_mu2 = d_zs + mu2 * (w.kl_m2 * inv_n);
  const Matrix d_lv2 =
      (d_zs.array() * noise.m2.array() * sd2.array() * 0.5 +
       (lv2.array().exp() - 1.0) * (0.5 * w.kl_m2 * inv_n)) *
      clamp_mask(lv2_raw).array();
  gp.m2_mu_w = g.transpose() * d_mu2;
  gp.m2_mu_b = bias_grad(d_mu2);
  gp.m2_lv_w = g.transpose() * d_lv2;
  gp.m2_lv_b = bias_grad(d_lv2);
  const Matrix d_g =
      d_mu2 * params.m2_mu_w.transpose() + d_lv2 * params.m2_lv_w.transpose();
  Matrix d_h = d_g.leftCols(h.cols());
  d_ycond += d_g.rightCols(kC);

  // Classifier decoder.
  const Matrix d_lc = multinomial_grad(logpc, w.recon_clsdec);
  gp.clsdec_w = yhat.transpose() * d_lc;
  gp.clsdec_b = bias_grad(d_lc);
  Matrix d_yhat = d_lc * params.clsdec_w.transpose();
  if (!options.m2_teacher_forcing) d_yhat += d_ycond;

  // M1 classifier: cross-entropy plus everything flowing back through y-hat.
  const Matrix d_logits_cls =
      (yhat - y) * (w.ce_m1 * inv_n) + softmax_backward(yhat, d_yhat);
  gp.cls_w = z.transpose() * d_logits_cls;
  gp.cls_b = bias_grad(d_logits_cls);
  Matrix d_z = d_logits_cls * params.cls_w.transpose();

  // M1 decoder.
  const Matrix d_l1 = multinomial_grad(logp1, w.recon_m1);
  gp.m1_dec_w = z.transpose() * d_l1;
  gp.m1_dec_b = bias_grad(d_l1);
  d_z += d_l1 * params.m1_dec_w.transpose();

  // M1 encoder.
  const Matrix d_mu1 = d_z + mu1 * (w.kl_m1 * inv_n);
  const Matrix d_lv1 =
      (d_z.array() * noise.m1.array() * sd1.array() * 0.5 +
       (lv1.array().exp() - 1.0) * (0.5 * w.kl_m1 * inv_n)) *
      clamp_mask(lv1_raw).array();
  gp.m1_mu_w = h.transpose() * d_mu1;
  gp.m1_mu_b = bias_grad(d_mu1);
  gp.m1_lv_w = h.transpose() * d_lv1;
  gp.m1_lv_b = bias_grad(d_lv1);
  d_h += d_mu1 * params.m1_mu_w.transpose() + d_lv1 * params.m1_lv_w.transpose();

  if (grad_h) *grad_h = std::move(d_h);
  return out;
}

CantmModel::CantmModel(CantmConfig config, Featurizer featurizer,
                       Encoder encoder, CantmParams params)
    : config_(std::move(config)),
      featurizer_(std::move(featurizer)),
      encoder_(std::move(encoder)),
      params_(std::move(params)) {
  params_.validate({encoder_.dim(), config_.topics, config_.class_topics,
                    featurizer_.vocab().size()});
}

EncodedText CantmModel::encode(const Example& ex) const {
  return encoder_.encode(ex);
}

GaussianParams CantmModel::posterior_m1(const EncodedText& h) const {
  return m1_encode(h.h, params_);
}

GaussianParams CantmModel::posterior_m2(const EncodedText& h,
                                        const ClassProbs& yhat) const {
  return m2_encode(h.h, yhat, params_);
}

ClassProbs CantmModel::predict_example(const Example& ex) const {
  GaussianParams q = posterior_m1(encode(ex));
  return classify_m1({q.mu, LatentSource::m1}, params_);
}

ClassProbs CantmModel::predict_proba(const Document& doc) const {
  return predict_example(featurizer_.featurize(doc));
}

LossBreakdown cantm_pipeline_loss(const CantmModel& model,
                                  std::span<const Example* const> batch,
                                  const LatentNoise& noise, CantmParams* grads,
                                  EncoderParams* encoder_grads) {
  Encoder::Cache cache;
  CantmBatch b;
  b.h = model.encoder().forward(batch, &cache);
  b.bow = bow_matrix(batch, model.featurizer().vocab().size());
  for (const Example* ex : batch) {
    if (!ex->label) throw Error("training example '" + ex->id + "' is unlabeled");
    b.labels.push_back(*ex->label);
  }
  const bool want_grads = grads || encoder_grads;
  Matrix d_h;
  CantmParams local;
  LossBreakdown loss =
      cantm_loss(b, model.params(), model.config().loss, noise,
                 want_grads ? (grads ? grads : &local) : nullptr,
                 encoder_grads ? &d_h : nullptr);
  if (encoder_grads) model.encoder().backward(cache, d_h, *encoder_grads);
  return loss;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> dev_split(
    std::span<const Example> examples, double dev_fraction, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (!examples[i].label) {
      throw Error("training example '" + examples[i].id + "' is unlabeled");
    }
    by_class[label_index(*examples[i].label)].push_back(i);
  }
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> train, dev;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_dev = static_cast<std::size_t>(
        std::lround(dev_fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < members.size(); ++j) {
      (j < n_dev ? dev : train).push_back(members[j]);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(dev.begin(), dev.end());
  return {train, dev};
}

namespace {

double dev_macro_f1(const CantmModel& model, std::span<const Example> examples,
                    const std::vector<std::size_t>& dev) {
  std::vector<Label> gold, pred;
  for (auto i : dev) {
    gold.push_back(*examples[i].label);
    pred.push_back(model.predict_example(examples[i]).label());
  }
  return metrics(gold, pred).macro_f1;
}

// Log unigram frequencies (add-one smoothed) as the starting decoder bias, so
// topic weights only have to explain deviations from the background.
Matrix background_log_freq(std::span<const Example> examples,
                           const std::vector<std::size_t>& rows, std::size_t v) {
  Vector counts = Vector::Ones(static_cast<Index>(v));
  for (auto i : rows) {
    for (const auto& [idx, c] : examples[i].bow.entries) counts(idx) += c;
  }
  return (counts / counts.sum()).array().log().matrix().transpose();
}

}  // namespace

std::unique_ptr<CantmModel> train_cantm(
    std::span<const Document> train, const CantmConfig& config,
    std::shared_ptr<const ExternalEmbeddings> embeddings) {
  if (train.empty()) throw Error("train_cantm: empty training set");
  if (config.topics == 0 || config.class_topics == 0 || config.batch_size == 0) {
    throw Error("train_cantm: topics, class_topics and batch_size must be > 0");
  }
  if (!(config.optimizer.learning_rate > 0)) {
    throw Error("train_cantm: learning rate must be > 0");
  }
  for (const auto& d : train) {
    if (!d.label) throw Error("train_cantm: document '" + d.id + "' is unlabeled");
  }
  std::mt19937_64 rng(config.seed);
  Featurizer featurizer = Featurizer::fit(train, config.vocab, config.truncation);
  const std::vector<Example> examples = featurizer.featurize(train);
  auto [train_rows, dev_rows] = dev_split(examples, config.dev_fraction, config.seed);
  if (train_rows.empty()) std::swap(train_rows, dev_rows);

  Encoder encoder;
  if (config.encoder.kind == EncoderKind::external) {
    if (!embeddings) throw Error("train_cantm: external encoder needs embeddings");
    encoder = Encoder::from_external(embeddings);
  } else {
    encoder = Encoder::create(config.encoder, featurizer.vocab().size(), rng);
  }
  CantmConfig effective = config;
  effective.encoder = encoder.spec();
  const CantmDims dims{encoder.dim(), config.topics, config.class_topics,
                       featurizer.vocab().size()};
  CantmParams params = CantmParams::random(dims, rng);
  const Matrix background =
      background_log_freq(examples, train_rows, dims.vocab_size);
  params.m1_dec_b = background;
  params.clsdec_b = background;
  params.m2_dec_b = background;

  auto model = std::make_unique<CantmModel>(effective, std::move(featurizer),
                                            std::move(encoder), std::move(params));
  Optimizer optimizer(config.optimizer);
  std::vector<TensorRef> all_params = model->params().tensors();
  for (auto& t : model->encoder().params().tensors()) all_params.push_back(t);

  CantmParams best_params = model->params();
  EncoderParams best_encoder = model->encoder().params();
  double best_f1 = -1.0;
  std::vector<EpochLog> history;

  std::vector<std::size_t> order = train_rows;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const Example*> batch;
      for (std::size_t j = start; j < end; ++j) batch.push_back(&examples[order[j]]);
      LatentNoise noise{standard_normal(batch.size(), dims.topics, rng),
                        standard_normal(batch.size(), dims.class_topics, rng)};
      CantmParams grads = CantmParams::zeros(dims);
      EncoderParams encoder_grads = zeros_like(model->encoder().params());
      LossBreakdown loss;
      try {
        loss = cantm_pipeline_loss(*model, batch, noise, &grads, &encoder_grads);
      } catch (const Error& e) {
        throw Error("training diverged at epoch " + std::to_string(epoch) +
                    ", batch " + std::to_string(n_batches + 1) + ": " + e.what());
      }
      std::vector<ConstTensorRef> all_grads = const_tensors(grads);
      for (auto& t : const_tensors(encoder_grads)) all_grads.push_back(t);
      optimizer.step(all_params, all_grads);
      log.train_loss.recon_m1 += loss.recon_m1;
      log.train_loss.kl_m1 += loss.kl_m1;
      log.train_loss.ce_m1 += loss.ce_m1;
      log.train_loss.recon_clsdec += loss.recon_clsdec;
      log.train_loss.recon_m2 += loss.recon_m2;
      log.train_loss.kl_m2 += loss.kl_m2;
      log.train_loss.ce_m2 += loss.ce_m2;
      log.train_loss.total += loss.total;
      ++n_batches;
    }
    if (n_batches) {
      const double inv = 1.0 / static_cast<double>(n_batches);
      auto& t = log.train_loss;
      for (double* v : {&t.recon_m1, &t.kl_m1, &t.ce_m1, &t.recon_clsdec,
                        &t.recon_m2, &t.kl_m2, &t.ce_m2, &t.total}) {
        *v *= inv;
      }
    }
    log.dev_macro_f1 = dev_rows.empty() ? 0.0 : dev_macro_f1(*model, examples, dev_rows);
    history.push_back(log);
    if (dev_rows.empty() || log.dev_macro_f1 > best_f1) {
      best_f1 = log.dev_macro_f1;
      best_params = model->params();
      best_encoder = model->encoder().params();
    }
  }
  model->params() = std::move(best_params);
  model->encoder().params() = std::move(best_encoder);
  model->set_history(std::move(history));
  return model;
}

}  // namespace narrative
