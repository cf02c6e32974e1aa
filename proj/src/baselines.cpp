#include "narrative/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "narrative/error.hpp"
#include "narrative/metrics.hpp"

namespace narrative {
namespace {

using Index = Eigen::Index;
constexpr auto kC = static_cast<Index>(kNumClasses);

Matrix one_hot(std::span<const Label> labels) {
  Matrix y = Matrix::Zero(static_cast<Index>(labels.size()), kC);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y(static_cast<Index>(i), static_cast<Index>(label_index(labels[i]))) = 1.0;
  }
  return y;
}

ClassProbs row_to_probs(const Matrix& p) {
  ClassProbs out;
  for (std::size_t c = 0; c < kNumClasses; ++c) out.probs[c] = p(0, static_cast<Index>(c));
  return out;
}

std::vector<Label> gold_labels(std::span<const Document> docs) {
  std::vector<Label> out;
  for (const auto& d : docs) {
    if (!d.label) throw Error("training document '" + d.id + "' is unlabeled");
    out.push_back(*d.label);
  }
  return out;
}

Matrix length_normalized(Matrix x) {
  for (Index i = 0; i < x.rows(); ++i) {
    const double n = x.row(i).sum();
    if (n > 0) x.row(i) /= n;
  }
  return x;
}

Matrix clamp_logvar(const Matrix& raw) {
  return raw.cwiseMax(-kLogvarBound).cwiseMin(kLogvarBound);
}

}  // namespace

// --- BOW-LR ----------------------------------------------------------------

double logistic_objective(const Matrix& x, std::span<const Label> labels,
                          const LinearParams& params, double l2,
                          LinearParams* grad) {
  const Index n = x.rows();
  if (n == 0 || static_cast<Index>(labels.size()) != n) {
    throw Error("logistic_objective: empty input or label count mismatch");
  }
  const Matrix y = one_hot(labels);
  const Matrix logp = log_softmax_rows(affine(x, params.w, params.b));
  const double inv_n = 1.0 / static_cast<double>(n);
  const double value =
      -(y.array() * logp.array()).sum() * inv_n + 0.5 * l2 * params.w.squaredNorm();
  if (grad) {
    const Matrix d = (logp.array().exp() - y.array()) * inv_n;
    grad->w = x.transpose() * d + l2 * params.w;
    grad->b = d.colwise().sum();
  }
  return value;
}

LogisticFit fit_logistic(const Matrix& x, std::span<const Label> labels,
                         double l2, const BowLrConfig& config) {
  if (l2 < 0) throw Error("fit_logistic: l2 must be >= 0");
  std::mt19937_64 rng(config.seed);
  LogisticFit fit;
  fit.params.w = Matrix::Zero(x.cols(), kC);
  fit.params.b = Matrix::Zero(1, kC);
  if (config.init_scale > 0) {
    std::uniform_real_distribution<double> u(-config.init_scale, config.init_scale);
    for (auto& t : fit.params.tensors()) {
      for (Index i = 0; i < t.value->size(); ++i) t.value->data()[i] = u(rng);
    }
  }
  LinearParams grad;
  double f = logistic_objective(x, labels, fit.params, l2, &grad);
  double step = 1.0;
  for (fit.iterations = 0; fit.iterations < config.max_iterations; ++fit.iterations) {
    const double g_inf = std::max(grad.w.cwiseAbs().maxCoeff(), grad.b.cwiseAbs().maxCoeff());
    if (g_inf < config.tolerance) break;
    // The penalty adds curvature l2 to the weights only; scaling their step
    // by 1 / (1 + l2) keeps the unregularized bias from stalling when l2 is
    // large.
    const Matrix dir_w = grad.w / (1.0 + l2);
    const double decrease = grad.w.cwiseProduct(dir_w).sum() + grad.b.squaredNorm();
    LinearParams trial;
    double f_trial = 0;
    for (;;) {
      trial.w = fit.params.w - step * dir_w;
      trial.b = fit.params.b - step * grad.b;
      f_trial = logistic_objective(x, labels, trial, l2);
      if (f_trial <= f - 0.5 * step * decrease || step < 1e-12) break;
      step *= 0.5;
    }
    if (f - f_trial <= 0) break;  // no further progress is representable
    fit.params = std::move(trial);
    f = logistic_objective(x, labels, fit.params, l2, &grad);
    step = std::min(step * 2.0, 1e3);
  }
  fit.objective = f;
  return fit;
}

BowLrModel::BowLrModel(Featurizer featurizer, LinearParams params, double l2)
    : featurizer_(std::move(featurizer)), params_(std::move(params)), l2_(l2) {
  const auto v = static_cast<Index>(featurizer_.vocab().size());
  if (params_.w.rows() != v || params_.w.cols() != kC || params_.b.rows() != 1 ||
      params_.b.cols() != kC) {
    throw Error("bow_lr: parameter shapes do not match the vocabulary");
  }
}

ClassProbs BowLrModel::predict_proba(const Document& doc) const {
  Example ex = featurizer_.featurize(doc);
  const Example* one[] = {&ex};
  return row_to_probs(
      softmax_rows(affine(bow_matrix(one, featurizer_.vocab().size()), params_.w,
                          params_.b)));
}

std::unique_ptr<BowLrModel> train_bow_lr(std::span<const Document> train,
                                         const BowLrConfig& config) {
  if (train.empty()) throw Error("train_bow_lr: empty training set");
  const std::vector<Label> labels = gold_labels(train);
  Featurizer featurizer = Featurizer::fit(train, config.vocab, config.truncation);
  std::vector<Example> examples = featurizer.featurize(train);
  std::vector<const Example*> rows;
  for (const auto& e : examples) rows.push_back(&e);
  const Matrix x = bow_matrix(rows, featurizer.vocab().size());
  LogisticFit fit = fit_logistic(x, labels, config.l2, config);
  return std::make_unique<BowLrModel>(std::move(featurizer), std::move(fit.params),
                                      config.l2);
}

// --- SCHOLAR -----------------------------------------------------------------

ScholarParams ScholarParams::random(std::size_t vocab_size,
                                    std::size_t embedding_dim, std::size_t topics,
                                    std::mt19937_64& rng) {
  ScholarParams p;
  const auto e = static_cast<Index>(embedding_dim);
  const auto k = static_cast<Index>(topics);
  const auto v = static_cast<Index>(vocab_size);
  p.enc_w = glorot(vocab_size + kNumClasses, embedding_dim, rng);
  p.enc_b = Matrix::Zero(1, e);
  p.mu_w = glorot(embedding_dim, topics, rng);
  p.mu_b = Matrix::Zero(1, k);
  p.lv_w = 0.1 * glorot(embedding_dim, topics, rng);
  p.lv_b = Matrix::Zero(1, k);
  p.dec_w = glorot(topics, vocab_size, rng);
  p.dec_b = Matrix::Zero(1, v);
  p.cls_w = glorot(topics, kNumClasses, rng);
  p.cls_b = Matrix::Zero(1, kC);
  return p;
}

void ScholarParams::validate(std::size_t vocab_size, std::size_t embedding_dim,
                             std::size_t topics) const {
  const auto e = static_cast<Index>(embedding_dim);
  const auto k = static_cast<Index>(topics);
  const auto v = static_cast<Index>(vocab_size);
  struct Expect {
    const Matrix* m;
    Index r, c;
    const char* name;
  };
  const Expect shapes[] = {{&enc_w, v + kC, e, "enc_w"}, {&enc_b, 1, e, "enc_b"},
                           {&mu_w, e, k, "mu_w"},        {&mu_b, 1, k, "mu_b"},
                           {&lv_w, e, k, "lv_w"},        {&lv_b, 1, k, "lv_b"},
                           {&dec_w, k, v, "dec_w"},      {&dec_b, 1, v, "dec_b"},
                           {&cls_w, k, kC, "cls_w"},     {&cls_b, 1, kC, "cls_b"}};
  for (const auto& s : shapes) {
    if (s.m->rows() != s.r || s.m->cols() != s.c) {
      throw Error(std::string("scholar tensor '") + s.name + "' has shape " +
                  std::to_string(s.m->rows()) + "x" + std::to_string(s.m->cols()) +
                  ", expected " + std::to_string(s.r) + "x" + std::to_string(s.c));
    }
  }
}

std::vector<TensorRef> ScholarParams::tensors() {
  return {{"enc_w", &enc_w}, {"enc_b", &enc_b}, {"mu_w", &mu_w},
          {"mu_b", &mu_b},   {"lv_w", &lv_w},   {"lv_b", &lv_b},
          {"dec_w", &dec_w}, {"dec_b", &dec_b}, {"cls_w", &cls_w},
          {"cls_b", &cls_b}};
}

double scholar_loss(const Matrix& bow, const Matrix& label_input,
                    std::span<const Label> labels, const ScholarParams& p,
                    const Matrix& noise, ScholarParams* grads) {
  const Index n = bow.rows();
  if (n == 0 || static_cast<Index>(labels.size()) != n) {
    throw Error("scholar_loss: empty batch or label count mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix y = one_hot(labels);
  Matrix input(n, bow.cols() + kC);
  input << length_normalized(bow), label_input;
  const Matrix e = affine(input, p.enc_w, p.enc_b).array().tanh();
  const Matrix mu = affine(e, p.mu_w, p.mu_b);
  const Matrix lv_raw = affine(e, p.lv_w, p.lv_b);
  const Matrix lv = clamp_logvar(lv_raw);
  const Matrix sd = (lv.array() / 2).exp();
  const Matrix z = mu.array() + sd.array() * noise.array();
  const Matrix theta = softmax_rows(z);
  const Matrix logp = log_softmax_rows(affine(theta, p.dec_w, p.dec_b));
  const Matrix logy = log_softmax_rows(affine(theta, p.cls_w, p.cls_b));
  const double recon = -(bow.array() * logp.array()).sum() * inv_n;
  const double kl =
      -0.5 * (1.0 + lv.array() - mu.array().square() - lv.array().exp()).sum() * inv_n;
  const double ce = -(y.array() * logy.array()).sum() * inv_n;
  const double total = recon + kl + ce;
  if (!std::isfinite(total)) throw Error("scholar_loss: non-finite loss");
  if (!grads) return total;

  const Vector doc_len = bow.rowwise().sum();
  const Matrix d_dec =
      (logp.array().exp().colwise() * doc_len.array() - bow.array()) * inv_n;
  grads->dec_w = theta.transpose() * d_dec;
  grads->dec_b = d_dec.colwise().sum();
  const Matrix d_cls = (logy.array().exp() - y.array()) * inv_n;
  grads->cls_w = theta.transpose() * d_cls;
  grads->cls_b = d_cls.colwise().sum();
  const Matrix d_theta = d_dec * p.dec_w.transpose() + d_cls * p.cls_w.transpose();
  const Matrix d_z = softmax_backward(theta, d_theta);
  const Matrix d_mu = d_z + mu * inv_n;
  const Matrix mask = (lv_raw.array().abs() < kLogvarBound).cast<double>();
  const Matrix d_lv = (d_z.array() * noise.array() * sd.array() * 0.5 +
                       (lv.array().exp() - 1.0) * 0.5 * inv_n) *
                      mask.array();
  grads->mu_w = e.transpose() * d_mu;
  grads->mu_b = d_mu.colwise().sum();
  grads->lv_w = e.transpose() * d_lv;
  grads->lv_b = d_lv.colwise().sum();
  const Matrix d_e = d_mu * p.mu_w.transpose() + d_lv * p.lv_w.transpose();
  const Matrix d_pre = d_e.array() * (1.0 - e.array().square());
  grads->enc_w = input.transpose() * d_pre;
  grads->enc_b = d_pre.colwise().sum();
  return total;
}

ScholarModel::ScholarModel(ScholarConfig config, Featurizer featurizer,
                           ScholarParams params)
    : config_(std::move(config)),
      featurizer_(std::move(featurizer)),
      params_(std::move(params)) {
  params_.validate(featurizer_.vocab().size(), config_.embedding_dim,
                   config_.topics);
}

ClassProbs ScholarModel::predict_example(const Example& ex) const {
  const Example* one[] = {&ex};
  Matrix input(1, static_cast<Index>(featurizer_.vocab().size()) + kC);
  input << length_normalized(bow_matrix(one, featurizer_.vocab().size())),
      Matrix::Zero(1, kC);
  const Matrix e = affine(input, params_.enc_w, params_.enc_b).array().tanh();
  const Matrix theta = softmax_rows(affine(e, params_.mu_w, params_.mu_b));
  return row_to_probs(softmax_rows(affine(theta, params_.cls_w, params_.cls_b)));
}

ClassProbs ScholarModel::predict_proba(const Document& doc) const {
  return predict_example(featurizer_.featurize(doc));
}

std::unique_ptr<ScholarModel> train_scholar(std::span<const Document> train,
                                            const ScholarConfig& config) {
  if (train.empty()) throw Error("train_scholar: empty training set");
  if (config.embedding_dim == 0 || config.topics == 0 || config.batch_size == 0) {
    throw Error("train_scholar: embedding_dim, topics and batch_size must be > 0");
  }
  gold_labels(train);
  std::mt19937_64 rng(config.seed);
  Featurizer featurizer = Featurizer::fit(train, config.vocab, config.truncation);
  const std::vector<Example> examples = featurizer.featurize(train);
  auto [train_rows, dev_rows] = dev_split(examples, config.dev_fraction, config.seed);
  if (train_rows.empty()) std::swap(train_rows, dev_rows);
  const std::size_t v = featurizer.vocab().size();

  auto model = std::make_unique<ScholarModel>(
      config, std::move(featurizer),
      ScholarParams::random(v, config.embedding_dim, config.topics, rng));
  Optimizer optimizer(config.optimizer);
  auto params = model->params().tensors();
  ScholarParams best = model->params();
  double best_f1 = -1;
  std::vector<std::size_t> order = train_rows;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const Example*> batch;
      std::vector<Label> labels;
      for (std::size_t j = start; j < end; ++j) {
        batch.push_back(&examples[order[j]]);
        labels.push_back(*examples[order[j]].label);
      }
      const Matrix noise = standard_normal(batch.size(), config.topics, rng);
      ScholarParams grads;
      try {
        scholar_loss(bow_matrix(batch, v), one_hot(labels), labels,
                     model->params(), noise, &grads);
      } catch (const Error& e) {
        throw Error("scholar training diverged at epoch " + std::to_string(epoch) +
                    ": " + e.what());
      }
      optimizer.step(params, const_tensors(grads));
    }
    double f1 = 0;
    if (!dev_rows.empty()) {
      std::vector<Label> gold, pred;
      for (auto i : dev_rows) {
        gold.push_back(*examples[i].label);
        pred.push_back(model->predict_example(examples[i]).label());
      }
      f1 = metrics(gold, pred).macro_f1;
    }
    if (dev_rows.empty() || f1 > best_f1) {
      best_f1 = f1;
      best = model->params();
    }
  }
  model->params() = std::move(best);
  return model;
}

// --- frozen-encoder head -------------------------------------------------------

double frozen_head_loss(const Matrix& features, std::span<const Label> labels,
                        const FrozenHeadParams& p, FrozenHeadParams* grads) {
  const Index n = features.rows();
  if (n == 0 || static_cast<Index>(labels.size()) != n) {
    throw Error("frozen_head_loss: empty batch or label count mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix y = one_hot(labels);
  const Matrix hidden = affine(features, p.w1, p.b1).array().tanh();
  const Matrix logy = log_softmax_rows(affine(hidden, p.w2, p.b2));
  const double loss = -(y.array() * logy.array()).sum() * inv_n;
  if (!std::isfinite(loss)) throw Error("frozen_head_loss: non-finite loss");
  if (!grads) return loss;
  const Matrix d_out = (logy.array().exp() - y.array()) * inv_n;
  grads->w2 = hidden.transpose() * d_out;
  grads->b2 = d_out.colwise().sum();
  const Matrix d_pre =
      (d_out * p.w2.transpose()).array() * (1.0 - hidden.array().square());
  grads->w1 = features.transpose() * d_pre;
  grads->b1 = d_pre.colwise().sum();
  return loss;
}

FrozenHeadModel::FrozenHeadModel(std::shared_ptr<const ExternalEmbeddings> embeddings,
                                 FrozenHeadParams params)
    : embeddings_(std::move(embeddings)), params_(std::move(params)) {
  if (!embeddings_) throw Error("frozen_head: missing embeddings table");
  const auto d = static_cast<Index>(embeddings_->dim);
  if (params_.w1.rows() != d || params_.w2.cols() != kC ||
      params_.w1.cols() != params_.w2.rows() || params_.b1.cols() != params_.w1.cols() ||
      params_.b2.cols() != kC) {
    throw Error("frozen_head: parameter shapes do not match the embeddings");
  }
}

ClassProbs FrozenHeadModel::predict_features(const Vector& features) const {
  const Matrix hidden =
      affine(features.transpose(), params_.w1, params_.b1).array().tanh();
  return row_to_probs(softmax_rows(affine(hidden, params_.w2, params_.b2)));
}

ClassProbs FrozenHeadModel::predict_proba(const Document& doc) const {
  return predict_features(embeddings_->at(doc.id));
}

std::unique_ptr<FrozenHeadModel> train_frozen_head(
    std::span<const Document> train,
    std::shared_ptr<const ExternalEmbeddings> embeddings,
    const FrozenHeadConfig& config) {
  if (!embeddings) throw Error("train_frozen_head: missing embeddings table");
  if (train.empty()) throw Error("train_frozen_head: empty training set");
  if (config.hidden == 0 || config.batch_size == 0) {
    throw Error("train_frozen_head: hidden and batch_size must be > 0");
  }
  const std::vector<Label> labels = gold_labels(train);
  Matrix features(static_cast<Index>(train.size()),
                  static_cast<Index>(embeddings->dim));
  for (std::size_t i = 0; i < train.size(); ++i) {
    features.row(static_cast<Index>(i)) = embeddings->at(train[i].id).transpose();
  }
  std::mt19937_64 rng(config.seed);
  FrozenHeadParams params{glorot(embeddings->dim, config.hidden, rng),
                          Matrix::Zero(1, static_cast<Index>(config.hidden)),
                          glorot(config.hidden, kNumClasses, rng),
                          Matrix::Zero(1, kC)};
  Optimizer optimizer(config.optimizer);
  auto refs = params.tensors();
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Matrix batch(static_cast<Index>(end - start), features.cols());
      std::vector<Label> batch_labels;
      for (std::size_t j = start; j < end; ++j) {
        batch.row(static_cast<Index>(j - start)) = features.row(static_cast<Index>(order[j]));
        batch_labels.push_back(labels[order[j]]);
      }
      FrozenHeadParams grads;
      frozen_head_loss(batch, batch_labels, params, &grads);
      optimizer.step(refs, const_tensors(grads));
    }
  }
  return std::make_unique<FrozenHeadModel>(std::move(embeddings), std::move(params));
}

}  // namespace narrative
