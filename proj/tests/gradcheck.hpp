#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "narrative/cantm.hpp"
#include "narrative/nn.hpp"

namespace testing {

struct GradCheck {
  std::size_t checked = 0;
  std::size_t within = 0;  // entries with relative error <= tolerance
  double worst = 0;
  std::string worst_name;
};

// Central differences over every entry of `params`, compared against the
// matching entry of `grads`. Relative error is |a - n| / max(|a|, |n|, 1e-8).
inline GradCheck check_gradients(const std::vector<narrative::TensorRef>& params,
                                 const std::vector<narrative::ConstTensorRef>& grads,
                                 const std::function<double()>& loss, double tolerance,
                                 double step = 1e-5) {
  GradCheck out;
  for (std::size_t k = 0; k < params.size(); ++k) {
    narrative::Matrix& m = *params[k].value;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double original = m.data()[i];
      m.data()[i] = original + step;
      const double up = loss();
      m.data()[i] = original - step;
      const double down = loss();
      m.data()[i] = original;
      const double numeric = (up - down) / (2 * step);
      const double analytic = grads[k].value->data()[i];
      const double rel = std::abs(numeric - analytic) /
                         std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      ++out.checked;
      if (rel <= tolerance) ++out.within;
      if (rel > out.worst) {
        out.worst = rel;
        out.worst_name = params[k].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

// Gradient check of the full pipeline loss on the tiny configuration
// (D_h=4, K=3, K_s=2, V=10, batch 2, fixed noise). Parameters are perturbed
// away from the initializer so no block sits at a symmetric point.
inline GradCheck check_tiny_cantm(narrative::EncoderKind kind, bool teacher_forcing,
                                  std::uint64_t seed, double tolerance = 1e-4) {
  using namespace narrative;
  std::mt19937_64 rng(seed);
  std::vector<std::string> words;
  for (int i = 0; i < 10; ++i) words.push_back("w" + std::to_string(i));
  Featurizer fz(Vocabulary(words), TruncationStrategy::head(400));
  Document d1{"a", "w1 w2 w2 w3 w9 zz", Platform::twitter, Label::LF, Origin::fd, {}};
  Document d2{"b", "w0 w5 w5 w5 w7", Platform::twitter, Label::SEN, Origin::fd, {}};
  const std::vector<Example> ex = {fz.featurize(d1), fz.featurize(d2)};
  CantmConfig cfg;
  cfg.topics = 3;
  cfg.class_topics = 2;
  cfg.encoder = {kind, 4, true};
  cfg.loss.m2_teacher_forcing = teacher_forcing;
  cfg.loss.weights = {1.0, 0.7, 1.3, 0.9, 1.1, 0.8, 1.2};
  Encoder enc = Encoder::create(cfg.encoder, 10, rng);
  if (kind == EncoderKind::embed_avg) enc.params().attention = glorot(4, 1, rng);
  CantmParams p = CantmParams::random({4, 3, 2, 10}, rng);
  for (auto& t : p.tensors()) {
    *t.value += 0.3 * glorot(static_cast<std::size_t>(t.value->rows()),
                             static_cast<std::size_t>(t.value->cols()), rng);
  }
  CantmModel model(cfg, fz, enc, p);
  const std::vector<const Example*> batch = {&ex[0], &ex[1]};
  const LatentNoise noise{standard_normal(2, 3, rng), standard_normal(2, 2, rng)};
  CantmParams g = CantmParams::zeros({4, 3, 2, 10});
  EncoderParams eg = zeros_like(model.encoder().params());
  cantm_pipeline_loss(model, batch, noise, &g, &eg);
  auto params = model.params().tensors();
  for (auto& t : model.encoder().params().tensors()) params.push_back(t);
  auto grads = const_tensors(g);
  for (auto& t : const_tensors(eg)) grads.push_back(t);
  return check_gradients(params, grads,
                         [&] { return cantm_pipeline_loss(model, batch, noise).total; },
                         tolerance);
}

}  // namespace testing
