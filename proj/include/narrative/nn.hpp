#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace narrative {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// A named, mutable view of one parameter block. Models list their blocks in
// a fixed order; optimizers, gradient checks and checkpoints rely on it.
struct TensorRef {
  std::string name;
  Matrix* value;
};

struct ConstTensorRef {
  std::string name;
  const Matrix* value;
};

// Row-wise normalized exponential, shifted by the row max.
Matrix softmax_rows(const Matrix& logits);
Matrix log_softmax_rows(const Matrix& logits);

// Backprop through a row softmax: given p = softmax(l) and dL/dp, dL/dl.
Matrix softmax_backward(const Matrix& probs, const Matrix& grad_probs);

// Adds a bias row vector to every row.
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b);

// First index holding the maximum; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

bool all_finite(const Matrix& m);

// Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)).
Matrix glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

Matrix standard_normal(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& text);

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  // params[i] is updated with grads[i]; both lists must keep their order and
  // shapes between calls.
  void step(std::span<const TensorRef> params,
            std::span<const ConstTensorRef> grads);

 private:
  OptimizerConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long steps_ = 0;
};

// Zero-filled copies of every block, same names and shapes.
template <class Params>
Params zeros_like(const Params& p) {
  Params out = p;
  for (auto& t : out.tensors()) t.value->setZero();
  return out;
}

template <class Params>
std::vector<ConstTensorRef> const_tensors(const Params& p) {
  std::vector<ConstTensorRef> out;
  for (auto& t : const_cast<Params&>(p).tensors()) {
    out.push_back({t.name, t.value});
  }
  return out;
}

}  // namespace narrative
