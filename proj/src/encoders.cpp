#include "narrative/encoders.hpp"

#include <fstream>
#include <sstream>

#include "narrative/error.hpp"

namespace narrative {

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::bow_mlp:
      return "bow_mlp";
    case EncoderKind::embed_avg:
      return "embed_avg";
    case EncoderKind::external:
      return "external";
  }
  return {};
}

EncoderKind parse_encoder_kind(const std::string& text) {
  if (text == "bow_mlp") return EncoderKind::bow_mlp;
  if (text == "embed_avg") return EncoderKind::embed_avg;
  if (text == "external") return EncoderKind::external;
  throw Error("unknown encoder kind: " + text);
}

const Vector& ExternalEmbeddings::at(const std::string& id) const {
  auto it = vectors.find(id);
  if (it == vectors.end()) {
    throw Error("external embeddings have no vector for document id '" + id +
                "'");
  }
  return it->second;
}

ExternalEmbeddings load_external_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file: " + path.string());
  ExternalEmbeddings table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t declared_rows = 0;  // 0 = not declared
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string id;
    if (!(fields >> id)) continue;
    if (!header_seen) {
      // "id <dim>", or word2vec style "<rows> <dim>".
      header_seen = true;
      std::string dim_text, extra;
      if (!(fields >> dim_text) || (fields >> extra)) {
        throw Error(path.string() + ":" + std::to_string(line_no) +
                    ": header must be 'id <dim>' or '<rows> <dim>'");
      }
      try {
        table.dim = std::stoul(dim_text);
        if (id != "id") declared_rows = std::stoul(id);
      } catch (const std::exception&) {
        throw Error(path.string() + ":" + std::to_string(line_no) +
                    ": header must be 'id <dim>' or '<rows> <dim>'");
      }
      if (table.dim == 0) throw Error(path.string() + ": dimension must be > 0");
      continue;
    }
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (!fields.eof()) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": non-numeric value");
    }
    if (values.size() != table.dim) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": dimension mismatch, expected " + std::to_string(table.dim) +
                  " values, got " + std::to_string(values.size()));
    }
    Vector vec = Eigen::Map<Vector>(values.data(),
                                    static_cast<Eigen::Index>(values.size()));
    if (!vec.allFinite()) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": non-finite value");
    }
    if (!table.vectors.emplace(id, std::move(vec)).second) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": duplicate id '" + id + "'");
    }
  }
  if (table.vectors.empty()) {
    throw Error("embeddings file has no vectors: " + path.string());
  }
  if (declared_rows && declared_rows != table.vectors.size()) {
    throw Error(path.string() + ": header declares " +
                std::to_string(declared_rows) + " rows, file has " +
                std::to_string(table.vectors.size()));
  }
  return table;
}

std::vector<TensorRef> EncoderParams::tensors() {
  std::vector<TensorRef> out;
  if (w.size()) out.push_back({"encoder.w", &w});
  if (b.size()) out.push_back({"encoder.b", &b});
  if (embedding.size()) out.push_back({"encoder.embedding", &embedding});
  if (attention.size()) out.push_back({"encoder.attention", &attention});
  return out;
}

Encoder Encoder::create(const EncoderSpec& spec, std::size_t vocab_size,
                        std::mt19937_64& rng) {
  if (spec.dim < 1) throw Error("encoder dimension must be >= 1");
  Encoder e;
  e.spec_ = spec;
  e.vocab_size_ = vocab_size;
  const auto d = static_cast<Eigen::Index>(spec.dim);
  switch (spec.kind) {
    case EncoderKind::bow_mlp:
      e.params_.w = glorot(vocab_size, spec.dim, rng);
      e.params_.b = Matrix::Zero(1, d);
      break;
    case EncoderKind::embed_avg:
      e.params_.embedding = glorot(vocab_size + 1, spec.dim, rng);
      if (spec.learned_attention) e.params_.attention = Matrix::Zero(d, 1);
      break;
    case EncoderKind::external:
      throw Error("external encoders are built from an embeddings table");
  }
  return e;
}

Encoder Encoder::from_external(std::shared_ptr<const ExternalEmbeddings> table) {
  if (!table || table->dim == 0) throw Error("empty external embeddings table");
  Encoder e;
  e.spec_ = {EncoderKind::external, table->dim, false};
  e.external_ = std::move(table);
  return e;
}

Encoder Encoder::from_params(const EncoderSpec& spec, std::size_t vocab_size,
                             EncoderParams params) {
  const auto d = static_cast<Eigen::Index>(spec.dim);
  const auto v = static_cast<Eigen::Index>(vocab_size);
  auto expect = [](const Matrix& m, Eigen::Index r, Eigen::Index c,
                   const char* name) {
    if (m.rows() != r || m.cols() != c) {
      throw Error(std::string("encoder tensor '") + name + "' has shape " +
                  std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                  ", expected " + std::to_string(r) + "x" + std::to_string(c));
    }
  };
  if (spec.kind == EncoderKind::bow_mlp) {
    expect(params.w, v, d, "encoder.w");
    expect(params.b, 1, d, "encoder.b");
  } else if (spec.kind == EncoderKind::embed_avg) {
    expect(params.embedding, v + 1, d, "encoder.embedding");
    if (spec.learned_attention) expect(params.attention, d, 1, "encoder.attention");
  } else {
    throw Error("external encoders are built from an embeddings table");
  }
  Encoder e;
  e.spec_ = spec;
  e.vocab_size_ = vocab_size;
  e.params_ = std::move(params);
  return e;
}

Vector Encoder::attention_weights(const Example& ex) const {
  const auto n = static_cast<Eigen::Index>(ex.token_ids.size());
  if (n == 0) return Vector();
  if (!spec_.learned_attention) return Vector::Constant(n, 1.0 / n);
  Vector scores(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    scores(t) = params_.embedding.row(ex.token_ids[t]).dot(params_.attention.col(0));
  }
  scores.array() -= scores.maxCoeff();
  Vector w = scores.array().exp();
  return w / w.sum();
}

Matrix Encoder::forward(std::span<const Example* const> batch, Cache* cache) const {
  const auto rows = static_cast<Eigen::Index>(batch.size());
  const auto d = static_cast<Eigen::Index>(spec_.dim);
  Matrix h(rows, d);
  Cache local;
  Cache& c = cache ? *cache : local;
  c.batch.assign(batch.begin(), batch.end());
  switch (spec_.kind) {
    case EncoderKind::bow_mlp: {
      c.input = bow_matrix(batch, vocab_size_);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double n = c.input.row(i).sum();
        if (n > 0) c.input.row(i) /= n;
      }
      h = affine(c.input, params_.w, params_.b).array().tanh();
      break;
    }
    case EncoderKind::embed_avg: {
      c.weights.clear();
      for (Eigen::Index i = 0; i < rows; ++i) {
        const Example& ex = *batch[static_cast<std::size_t>(i)];
        Vector w = attention_weights(ex);
        RowVector mean = RowVector::Zero(d);
        for (Eigen::Index t = 0; t < w.size(); ++t) {
          mean += w(t) * params_.embedding.row(ex.token_ids[t]);
        }
        h.row(i) = mean.array().tanh();
        c.weights.push_back(std::move(w));
      }
      break;
    }
    case EncoderKind::external: {
      for (Eigen::Index i = 0; i < rows; ++i) {
        h.row(i) = external_->at(batch[static_cast<std::size_t>(i)]->id).transpose();
      }
      break;
    }
  }
  c.h = h;
  return h;
}

void Encoder::backward(const Cache& cache, const Matrix& grad_h,
                       EncoderParams& grads) const {
  if (spec_.kind == EncoderKind::external) return;
  Matrix grad_pre = grad_h.array() * (1.0 - cache.h.array().square());
  if (spec_.kind == EncoderKind::bow_mlp) {
    grads.w += cache.input.transpose() * grad_pre;
    grads.b += grad_pre.colwise().sum();
    return;
  }
  for (std::size_t i = 0; i < cache.batch.size(); ++i) {
    const Example& ex = *cache.batch[i];
    const Vector& w = cache.weights[i];
    const RowVector g = grad_pre.row(static_cast<Eigen::Index>(i));
    const auto n = w.size();
    if (n == 0) continue;
    for (Eigen::Index t = 0; t < n; ++t) {
      grads.embedding.row(ex.token_ids[t]) += w(t) * g;
    }
    if (!spec_.learned_attention) continue;
    // mean = sum_t w_t e_t with w = softmax(e_t . a)
    Vector dw(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      dw(t) = params_.embedding.row(ex.token_ids[t]).dot(g);
    }
    const double avg = w.dot(dw);
    for (Eigen::Index t = 0; t < n; ++t) {
      const double ds = w(t) * (dw(t) - avg);
      grads.embedding.row(ex.token_ids[t]) +=
          ds * params_.attention.col(0).transpose();
      grads.attention.col(0) +=
          ds * params_.embedding.row(ex.token_ids[t]).transpose();
    }
  }
}

EncodedText Encoder::encode(const Example& ex) const {
  const Example* one[] = {&ex};
  Cache cache;
  Matrix h = forward(one, &cache);
  EncodedText out;
  out.h = h.row(0).transpose();
  if (spec_.kind == EncoderKind::embed_avg) {
    std::vector<std::pair<std::string, double>> att;
    const Vector& w = cache.weights[0];
    for (Eigen::Index t = 0; t < w.size(); ++t) {
      att.emplace_back(ex.tokens[static_cast<std::size_t>(t)], w(t));
    }
    out.attention = std::move(att);
  }
  return out;
}

}  // namespace narrative
