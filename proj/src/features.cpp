#include "narrative/features.hpp"

namespace narrative {

Featurizer Featurizer::fit(std::span<const Document> docs,
                           const VocabOptions& options,
                           const TruncationStrategy& truncation) {
  std::vector<TokenSeq> seqs;
  seqs.reserve(docs.size());
  for (const auto& d : docs) {
    seqs.push_back(truncate(tokenize(clean(d.content())), truncation));
  }
  return Featurizer(build_vocab(seqs, options), truncation);
}

Example Featurizer::featurize(const Document& doc) const {
  Example ex;
  ex.id = doc.id;
  ex.label = doc.label;
  TokenSeq all = tokenize(clean(doc.content()));
  ex.truncated = all.size() > truncation_.budget();
  ex.tokens = truncate(all, truncation_);
  ex.token_ids.reserve(ex.tokens.size());
  for (const auto& t : ex.tokens) {
    ex.token_ids.push_back(
        vocab_.index_of(t).value_or(static_cast<std::uint32_t>(vocab_.size())));
  }
  ex.bow = to_bow(ex.tokens, vocab_);
  return ex;
}

std::vector<Example> Featurizer::featurize(std::span<const Document> docs) const {
  std::vector<Example> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(featurize(d));
  return out;
}

Matrix bow_matrix(std::span<const Example* const> batch, std::size_t vocab_size) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(batch.size()),
                          static_cast<Eigen::Index>(vocab_size));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (const auto& [idx, count] : batch[i]->bow.entries) {
      x(static_cast<Eigen::Index>(i), idx) = count;
    }
  }
  return x;
}

}  // namespace narrative
