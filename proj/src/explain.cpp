#include "narrative/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "narrative/error.hpp"

namespace narrative {
namespace {

std::vector<TopicActivation> top_topics(const Vector& z, const Matrix& decoder,
                                        const CantmModel& model,
                                        const ExplainOptions& options) {
  std::vector<std::size_t> order(static_cast<std::size_t>(z.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(z(static_cast<Eigen::Index>(a))) > std::abs(z(static_cast<Eigen::Index>(b)));
  });
  order.resize(std::min(order.size(), options.n_topics));
  std::vector<TopicActivation> out;
  for (std::size_t k : order) {
    out.push_back({k, z(static_cast<Eigen::Index>(k)),
                   rank_row(decoder, k, model.featurizer().vocab(), options.n_words)});
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

TopicWordList rank_row(const Matrix& weights, std::size_t row,
                       const Vocabulary& vocab, std::size_t n) {
  if (row >= static_cast<std::size_t>(weights.rows())) {
    throw Error("rank_row: row " + std::to_string(row) + " out of range (" +
                std::to_string(weights.rows()) + " rows)");
  }
  if (static_cast<std::size_t>(weights.cols()) != vocab.size()) {
    throw Error("rank_row: weight columns do not match the vocabulary size");
  }
  const auto r = static_cast<Eigen::Index>(row);
  std::vector<std::size_t> order(vocab.size());
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    const double wa = weights(r, static_cast<Eigen::Index>(a));
    const double wb = weights(r, static_cast<Eigen::Index>(b));
    if (wa != wb) return wa > wb;
    return vocab.token(a) < vocab.token(b);
  };
  const std::size_t k = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), better);
  TopicWordList out{row, {}};
  for (std::size_t i = 0; i < k; ++i) {
    out.words.push_back({vocab.token(order[i]), weights(r, static_cast<Eigen::Index>(order[i]))});
  }
  return out;
}

TopicWordList topic_words(const CantmModel& model, TopicStage stage,
                          std::size_t topic, std::size_t n) {
  const std::size_t limit =
      stage == TopicStage::m1 ? model.config().topics : model.config().class_topics;
  if (topic >= limit) {
    throw Error("topic " + std::to_string(topic) + " out of range for stage " +
                (stage == TopicStage::m1 ? "m1" : "m2") + " (" +
                std::to_string(limit) + " topics)");
  }
  const Matrix& w =
      stage == TopicStage::m1 ? model.params().m1_dec_w : model.params().m2_dec_w;
  return rank_row(w, topic, model.featurizer().vocab(), n);
}

TopicWordList class_associated_words(const CantmModel& model, Label label,
                                     std::size_t n, ClassWordSource source) {
  const std::size_t c = label_index(label);
  TopicWordList out =
      source == ClassWordSource::classifier_decoder
          ? rank_row(model.params().clsdec_w, c, model.featurizer().vocab(), n)
          : rank_row(model.params().m2_dec_w, model.config().class_topics + c,
                     model.featurizer().vocab(), n);
  out.id = c;
  return out;
}

Explanation explain(const Example& ex, const CantmModel& model,
                    const ExplainOptions& options) {
  Explanation e;
  const EncodedText h = model.encode(ex);
  const GaussianParams q1 = model.posterior_m1(h);
  e.probabilities = classify_m1({q1.mu, LatentSource::m1}, model.params());
  e.predicted = e.probabilities.label();
  const GaussianParams q2 = model.posterior_m2(h, e.probabilities);
  e.attention = h.attention;
  e.z_weights = q1.mu;
  e.z_s_weights = q2.mu;
  e.top_topics_m1 = top_topics(q1.mu, model.params().m1_dec_w, model, options);
  e.top_topics_m2 = top_topics(q2.mu, model.params().m2_dec_w, model, options);
  e.class_words = class_associated_words(model, e.predicted, options.n_words,
                                         options.class_source);
  return e;
}

Explanation explain(const Document& doc, const CantmModel& model,
                    const ExplainOptions& options) {
  return explain(model.featurizer().featurize(doc), model, options);
}

nlohmann::json to_json(const TopicWordList& list) {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : list.words) words.push_back({{"word", w.word}, {"score", w.score}});
  return {{"id", list.id}, {"words", std::move(words)}};
}

nlohmann::json to_json(const Explanation& e) {
  auto topics = [](const std::vector<TopicActivation>& list) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : list) {
      out.push_back({{"topic", t.topic},
                     {"activation", t.activation},
                     {"words", to_json(t.words)["words"]}});
    }
    return out;
  };
  nlohmann::json j;
  if (e.attention) {
    nlohmann::json att = nlohmann::json::array();
    for (const auto& [token, w] : *e.attention) att.push_back({{"token", token}, {"weight", w}});
    j["attention"] = std::move(att);
  } else {
    j["attention"] = nullptr;
  }
  j["z_weights"] = std::vector<double>(e.z_weights.data(), e.z_weights.data() + e.z_weights.size());
  j["z_s_weights"] =
      std::vector<double>(e.z_s_weights.data(), e.z_s_weights.data() + e.z_s_weights.size());
  j["top_topics_m1"] = topics(e.top_topics_m1);
  j["top_topics_m2"] = topics(e.top_topics_m2);
  j["class_words"] = {{"class", label_name(e.predicted)},
                      {"words", to_json(e.class_words)["words"]}};
  return j;
}

std::string render_text(const Explanation& e) {
  std::ostringstream out;
  out << "label: " << label_name(e.predicted) << "\n";
  out << "probabilities:";
  for (Label l : kAllLabels) {
    out << " " << label_name(l) << "=" << fixed(e.probabilities.probs[label_index(l)], 3);
  }
  out << "\n";
  if (e.attention) {
    auto att = *e.attention;
    std::stable_sort(att.begin(), att.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    out << "attention:";
    for (std::size_t i = 0; i < std::min<std::size_t>(att.size(), 10); ++i) {
      out << " " << att[i].first << "(" << fixed(att[i].second, 3) << ")";
    }
    out << "\n";
  }
  auto topics = [&](const char* title, const std::vector<TopicActivation>& list) {
    out << title << ":\n";
    for (const auto& t : list) {
      out << "  topic " << t.topic << " (" << fixed(t.activation, 3) << "):";
      for (const auto& w : t.words.words) out << " " << w.word;
      out << "\n";
    }
  };
  topics("topics z", e.top_topics_m1);
  topics("topics z_s", e.top_topics_m2);
  out << "class words (" << label_name(e.predicted) << "):";
  for (const auto& w : e.class_words.words) out << " " << w.word;
  out << "\n";
  return out.str();
}

}  // namespace narrative
