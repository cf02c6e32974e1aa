#include "narrative/metrics.hpp"

#include "narrative/error.hpp"

namespace narrative {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t n = 0;
  for (const auto& row : counts) {
    for (auto v : row) n += v;
  }
  return n;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) n += counts[i][i];
  return n;
}

std::int64_t ConfusionMatrix::support(Label gold) const {
  std::int64_t n = 0;
  for (auto v : counts[label_index(gold)]) n += v;
  return n;
}

std::int64_t ConfusionMatrix::predicted(Label pred) const {
  std::int64_t n = 0;
  for (const auto& row : counts) n += row[label_index(pred)];
  return n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      counts[i][j] += other.counts[i][j];
    }
  }
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const Label> gold,
                                 std::span<const Label> pred) {
  if (gold.size() != pred.size()) {
    throw Error("confusion_matrix: gold has " + std::to_string(gold.size()) +
                " labels, predictions " + std::to_string(pred.size()));
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++cm.counts[label_index(gold[i])][label_index(pred[i])];
  }
  return cm;
}

RunMetrics run_metrics(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw Error("metrics: empty input");
  RunMetrics m;
  m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  double f1_sum = 0;
  int present = 0;
  for (Label c : kAllLabels) {
    const auto i = label_index(c);
    const double tp = static_cast<double>(cm.counts[i][i]);
    const auto support = cm.support(c);
    const auto predicted = cm.predicted(c);
    const double precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    const double recall = support ? tp / static_cast<double>(support) : 0.0;
    m.per_class_recall[i] = recall;
    m.per_class_f1[i] = precision + recall > 0
                            ? 2 * precision * recall / (precision + recall)
                            : 0.0;
    if (support > 0) {
      f1_sum += m.per_class_f1[i];
      ++present;
    }
  }
  m.macro_f1 = f1_sum / present;
  return m;
}

MetricsReport aggregate(std::span<const ConfusionMatrix> runs) {
  if (runs.empty()) throw Error("metrics: no runs to aggregate");
  MetricsReport r;
  r.n_runs = runs.size();
  for (const auto& cm : runs) {
    RunMetrics m = run_metrics(cm);
    r.accuracy += m.accuracy;
    r.macro_f1 += m.macro_f1;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      r.per_class_f1[c] += m.per_class_f1[c];
      r.per_class_recall[c] += m.per_class_recall[c];
      if (cm.support(label_from_index(c)) > 0) r.present[c] = true;
    }
    r.confusion += cm;
    r.runs.push_back(m);
  }
  const double n = static_cast<double>(runs.size());
  r.accuracy /= n;
  r.macro_f1 /= n;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    r.per_class_f1[c] /= n;
    r.per_class_recall[c] /= n;
  }
  return r;
}

MetricsReport metrics(std::span<const Label> gold, std::span<const Label> pred) {
  if (gold.empty()) throw Error("metrics: empty input");
  ConfusionMatrix cm = confusion_matrix(gold, pred);
  return aggregate(std::span<const ConfusionMatrix>(&cm, 1));
}

}  // namespace narrative
