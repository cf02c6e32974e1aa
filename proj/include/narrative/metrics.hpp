#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "narrative/labels.hpp"

namespace narrative {

// Rows are gold classes, columns predictions, both in label order.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

  std::int64_t total() const;
  std::int64_t trace() const;
  std::int64_t support(Label gold) const;      // row sum
  std::int64_t predicted(Label pred) const;    // column sum
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct RunMetrics {
  double accuracy = 0;
  double macro_f1 = 0;
  std::array<double, kNumClasses> per_class_f1{};
  std::array<double, kNumClasses> per_class_recall{};
};

// Aggregate over one or more runs (folds or repeats). Scalars are means over
// runs; the confusion matrix is the sum.
struct MetricsReport {
  double accuracy = 0;
  double macro_f1 = 0;
  std::array<double, kNumClasses> per_class_f1{};
  std::array<double, kNumClasses> per_class_recall{};
  // Classes with gold support in at least one run.
  std::array<bool, kNumClasses> present{};
  ConfusionMatrix confusion;
  std::size_t n_runs = 0;
  std::vector<RunMetrics> runs;
};

ConfusionMatrix confusion_matrix(std::span<const Label> gold,
                                 std::span<const Label> pred);

// F1 = 2PR/(P+R), 0 when P+R = 0. Macro-F1 averages classes with gold
// support only.
RunMetrics run_metrics(const ConfusionMatrix& cm);

MetricsReport metrics(std::span<const Label> gold, std::span<const Label> pred);

// Combines per-run confusion matrices; runs are taken in the given order.
MetricsReport aggregate(std::span<const ConfusionMatrix> runs);

}  // namespace narrative
