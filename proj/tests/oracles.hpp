#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "narrative/eval.hpp"
#include "narrative/labels.hpp"
#include "narrative/synthetic.hpp"

namespace testing {

using narrative::kNumClasses;
using Counts = std::array<std::size_t, kNumClasses>;

// Class counts of the original annotated posts and of the augmented corpus.
inline constexpr Counts kFdCounts = {26, 116, 37, 7, 108, 134, 0};
inline constexpr Counts kAugmentedCounts = {107, 116, 93, 151, 108, 134, 96};

inline Counts added_counts() {
  Counts out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) out[c] = kAugmentedCounts[c] - kFdCounts[c];
  return out;
}

// Published label counts of the augmentation-experiment sets.
struct SplitCounts {
  Counts train_imbalanced, train_balanced, test_six_class, train_seven_class, test_seven_class;
};

inline constexpr SplitCounts kSplitCounts = {
    {16, 81, 26, 114, 76, 94, 0},  {97, 81, 82, 114, 76, 94, 0},
    {10, 35, 11, 37, 32, 40, 0},   {97, 81, 82, 114, 76, 94, 67},
    {10, 35, 11, 37, 32, 40, 29}};

inline Counts label_counts(std::span<const narrative::Document> docs) {
  Counts out{};
  for (const auto& d : docs) ++out[narrative::label_index(*d.label)];
  return out;
}

struct BruteMetrics {
  double accuracy = 0;
  double macro_f1 = 0;
  std::array<double, kNumClasses> f1{};
  std::array<double, kNumClasses> recall{};
};

// Per-class counting straight from the definition: P = tp/(tp+fp),
// R = tp/(tp+fn), F1 = 2PR/(P+R) (0 when undefined); the macro average runs
// over classes that occur in the gold labels.
inline BruteMetrics brute_force_metrics(std::span<const narrative::Label> gold,
                                        std::span<const narrative::Label> pred) {
  BruteMetrics out;
  double f1_sum = 0;
  int classes = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += gold[i] == pred[i];
  out.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto label = narrative::label_from_index(c);
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (pred[i] == label && gold[i] == label) ++tp;
      if (pred[i] == label && gold[i] != label) ++fp;
      if (pred[i] != label && gold[i] == label) ++fn;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0;
    out.f1[c] = p + r > 0 ? 2 * p * r / (p + r) : 0;
    out.recall[c] = r;
    if (tp + fn > 0) {
      f1_sum += out.f1[c];
      ++classes;
    }
  }
  out.macro_f1 = classes ? f1_sum / classes : 0;
  return out;
}

// Example posts listed with the keyword/hashtag rules, with their classes.
inline std::vector<std::pair<narrative::Label, std::string>> rule_table_examples() {
  return {
      {narrative::Label::Cons,
       "Vaccination day. When the time comes, get vaccinated. No one will microchip you like a "
       "cat and 5G will not control your mind."},
      {narrative::Label::Cons,
       "Filled with nano particles to alter our DNA! The Moderna vaccine is the Gates vaccine."},
      {narrative::Label::LF,
       "Before you all start, this is NOT about Pro #Vaccination or those against. This is about "
       "how the #nojabnopay discriminates against free choice and the rich/poor."},
      {narrative::Label::LF,
       "This is how I feel!!! We should have all of our rights and freedoms to choose what is "
       "best for us. #freedom #ourbodyourchoice #NoVaccineForMe #novaccinepassport."},
      {narrative::Label::MRE, "Vatican says use of Covid vaccines made from aborted fetal tissue is ethical."},
      {narrative::Label::MRE,
       "Africans let's rise up and put an end to this menace.. We are not lab rats!! We are not "
       "test tubes!! #Nomorevaccinetesting"},
      {narrative::Label::AnimalVac, "Will Your Pet Need a COVID-19 Vaccine? #covid19 #AnimalHealth"},
      {narrative::Label::AnimalVac,
       "Outbreaks of disease are unpredictable and can have a major financial impact on your "
       "farm business. Vaccination is a planned approach to help to protect your livestock and "
       "improve animal health #VaccinesWork #WorldAnimalVaccinationDay"},
  };
}

}  // namespace testing
