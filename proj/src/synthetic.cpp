#include "narrative/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "narrative/error.hpp"

namespace narrative {
namespace {

std::string two_digits(std::size_t j) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", j);
  return buf;
}

}  // namespace

std::string class_word(Label label, std::size_t j) {
  return "c" + std::to_string(label_index(label)) + "w" + two_digits(j);
}

std::string noise_word(std::size_t j) { return "n" + two_digits(j); }

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.class_words == 0 || spec.min_len == 0 || spec.min_len > spec.max_len) {
    throw Error("synthetic: need class_words > 0 and 0 < min_len <= max_len");
  }
  if (spec.class_ratio < 0 || spec.class_ratio > 1) {
    throw Error("synthetic: class_ratio must lie in [0, 1]");
  }
  if (spec.class_ratio < 1 && spec.noise_words == 0) {
    throw Error("synthetic: noise tokens requested but noise_words = 0");
  }
  SyntheticCorpus out;
  for (Label l : kAllLabels) {
    for (std::size_t j = 0; j < spec.class_words; ++j) {
      out.keywords[label_index(l)].push_back(class_word(l, j));
    }
  }
  for (std::size_t j = 0; j < spec.noise_words; ++j) out.noise.push_back(noise_word(j));

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> length(spec.min_len, spec.max_len);
  std::uniform_int_distribution<std::size_t> pick_class(0, spec.class_words - 1);
  std::uniform_int_distribution<std::size_t> pick_noise(
      0, spec.noise_words == 0 ? 0 : spec.noise_words - 1);
  std::bernoulli_distribution from_class(spec.class_ratio);

  std::size_t serial = 0;
  for (Label l : kAllLabels) {
    const auto& words = out.keywords[label_index(l)];
    for (std::size_t d = 0; d < spec.docs_per_class[label_index(l)]; ++d) {
      const std::size_t n = length(rng);
      std::string text;
      for (std::size_t t = 0; t < n; ++t) {
        if (t) text += ' ';
        text += from_class(rng) ? words[pick_class(rng)] : out.noise[pick_noise(rng)];
      }
      char id[64];
      std::snprintf(id, sizeof id, "%s-%05zu", spec.id_prefix.c_str(), ++serial);
      Document doc;
      doc.id = id;
      doc.text = std::move(text);
      doc.label = l;
      doc.origin = Origin::fd;
      out.documents.push_back(std::move(doc));
    }
  }
  std::shuffle(out.documents.begin(), out.documents.end(), rng);
  return out;
}

std::vector<Document> count_replay_corpus(
    const std::array<std::size_t, kNumClasses>& fd,
    const std::array<std::size_t, kNumClasses>& added) {
  std::vector<Document> out;
  auto emit = [&](Label l, std::size_t n, Origin origin, const char* tag) {
    for (std::size_t i = 0; i < n; ++i) {
      Document doc;
      doc.id = std::string(tag) + "-" + std::string(label_name(l)) + "-" +
               std::to_string(i + 1);
      doc.text = "post " + doc.id;
      doc.label = l;
      doc.origin = origin;
      out.push_back(std::move(doc));
    }
  };
  for (Label l : kAllLabels) emit(l, fd[label_index(l)], Origin::fd, "fd");
  for (Label l : kAllLabels) emit(l, added[label_index(l)], Origin::augmented, "aug");
  return out;
}

}  // namespace narrative
