#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "narrative/baselines.hpp"
#include "narrative/cantm.hpp"

namespace narrative {

enum class ModelKind { cantm, bow_lr, scholar, frozen_head };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

// Everything needed to train any of the classifiers.
struct ModelSpec {
  ModelKind kind = ModelKind::cantm;
  CantmConfig cantm;
  BowLrConfig bow_lr;
  ScholarConfig scholar;
  FrozenHeadConfig frozen_head;
  // Required by the external encoder and the frozen head.
  std::shared_ptr<const ExternalEmbeddings> embeddings;
};

nlohmann::json config_to_json(const CantmConfig& c);
CantmConfig cantm_config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const BowLrConfig& c);
BowLrConfig bow_lr_config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScholarConfig& c);
ScholarConfig scholar_config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const FrozenHeadConfig& c);
FrozenHeadConfig frozen_head_config_from_json(const nlohmann::json& j);

// Overlays the keys present in `j` ({"cantm": {...}, "bow_lr": {...}, ...})
// onto `spec`.
void apply_config(ModelSpec& spec, const nlohmann::json& j);

// Trains the model named by spec.kind; `seed` replaces the config seed.
std::unique_ptr<TextClassifier> train_model(const ModelSpec& spec,
                                            std::span<const Document> train,
                                            std::uint64_t seed);

void save_model(const TextClassifier& model, const std::filesystem::path& path);
// Rebuilds the model and checks every tensor shape against the stored
// configuration; throws Error on any mismatch.
std::unique_ptr<TextClassifier> load_model(const std::filesystem::path& path);

}  // namespace narrative
