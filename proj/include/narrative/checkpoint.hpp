#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "narrative/nn.hpp"

namespace narrative {

// On-disk layout: the 8-byte magic "NCANTM\x01\n", a little-endian uint64
// header length, a JSON header, then every tensor as little-endian doubles in
// column-major order. The header's "tensors" array records name, shape and
// byte offset of each block.
struct Checkpoint {
  nlohmann::json header = nlohmann::json::object();
  std::map<std::string, Matrix> tensors;

  // Throws Error when the tensor is missing.
  const Matrix& tensor(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// FNV-1a over the file bytes, as 16 hex digits.
std::string file_fingerprint(const std::filesystem::path& path);

}  // namespace narrative
