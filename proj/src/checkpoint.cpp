#include "narrative/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "narrative/error.hpp"

namespace narrative {
namespace {

constexpr char kMagic[8] = {'N', 'C', 'A', 'N', 'T', 'M', '\x01', '\n'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

const Matrix& Checkpoint::tensor(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw Error("checkpoint has no tensor '" + name + "'");
  return it->second;
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json header = ckpt.header;
  nlohmann::json table = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, m] : ckpt.tensors) {
    table.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()},
                     {"offset", offset}});
    offset += static_cast<std::uint64_t>(m.size()) * sizeof(double);
  }
  header["tensors"] = std::move(table);
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  const std::uint64_t len = text.size();
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!out) throw Error("short write to checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const std::vector<char> bytes = read_all(path);
  const std::string where = "checkpoint " + path.string();
  if (bytes.size() < sizeof kMagic + 8 ||
      std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(where + ": not a model checkpoint");
  }
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + sizeof kMagic, sizeof len);
  const std::size_t body = sizeof kMagic + sizeof len;
  if (len > bytes.size() - body) throw Error(where + ": truncated header");

  Checkpoint ckpt;
  try {
    ckpt.header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(body),
                                        bytes.begin() + static_cast<std::ptrdiff_t>(body + len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + ": malformed header: " + e.what());
  }
  const std::size_t data = body + len;
  const std::size_t available = bytes.size() - data;
  try {
    for (const auto& entry : ckpt.header.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto rows = entry.at("rows").get<std::int64_t>();
      const auto cols = entry.at("cols").get<std::int64_t>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      if (rows < 0 || cols < 0) throw Error(where + ": negative shape for " + name);
      const std::uint64_t n = static_cast<std::uint64_t>(rows * cols) * sizeof(double);
      if (offset > available || n > available - offset) {
        throw Error(where + ": tensor '" + name + "' runs past the end of the file");
      }
      Matrix m(rows, cols);
      std::memcpy(m.data(), bytes.data() + data + offset, n);
      ckpt.tensors.emplace(name, std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + ": malformed tensor table: " + e.what());
  }
  ckpt.header.erase("tensors");
  return ckpt;
}

std::string file_fingerprint(const std::filesystem::path& path) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : read_all(path)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

}  // namespace narrative
