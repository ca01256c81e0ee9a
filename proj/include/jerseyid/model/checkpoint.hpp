#pragma once

// Checkpoint layout:
//   "JNCK" | u64 LE header length | JSON header | f64 LE payloads
// The header holds the ModelConfig and one {name, shape, dtype} entry per
// parameter; payloads follow in header order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "jerseyid/model/config.hpp"
#include "jerseyid/model/params.hpp"

namespace jerseyid::model {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  nlohmann::json extra = nlohmann::json::object();  // free-form run metadata
};

inline constexpr char kCheckpointMagic[4] = {'J', 'N', 'C', 'K'};

inline void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg,
                            const ModelParams& params,
                            const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json header;
  header["format"] = "jerseyid-checkpoint";
  header["version"] = 1;
  header["config"] = cfg;
  header["extra"] = extra;
  header["params"] = nlohmann::json::array();
  const auto named = params.named();
  for (const auto& p : named)
    header["params"].push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"dtype", "f64"}});
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic, 4);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : named) {
    const auto d = p.tensor.data();
    out.write(reinterpret_cast<const char*>(d.data()),
              static_cast<std::streamsize>(d.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("write failed: " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[4];
  std::uint64_t len = 0;
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw CheckpointError(path.string() + ": not a checkpoint (bad magic)");
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len) || len > (1u << 28))
    throw CheckpointError(path.string() + ": bad header length");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len)))
    throw CheckpointError(path.string() + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": header is not JSON: " + e.what());
  }
  Checkpoint ck;
  try {
    ck.config = header.at("config").get<ModelConfig>();
    ck.config.validate();
  } catch (const std::exception& e) {
    throw CheckpointError(path.string() + ": bad config: " + e.what());
  }
  ck.extra = header.value("extra", nlohmann::json::object());
  ck.params = init_params(ck.config, 0);
  auto named = ck.params.named();
  const auto& entries = header.at("params");
  if (entries.size() != named.size()) {
    throw CheckpointError(path.string() + ": " + std::to_string(entries.size()) +
                          " parameters in file, config implies " + std::to_string(named.size()));
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& e = entries[i];
    const auto name = e.at("name").get<std::string>();
    const auto shape = e.at("shape").get<numkit::Shape>();
    if (name != named[i].name)
      throw CheckpointError(path.string() + ": parameter " + std::to_string(i) + " is '" + name +
                            "', expected '" + named[i].name + "'");
    if (shape != named[i].tensor.shape())
      throw CheckpointError(path.string() + ": " + name + " has shape " +
                            numkit::shape_str(shape) + ", config expects " +
                            numkit::shape_str(named[i].tensor.shape()));
    if (e.value("dtype", "") != "f64")
      throw CheckpointError(path.string() + ": " + name + " has unsupported dtype");
  }
  for (auto& p : named) {
    auto d = p.tensor.mutable_data();
    if (!in.read(reinterpret_cast<char*>(d.data()),
                 static_cast<std::streamsize>(d.size() * sizeof(double))))
      throw CheckpointError(path.string() + ": truncated payload at " + p.name);
  }
  return ck;
}

}  // namespace jerseyid::model
