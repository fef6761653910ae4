#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "ghr/param_store.hpp"

namespace ghr {

// Binary container:
//   "GHRCKPT\0"  u32 version  u64 header_len  header (UTF-8 JSON)
//   u32 count, then per parameter:
//   u32 name_len  name  u64 rows  u64 cols  u8 width (4|8)  little-endian IEEE-754 data
// The header carries the model configuration and the list of frozen
// (non-trainable) parameter names.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json header;
  ParamStore params;
};

void write_checkpoint(std::ostream& os, const ParamStore& params, const nlohmann::json& config,
                      int element_width = 8);
Checkpoint read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params,
                     const nlohmann::json& config, int element_width = 8);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ghr
