#pragma once

#include <cstdint>
#include <string>

#include "dlac/model.hpp"

namespace dlac {

inline constexpr char kCheckpointMagic[4] = {'D', 'L', 'A', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: magic, version u32 LE, u32-length-prefixed config block (key=value
// lines), then per tensor: u32 name length + name, u32 rank, u32 dims, raw
// little-endian float payload. Round trips are bit-exact.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

// Exact file size for a given config, handy as a serialization cross-check.
std::size_t checkpoint_byte_size(const Model& model);

}  // namespace dlac
