#pragma once

#include <string>

#include "abmix/nd/param_store.hpp"

namespace abmix::nd {

/// Versioned binary checkpoint: magic "ABMX", u32 format version, flags, the
/// store's step count, then a name table (name, shape) followed by the raw
/// little-endian float64 payload of every entry in name order. Round trips are
/// bit-exact. `include_moments` appends Adam m/v buffers after the weights.
void save_checkpoint(const ParamStore& store, const std::string& path,
                     bool include_moments = false);

/// Reads a checkpoint into `store`: existing entries are shape-checked and
/// overwritten, unknown names are created. Returns nothing; step count is
/// restored onto the store.
void load_checkpoint(ParamStore& store, const std::string& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace abmix::nd
