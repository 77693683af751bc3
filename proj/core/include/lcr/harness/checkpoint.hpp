#pragma once

#include <cstdint>
#include <filesystem>

#include "lcr/numerics/parameter.hpp"

namespace lcr::harness {

// Flat little-endian parameter file:
//   "LCRCKPT\0" | u32 version | u32 tensor count
//   per tensor: u32 rank | u64 dims[rank]
//   payload: every tensor's values as row-major float64, in table order
inline constexpr std::uint32_t checkpoint_version = 1;

void save_checkpoint(const std::filesystem::path& path, const numerics::ParameterList& params);

// Loads into params; the stored shape table must match their shapes exactly.
void load_checkpoint(const std::filesystem::path& path, const numerics::ParameterList& params);

}  // namespace lcr::harness
