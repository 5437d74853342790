#pragma once

#include "dbdl/training.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace dbdl {

// Binary layout, little-endian, matrices row-major:
//
//   "DBDL"  u32 version
//   u32 k   u32 p   u32 N_c
//   f64 theta[k*k]
//   f64 D^h[N_h * N_c]
//   u32 n   u8 config_text[n]          (UTF-8 key = value lines)
//   u32 m   f64 trace[m * 3]           (hr, lr, sparsity per iteration)
//   u32 has_dense [u32 rows u32 cols f64 B[rows * cols]]
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const ModelCheckpoint& checkpoint);
ModelCheckpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

} // namespace dbdl
