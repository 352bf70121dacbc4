#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memclust/core.hpp"

namespace memclust {

// Memory tensor container ("MEMT"):
//
//   offset  size  field
//        0     4  magic "MEMT"
//        4     2  version (u16, currently 1)
//        6     4  D_m (u32)  rows per block
//       10     4  D_e (u32)  columns
//       14     4  count (u32) number of blocks
//       18     1  float width in bytes (4 = f32, 8 = f64)
//       19     5  reserved, zero
//       24        count * D_m * D_e little-endian IEEE-754 values
//                 JSON trailer to end of file
//
// All integers are little-endian. The trailer always has "blocks", an object
// mapping the decimal block index to a doc id. Compressed memories add
// "strategy", "effective_k" and "provenance".

inline constexpr std::uint16_t kMemoryFormatVersion = 1;
inline constexpr std::size_t kMemoryHeaderSize = 24;

struct MemoryFile {
    std::uint32_t d_m = 0;
    std::uint32_t d_e = 0;
    std::uint8_t float_width = 4;
    std::vector<Matrix> blocks;
    std::vector<std::string> block_doc_ids;
    std::string trailer_json;
};

std::string encode_memory_set(std::span<const MemoryTokens> memories);
std::string encode_compressed_memory(const CompressedMemory& memory);
/// Parses either flavor. Throws format-error on bad magic, version, or size.
MemoryFile decode_memory_file(std::string_view bytes);

std::vector<MemoryTokens> to_memory_tokens(const MemoryFile& file);
CompressedMemory to_compressed_memory(const MemoryFile& file);

void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// Nested-array debug form: {"d_m":..,"d_e":..,"memories":[{"doc_id":..,"tokens":[[..],..]}]}
std::string memory_set_to_debug_json(std::span<const MemoryTokens> memories);
std::vector<MemoryTokens> memory_set_from_debug_json(std::string_view text);

}  // namespace memclust
