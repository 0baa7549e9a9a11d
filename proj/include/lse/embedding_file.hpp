#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "lse/embedding.hpp"

namespace lse {

// Binary embedding file, format "LSE1" version 1, all integers little-endian:
//   magic "LSE1" | version u16 | M u32 | row count u64 |
//   source_tag (u32 length + UTF-8) |
//   per row: id (u32 length + UTF-8) + M little-endian f32 |
//   CRC-32 (u32) of all preceding bytes.
// Values are quantized to 32-bit floats on write.
void write_embedding_file(const EmbeddingTable& table, const std::filesystem::path& path);

// Verifies magic, version and CRC; throws FileFormatError with a distinct
// code per failure kind.
EmbeddingTable read_embedding_file(const std::filesystem::path& path);

// Same encoding, to/from memory (used by the transfer protocol).
std::vector<unsigned char> encode_embedding_table(const EmbeddingTable& table);
EmbeddingTable decode_embedding_table(std::span<const unsigned char> bytes);

// Interoperability export: header "id,m0,...,m{M-1}".
void write_embedding_csv(const EmbeddingTable& table, const std::filesystem::path& path);

}  // namespace lse
