#pragma once

#include <cstdint>
#include <span>

namespace lse {

// CRC-32 (IEEE 802.3, reflected, polynomial 0xEDB88320).
// crc32_of("123456789") == 0xCBF43926.
std::uint32_t crc32_update(std::uint32_t crc, std::span<const unsigned char> bytes);

inline std::uint32_t crc32_of(std::span<const unsigned char> bytes) {
    return crc32_update(0, bytes);
}

}  // namespace lse
