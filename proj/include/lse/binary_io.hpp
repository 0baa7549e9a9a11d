#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lse/error.hpp"

namespace lse {

// Distinct failure kinds for the binary file formats (embedding files and
// model checkpoints).
enum class FileErrorCode { bad_magic, unsupported_version, crc_mismatch, truncated, invalid };

class FileFormatError : public Error {
public:
    FileFormatError(FileErrorCode code, const std::string& message)
        : Error(ErrorKind::data, message), code_(code) {}

    FileErrorCode code() const { return code_; }

private:
    FileErrorCode code_;
};

// Append-only little-endian byte buffer.
class ByteWriter {
public:
    void put_u8(std::uint8_t v) { buf_.push_back(v); }
    void put_u16(std::uint16_t v) { put_le(v); }
    void put_u32(std::uint32_t v) { put_le(v); }
    void put_u64(std::uint64_t v) { put_le(v); }

    void put_f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        put_u32(bits);
    }

    void put_f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        put_u64(bits);
    }

    void put_bytes(std::span<const unsigned char> bytes) {
        buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    }

    // u32 length prefix + UTF-8 bytes.
    void put_string(const std::string& s) {
        put_u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    const std::vector<unsigned char>& bytes() const { return buf_; }
    std::vector<unsigned char>& bytes() { return buf_; }

private:
    template <typename T>
    void put_le(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i)
            buf_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
    }

    std::vector<unsigned char> buf_;
};

// Bounds-checked little-endian reader over a byte span. Throws
// FileFormatError(truncated) on overruns.
class ByteReader {
public:
    explicit ByteReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

    std::uint8_t get_u8() { return take(1)[0]; }
    std::uint16_t get_u16() { return get_le<std::uint16_t>(); }
    std::uint32_t get_u32() { return get_le<std::uint32_t>(); }
    std::uint64_t get_u64() { return get_le<std::uint64_t>(); }

    float get_f32() {
        const std::uint32_t bits = get_u32();
        float v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    double get_f64() {
        const std::uint64_t bits = get_u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string get_string() {
        const std::uint32_t len = get_u32();
        const auto span = take(len);
        return std::string(reinterpret_cast<const char*>(span.data()), span.size());
    }

    std::span<const unsigned char> take(std::size_t n) {
        if (n > bytes_.size() - pos_)
            throw FileFormatError(FileErrorCode::truncated,
                                  "truncated data: need " + std::to_string(n) + " bytes, have " +
                                      std::to_string(bytes_.size() - pos_));
        const auto span = bytes_.subspan(pos_, n);
        pos_ += n;
        return span;
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    template <typename T>
    T get_le() {
        const auto span = take(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<T>(static_cast<T>(span[i]) << (8 * i));
        return v;
    }

    std::span<const unsigned char> bytes_;
    std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace lse
