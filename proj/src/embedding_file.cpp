#include "lse/embedding_file.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "lse/binary_io.hpp"
#include "lse/crc32.hpp"
#include "lse/error.hpp"

namespace lse {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'E', '1'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

std::vector<unsigned char> encode_embedding_table(const EmbeddingTable& table) {
    table.validate();
    ByteWriter w;
    w.put_bytes(std::span(reinterpret_cast<const unsigned char*>(kMagic), 4));
    w.put_u16(kVersion);
    w.put_u32(static_cast<std::uint32_t>(table.latent_dim()));
    w.put_u64(table.num_rows());
    w.put_string(table.source_tag);
    for (std::size_t i = 0; i < table.num_rows(); ++i) {
        w.put_string(table.ids[i]);
        const double* row = table.vectors.row(i);
        for (std::size_t c = 0; c < table.latent_dim(); ++c)
            w.put_f32(static_cast<float>(row[c]));
    }
    w.put_u32(crc32_of(w.bytes()));
    return std::move(w.bytes());
}

EmbeddingTable decode_embedding_table(std::span<const unsigned char> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FileFormatError(FileErrorCode::bad_magic, "not an embedding file (bad magic)");
    if (bytes.size() < 22)
        throw FileFormatError(FileErrorCode::truncated, "embedding data shorter than its fixed header");

    const std::uint32_t stored_crc = static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
                                     (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
                                     (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
                                     (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
    if (crc32_of(bytes.subspan(0, bytes.size() - 4)) != stored_crc)
        throw FileFormatError(FileErrorCode::crc_mismatch, "embedding data failed its CRC check");

    ByteReader r(bytes.subspan(0, bytes.size() - 4));
    r.take(4);
    const std::uint16_t version = r.get_u16();
    if (version != kVersion)
        throw FileFormatError(FileErrorCode::unsupported_version,
                              "embedding format version " + std::to_string(version) + " unsupported");
    const std::uint32_t m = r.get_u32();
    const std::uint64_t rows = r.get_u64();

    EmbeddingTable table;
    table.source_tag = r.get_string();
    table.ids.reserve(rows);
    table.vectors = Matrix(rows, m);
    for (std::uint64_t i = 0; i < rows; ++i) {
        table.ids.push_back(r.get_string());
        double* row = table.vectors.row(i);
        for (std::uint32_t c = 0; c < m; ++c) {
            const float v = r.get_f32();
            if (!std::isfinite(v))
                throw FileFormatError(FileErrorCode::invalid,
                                      "non-finite embedding value in row " + std::to_string(i));
            row[c] = static_cast<double>(v);
        }
    }
    if (r.remaining() != 0)
        throw FileFormatError(FileErrorCode::invalid,
                              "embedding data has " + std::to_string(r.remaining()) + " trailing bytes");
    table.validate();
    return table;
}

void write_embedding_file(const EmbeddingTable& table, const std::filesystem::path& path) {
    const auto bytes = encode_embedding_table(table);
    write_file_bytes(path, bytes);
}

EmbeddingTable read_embedding_file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_embedding_table(bytes);
    } catch (const FileFormatError& e) {
        throw FileFormatError(e.code(), "'" + path.string() + "': " + e.what());
    }
}

void write_embedding_csv(const EmbeddingTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lse::runtime_error("cannot write '" + path.string() + "'");
    out << "id";
    for (std::size_t c = 0; c < table.latent_dim(); ++c) out << ",m" << c;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < table.num_rows(); ++i) {
        out << table.ids[i];
        const double* row = table.vectors.row(i);
        for (std::size_t c = 0; c < table.latent_dim(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.9g", row[c]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace lse
