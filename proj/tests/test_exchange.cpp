#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <future>
#include <thread>

#include "lse/binary_io.hpp"
#include "lse/crc32.hpp"
#include "lse/embedding_file.hpp"
#include "lse/error.hpp"
#include "lse/rng.hpp"
#include "lse/wire.hpp"

using namespace lse;
namespace fs = std::filesystem;

namespace {

EmbeddingTable random_table(Rng& rng, std::size_t rows, std::size_t dim) {
    EmbeddingTable t;
    t.source_tag = "peer" + std::to_string(rng.below(100));
    t.vectors = Matrix(rows, dim);
    for (double& v : t.vectors.values()) v = rng.normal();
    for (std::size_t i = 0; i < rows; ++i) t.ids.push_back("id" + std::to_string(i));
    return t;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("lse_exchange_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Raw TCP client for protocol-violation tests.
struct RawClient {
    int fd = -1;
    explicit RawClient(std::uint16_t port) {
        fd = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd >= 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    }
    ~RawClient() {
        if (fd >= 0) ::close(fd);
    }
    void write_frame(std::uint8_t type, const std::vector<unsigned char>& payload) {
        std::vector<unsigned char> buf;
        buf.push_back(type);
        for (int i = 0; i < 4; ++i)
            buf.push_back(static_cast<unsigned char>((payload.size() >> (8 * i)) & 0xFF));
        buf.insert(buf.end(), payload.begin(), payload.end());
        (void)!::send(fd, buf.data(), buf.size(), MSG_NOSIGNAL);
    }
};

}  // namespace

TEST_CASE("crc32 matches the standard check value") {
    const char* input = "123456789";
    CHECK(crc32_of(std::span(reinterpret_cast<const unsigned char*>(input), 9)) == 0xCBF43926u);

    // Streaming in chunks equals one-shot.
    std::uint32_t crc = 0;
    crc = crc32_update(crc, std::span(reinterpret_cast<const unsigned char*>(input), 4));
    crc = crc32_update(crc, std::span(reinterpret_cast<const unsigned char*>(input + 4), 5));
    CHECK(crc == 0xCBF43926u);
}

TEST_CASE("embedding files round trip up to f32 quantization") {
    Rng rng(1);
    const EmbeddingTable table = random_table(rng, 3, 4);
    const fs::path path = fs::temp_directory_path() / "lse_roundtrip.lse";
    write_embedding_file(table, path);
    const EmbeddingTable back = read_embedding_file(path);
    CHECK(back.ids == table.ids);
    CHECK(back.source_tag == table.source_tag);
    REQUIRE(back.vectors.rows() == 3);
    REQUIRE(back.vectors.cols() == 4);
    for (std::size_t i = 0; i < table.vectors.size(); ++i) {
        const float quantized = static_cast<float>(table.vectors.values()[i]);
        CHECK(back.vectors.values()[i] == static_cast<double>(quantized));
    }
}

TEST_CASE("every single-byte flip is detected") {
    Rng rng(2);
    const EmbeddingTable table = random_table(rng, 5, 3);
    const std::vector<unsigned char> bytes = encode_embedding_table(table);
    for (int trial = 0; trial < 64; ++trial) {
        std::vector<unsigned char> corrupted = bytes;
        const std::size_t pos = rng.below(corrupted.size());
        unsigned char flip = static_cast<unsigned char>(1u << rng.below(8));
        corrupted[pos] ^= flip;
        CHECK_THROWS_AS(decode_embedding_table(corrupted), FileFormatError);
    }
}

TEST_CASE("reader distinguishes failure kinds") {
    Rng rng(3);
    const std::vector<unsigned char> bytes = encode_embedding_table(random_table(rng, 2, 2));

    std::vector<unsigned char> bad_magic = bytes;
    bad_magic[0] = 'X';
    try {
        decode_embedding_table(bad_magic);
        FAIL("expected bad magic");
    } catch (const FileFormatError& e) {
        CHECK(e.code() == FileErrorCode::bad_magic);
    }

    std::vector<unsigned char> truncated(bytes.begin(), bytes.begin() + 10);
    try {
        decode_embedding_table(truncated);
        FAIL("expected truncation");
    } catch (const FileFormatError& e) {
        CHECK((e.code() == FileErrorCode::truncated || e.code() == FileErrorCode::crc_mismatch));
    }

    // Bump the version field (bytes 4-5) and refresh the CRC so only the
    // version check can fire.
    std::vector<unsigned char> versioned = bytes;
    versioned[4] = 99;
    const std::uint32_t crc = crc32_of(std::span(versioned.data(), versioned.size() - 4));
    for (int i = 0; i < 4; ++i)
        versioned[versioned.size() - 4 + static_cast<std::size_t>(i)] =
            static_cast<unsigned char>((crc >> (8 * i)) & 0xFF);
    try {
        decode_embedding_table(versioned);
        FAIL("expected version rejection");
    } catch (const FileFormatError& e) {
        CHECK(e.code() == FileErrorCode::unsupported_version);
    }
}

TEST_CASE("loopback transfer reproduces the file byte for byte") {
    Rng rng(4);
    const EmbeddingTable table = random_table(rng, 20, 8);
    const fs::path dir = fresh_dir("loopback");
    const fs::path source = dir / "source.lse";
    write_embedding_file(table, source);

    ServeOptions options;
    options.bind_host = "127.0.0.1";
    options.port = 0;
    options.output_dir = dir / "received";
    ExchangeServer server(options);
    auto task = std::async(std::launch::async, [&] { return server.run(); });

    const SendSummary summary = send_embedding_file("127.0.0.1", server.port(), source);
    const ServeResult result = task.get();

    CHECK(summary.bytes_sent == fs::file_size(source));
    CHECK(read_file_bytes(result.file_path) == read_file_bytes(source));
    CHECK(result.source_tag == table.source_tag);
}

TEST_CASE("sender refuses invalid local files before connecting") {
    const fs::path dir = fresh_dir("refuse");
    const fs::path bogus = dir / "bogus.lse";
    write_file_bytes(bogus, std::vector<unsigned char>{'n', 'o', 'p', 'e'});
    CHECK_THROWS_WITH_AS(send_embedding_file("127.0.0.1", 1, bogus),
                         doctest::Contains("refusing to send"), Error);
}

TEST_CASE("unreachable host surfaces a connection error") {
    Rng rng(5);
    const fs::path dir = fresh_dir("unreachable");
    const fs::path source = dir / "ok.lse";
    write_embedding_file(random_table(rng, 2, 2), source);
    CHECK_THROWS_WITH_AS(send_embedding_file("127.0.0.1", 1, source),
                         doctest::Contains("connect"), Error);
}

TEST_CASE("receiver rejects an unsupported protocol version") {
    const fs::path dir = fresh_dir("version");
    ServeOptions options;
    options.bind_host = "127.0.0.1";
    options.port = 0;
    options.output_dir = dir;
    options.timeout_seconds = 5;
    ExchangeServer server(options);
    auto task = std::async(std::launch::async, [&] { return server.run(); });

    RawClient client(server.port());
    client.write_frame(1, {0xE7, 0x03});  // version 999

    CHECK_THROWS_WITH_AS(task.get(), doctest::Contains("unsupported version"), Error);
    CHECK(fs::is_empty(dir));
}

TEST_CASE("connection dropped mid-chunk discards partial data") {
    const fs::path dir = fresh_dir("dropped");
    ServeOptions options;
    options.bind_host = "127.0.0.1";
    options.port = 0;
    options.output_dir = dir;
    options.timeout_seconds = 5;
    ExchangeServer server(options);
    auto task = std::async(std::launch::async, [&] { return server.run(); });

    {
        RawClient client(server.port());
        client.write_frame(1, {0x01, 0x00});
        ByteWriter meta;
        meta.put_u64(100);
        meta.put_string("peer");
        client.write_frame(2, meta.bytes());
        client.write_frame(3, {1, 2, 3});
        // Destructor closes the socket mid-transfer.
    }

    CHECK_THROWS_AS(task.get(), Error);
    CHECK(fs::is_empty(dir));
}

TEST_CASE("state machine rejects every out-of-order frame sequence") {
    // All frame-type sequences of length 1..4. With the payloads below, no
    // sequence completes a valid transfer, so serve() must throw every time
    // and never write a file; deviations from HELLO META CHUNK* DONE must be
    // flagged as protocol errors.
    const std::vector<unsigned char> chunk_bytes{'d', 'a', 't', 'a'};
    ByteWriter meta;
    meta.put_u64(chunk_bytes.size());
    meta.put_string("t");
    ByteWriter done;
    done.put_u32(crc32_of(chunk_bytes));

    auto payload_for = [&](std::uint8_t type) -> std::vector<unsigned char> {
        switch (type) {
            case 1: return {0x01, 0x00};
            case 2: return meta.bytes();
            case 3: return chunk_bytes;
            case 4: return done.bytes();
            default: return {'e'};
        }
    };

    auto is_valid_prefix = [](const std::vector<std::uint8_t>& seq) {
        // hello (meta (chunk* done?)?)? without anything after done
        std::size_t i = 0;
        if (i < seq.size()) {
            if (seq[i] != 1) return false;
            ++i;
        }
        if (i < seq.size()) {
            if (seq[i] != 2) return false;
            ++i;
        }
        while (i < seq.size() && seq[i] == 3) ++i;
        if (i < seq.size()) {
            if (seq[i] != 4) return false;
            ++i;
        }
        return i == seq.size();
    };

    const fs::path dir = fresh_dir("sequences");
    std::size_t checked = 0;
    std::vector<std::vector<std::uint8_t>> sequences;
    for (int len = 1; len <= 4; ++len) {
        std::vector<std::uint8_t> seq(static_cast<std::size_t>(len), 1);
        while (true) {
            sequences.push_back(seq);
            int pos = len - 1;
            while (pos >= 0 && seq[static_cast<std::size_t>(pos)] == 5) {
                seq[static_cast<std::size_t>(pos)] = 1;
                --pos;
            }
            if (pos < 0) break;
            ++seq[static_cast<std::size_t>(pos)];
        }
    }
    REQUIRE(sequences.size() == 5 + 25 + 125 + 625);

    for (const auto& seq : sequences) {
        ServeOptions options;
        options.bind_host = "127.0.0.1";
        options.port = 0;
        options.output_dir = dir;
        options.timeout_seconds = 5;
        ExchangeServer server(options);
        auto task = std::async(std::launch::async, [&] { return server.run(); });
        {
            RawClient client(server.port());
            for (std::uint8_t type : seq) client.write_frame(type, payload_for(type));
        }
        try {
            task.get();
            FAIL("sequence should not complete a transfer");
        } catch (const Error& e) {
            if (!is_valid_prefix(seq)) {
                const std::string message = e.what();
                const bool flagged = message.find("protocol error") != std::string::npos ||
                                     message.find("peer reported") != std::string::npos ||
                                     message.find("not a valid embedding file") != std::string::npos;
                CHECK_MESSAGE(flagged, "sequence not flagged: ", message);
            }
        }
        ++checked;
    }
    CHECK(checked == sequences.size());
    CHECK(fs::is_empty(dir));
}
