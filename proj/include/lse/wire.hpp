#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lse {

// Point-to-point embedding transfer: framed TCP, one session per connection.
//
// Frame layout (little-endian): type u8 | payload length u32 | payload.
// Types: HELLO=1 (u16 protocol version), META=2 (u64 file size, u32-prefixed
// source tag), CHUNK=3 (raw file bytes), DONE=4 (u32 CRC-32 of the whole
// file), ERR=5 (UTF-8 message). Payloads are capped at 4 MiB; session order
// is HELLO META CHUNK* DONE, anything else is a protocol error.
//
// The receiver replies HELLO on version agreement, streams the file into
// memory, verifies the announced size, the CRC and the embedding format, and
// only then writes the file and acknowledges with DONE.

inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::uint16_t kDefaultPort = 7519;
inline constexpr std::uint32_t kMaxFramePayload = 4u << 20;

enum class FrameType : std::uint8_t { hello = 1, meta = 2, chunk = 3, done = 4, err = 5 };

struct Frame {
    FrameType type;
    std::vector<unsigned char> payload;
};

struct ServeOptions {
    std::string bind_host = "0.0.0.0";
    std::uint16_t port = kDefaultPort;
    std::filesystem::path output_dir = ".";
    int timeout_seconds = 30;
};

struct ServeResult {
    std::filesystem::path file_path;
    std::uint64_t bytes_received = 0;
    std::string source_tag;
};

// Binds and listens on construction so the chosen port (including an
// ephemeral port 0 request) is known before run() blocks on accept.
class ExchangeServer {
public:
    explicit ExchangeServer(ServeOptions options);
    ~ExchangeServer();

    ExchangeServer(const ExchangeServer&) = delete;
    ExchangeServer& operator=(const ExchangeServer&) = delete;

    std::uint16_t port() const { return port_; }

    // Accepts exactly one session and completes it; throws on any protocol,
    // integrity or timeout violation (no file is written in that case).
    ServeResult run();

private:
    ServeOptions options_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
};

// Convenience wrapper: one server, one session.
ServeResult serve(const ServeOptions& options);

struct SendSummary {
    std::uint64_t bytes_sent = 0;
    double seconds = 0.0;
};

// Validates the file locally (full read_embedding_file pass) before opening
// any connection, then streams it.
SendSummary send_embedding_file(const std::string& host, std::uint16_t port,
                                const std::filesystem::path& path, int timeout_seconds = 30);

}  // namespace lse
