#include "lse/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "lse/binary_io.hpp"
#include "lse/crc32.hpp"
#include "lse/embedding_file.hpp"
#include "lse/error.hpp"

namespace lse {

namespace {

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket() { reset(); }

    Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            reset();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    int release() {
        const int fd = fd_;
        fd_ = -1;
        return fd;
    }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

void set_timeouts(int fd, int seconds) {
    timeval tv{};
    tv.tv_sec = seconds;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

void write_all(int fd, const unsigned char* data, std::size_t len) {
    while (len > 0) {
        const ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw lse::runtime_error("exchange: send timed out");
            throw lse::runtime_error(std::string("exchange: send failed: ") + std::strerror(errno));
        }
        data += n;
        len -= static_cast<std::size_t>(n);
    }
}

void read_exact(int fd, unsigned char* data, std::size_t len) {
    while (len > 0) {
        const ssize_t n = ::recv(fd, data, len, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw lse::runtime_error("exchange: connection idle past the timeout");
            throw lse::runtime_error(std::string("exchange: recv failed: ") + std::strerror(errno));
        }
        if (n == 0) throw lse::runtime_error("exchange: connection closed mid-frame");
        data += n;
        len -= static_cast<std::size_t>(n);
    }
}

void write_frame(int fd, FrameType type, std::span<const unsigned char> payload) {
    ByteWriter header;
    header.put_u8(static_cast<std::uint8_t>(type));
    header.put_u32(static_cast<std::uint32_t>(payload.size()));
    write_all(fd, header.bytes().data(), header.bytes().size());
    if (!payload.empty()) write_all(fd, payload.data(), payload.size());
}

Frame read_frame(int fd) {
    unsigned char header[5];
    read_exact(fd, header, sizeof(header));
    Frame frame;
    const std::uint8_t type = header[0];
    if (type < 1 || type > 5)
        throw lse::runtime_error("exchange: protocol error: unknown frame type " + std::to_string(type));
    frame.type = static_cast<FrameType>(type);
    const std::uint32_t len = static_cast<std::uint32_t>(header[1]) |
                              (static_cast<std::uint32_t>(header[2]) << 8) |
                              (static_cast<std::uint32_t>(header[3]) << 16) |
                              (static_cast<std::uint32_t>(header[4]) << 24);
    if (len > kMaxFramePayload)
        throw lse::runtime_error("exchange: protocol error: frame payload of " + std::to_string(len) +
                                 " bytes exceeds the 4 MiB cap");
    frame.payload.resize(len);
    if (len > 0) read_exact(fd, frame.payload.data(), len);
    return frame;
}

void send_error_frame(int fd, const std::string& message) noexcept {
    try {
        write_frame(fd, FrameType::err,
                    std::span(reinterpret_cast<const unsigned char*>(message.data()), message.size()));
    } catch (...) {
        // Peer already gone; the local exception carries the diagnosis.
    }
}

std::string sanitize_tag(const std::string& tag) {
    std::string name;
    for (char c : tag) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.';
        name.push_back(ok ? c : '_');
    }
    if (name.empty()) name = "received";
    return name;
}

}  // namespace

ExchangeServer::ExchangeServer(ServeOptions options) : options_(std::move(options)) {
    Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock.valid()) throw lse::runtime_error("exchange: cannot create socket");
    const int one = 1;
    ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(options_.port);
    if (options_.bind_host == "0.0.0.0" || options_.bind_host.empty()) {
        addr.sin_addr.s_addr = INADDR_ANY;
    } else if (::inet_pton(AF_INET, options_.bind_host.c_str(), &addr.sin_addr) != 1) {
        throw usage_error("exchange: invalid bind address '" + options_.bind_host + "'");
    }
    if (::bind(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw lse::runtime_error("exchange: cannot bind " + options_.bind_host + ":" +
                                 std::to_string(options_.port) + ": " + std::strerror(errno));
    if (::listen(sock.fd(), 1) != 0)
        throw lse::runtime_error(std::string("exchange: listen failed: ") + std::strerror(errno));

    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(sock.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    listen_fd_ = sock.release();
}

ExchangeServer::~ExchangeServer() {
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

ServeResult ExchangeServer::run() {
    Socket conn(::accept(listen_fd_, nullptr, nullptr));
    if (!conn.valid())
        throw lse::runtime_error(std::string("exchange: accept failed: ") + std::strerror(errno));
    set_timeouts(conn.fd(), options_.timeout_seconds);

    auto fail = [&](const std::string& message) -> Error {
        send_error_frame(conn.fd(), message);
        return lse::runtime_error("exchange: " + message);
    };

    // HELLO: version negotiation.
    Frame frame = read_frame(conn.fd());
    if (frame.type != FrameType::hello)
        throw fail("protocol error: expected HELLO, got frame type " +
                   std::to_string(static_cast<int>(frame.type)));
    if (frame.payload.size() != 2) throw fail("protocol error: malformed HELLO payload");
    const std::uint16_t version = static_cast<std::uint16_t>(frame.payload[0]) |
                                  (static_cast<std::uint16_t>(frame.payload[1]) << 8);
    if (version != kProtocolVersion)
        throw fail("unsupported version " + std::to_string(version) + ", expected " +
                   std::to_string(kProtocolVersion));
    {
        ByteWriter ack;
        ack.put_u16(kProtocolVersion);
        write_frame(conn.fd(), FrameType::hello, ack.bytes());
    }

    // META: announced size and source tag.
    frame = read_frame(conn.fd());
    if (frame.type != FrameType::meta)
        throw fail("protocol error: expected META, got frame type " +
                   std::to_string(static_cast<int>(frame.type)));
    std::uint64_t announced = 0;
    std::string tag;
    try {
        ByteReader meta(frame.payload);
        announced = meta.get_u64();
        tag = meta.get_string();
        if (meta.remaining() != 0) throw lse::runtime_error("trailing bytes");
    } catch (const std::exception&) {
        throw fail("protocol error: malformed META payload");
    }

    // CHUNK stream, then DONE carrying the sender-side CRC.
    std::vector<unsigned char> blob;
    blob.reserve(announced);
    std::uint32_t rolling_crc = 0;
    while (true) {
        frame = read_frame(conn.fd());
        if (frame.type == FrameType::chunk) {
            if (blob.size() + frame.payload.size() > announced)
                throw fail("protocol error: more data than the announced " +
                           std::to_string(announced) + " bytes");
            rolling_crc = crc32_update(rolling_crc, frame.payload);
            blob.insert(blob.end(), frame.payload.begin(), frame.payload.end());
            continue;
        }
        if (frame.type == FrameType::done) break;
        if (frame.type == FrameType::err)
            throw lse::runtime_error("exchange: peer reported: " +
                                     std::string(frame.payload.begin(), frame.payload.end()));
        throw fail("protocol error: expected CHUNK or DONE, got frame type " +
                   std::to_string(static_cast<int>(frame.type)));
    }
    if (frame.payload.size() != 4) throw fail("protocol error: malformed DONE payload");
    const std::uint32_t sender_crc = static_cast<std::uint32_t>(frame.payload[0]) |
                                     (static_cast<std::uint32_t>(frame.payload[1]) << 8) |
                                     (static_cast<std::uint32_t>(frame.payload[2]) << 16) |
                                     (static_cast<std::uint32_t>(frame.payload[3]) << 24);

    if (blob.size() != announced)
        throw fail("received " + std::to_string(blob.size()) + " bytes, META announced " +
                   std::to_string(announced));
    if (rolling_crc != sender_crc) throw fail("stream CRC mismatch; file discarded");

    // The payload must itself be a valid embedding file before anything
    // touches the disk.
    try {
        decode_embedding_table(blob);
    } catch (const std::exception& e) {
        throw fail(std::string("transferred data is not a valid embedding file: ") + e.what());
    }

    std::filesystem::create_directories(options_.output_dir);
    ServeResult result;
    result.source_tag = tag;
    result.file_path = options_.output_dir / (sanitize_tag(tag) + ".lse");
    write_file_bytes(result.file_path, blob);
    result.bytes_received = blob.size();

    write_frame(conn.fd(), FrameType::done, {});
    return result;
}

ServeResult serve(const ServeOptions& options) {
    ExchangeServer server(options);
    return server.run();
}

SendSummary send_embedding_file(const std::string& host, std::uint16_t port,
                                const std::filesystem::path& path, int timeout_seconds) {
    // Refuse to send anything that does not validate locally.
    EmbeddingTable table;
    try {
        table = read_embedding_file(path);
    } catch (const std::exception& e) {
        throw data_error("exchange: refusing to send invalid file: " + std::string(e.what()));
    }
    const std::vector<unsigned char> blob = read_file_bytes(path);

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* results = nullptr;
    const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &results);
    if (rc != 0)
        throw lse::runtime_error("exchange: cannot resolve '" + host + "': " + gai_strerror(rc));

    Socket sock;
    std::string connect_error = "no addresses";
    for (addrinfo* ai = results; ai; ai = ai->ai_next) {
        Socket candidate(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (!candidate.valid()) continue;
        if (::connect(candidate.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
            sock = std::move(candidate);
            break;
        }
        connect_error = std::strerror(errno);
    }
    ::freeaddrinfo(results);
    if (!sock.valid())
        throw lse::runtime_error("exchange: cannot connect to " + host + ":" + std::to_string(port) +
                                 ": " + connect_error);
    set_timeouts(sock.fd(), timeout_seconds);

    const auto started = std::chrono::steady_clock::now();

    ByteWriter hello;
    hello.put_u16(kProtocolVersion);
    write_frame(sock.fd(), FrameType::hello, hello.bytes());
    Frame reply = read_frame(sock.fd());
    if (reply.type == FrameType::err)
        throw lse::runtime_error("exchange: receiver rejected HELLO: " +
                                 std::string(reply.payload.begin(), reply.payload.end()));
    if (reply.type != FrameType::hello)
        throw lse::runtime_error("exchange: protocol error: expected HELLO ack");

    ByteWriter meta;
    meta.put_u64(blob.size());
    meta.put_string(table.source_tag);
    write_frame(sock.fd(), FrameType::meta, meta.bytes());

    constexpr std::size_t kChunkSize = 64 * 1024;
    for (std::size_t off = 0; off < blob.size(); off += kChunkSize) {
        const std::size_t len = std::min(kChunkSize, blob.size() - off);
        write_frame(sock.fd(), FrameType::chunk, std::span(blob.data() + off, len));
    }

    ByteWriter done;
    done.put_u32(crc32_of(blob));
    write_frame(sock.fd(), FrameType::done, done.bytes());

    reply = read_frame(sock.fd());
    if (reply.type == FrameType::err)
        throw lse::runtime_error("exchange: receiver reported: " +
                                 std::string(reply.payload.begin(), reply.payload.end()));
    if (reply.type != FrameType::done)
        throw lse::runtime_error("exchange: protocol error: expected DONE ack");

    SendSummary summary;
    summary.bytes_sent = blob.size();
    summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return summary;
}

}  // namespace lse
