#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace tcr {

struct socket_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct endpoint {
    std::string host;
    std::uint16_t port = 0;
};

/// Parses "host:port". Throws std::invalid_argument.
endpoint parse_endpoint(const std::string &text);

/// Connected TCP stream exchanging newline-terminated lines.
class line_stream {
public:
    explicit line_stream(int fd) : fd_{fd} {}
    ~line_stream();
    line_stream(line_stream &&other) noexcept;
    line_stream &operator=(line_stream &&other) noexcept;
    line_stream(const line_stream &) = delete;
    line_stream &operator=(const line_stream &) = delete;

    static line_stream connect(const endpoint &ep);

    /// nullopt on orderly close. Lines longer than `max_line` are an error.
    std::optional<std::string> read_line(std::size_t max_line = std::size_t{64} << 20);
    void write_line(const std::string &line);
    bool peer_is_loopback() const;

private:
    int fd_ = -1;
    std::string buffer_;
};

class tcp_listener {
public:
    explicit tcp_listener(const endpoint &ep);
    ~tcp_listener();
    tcp_listener(const tcp_listener &) = delete;
    tcp_listener &operator=(const tcp_listener &) = delete;

    line_stream accept();
    /// Actual bound port (useful with port 0).
    std::uint16_t port() const;

private:
    int fd_ = -1;
};

} // namespace tcr
