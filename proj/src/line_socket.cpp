#include "tcr/line_socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

namespace tcr {

namespace {

[[noreturn]] void fail(const std::string &what) {
    throw socket_error{what + ": " + std::strerror(errno)};
}

} // namespace

endpoint parse_endpoint(const std::string &text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw std::invalid_argument{"expected host:port, got " + text};
    }
    const auto port = std::stoul(text.substr(colon + 1));
    if (port > 65535) {
        throw std::invalid_argument{"port out of range"};
    }
    return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

line_stream::~line_stream() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

line_stream::line_stream(line_stream &&other) noexcept
    : fd_{std::exchange(other.fd_, -1)}, buffer_{std::move(other.buffer_)} {}

line_stream &line_stream::operator=(line_stream &&other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) {
            ::close(fd_);
        }
        fd_ = std::exchange(other.fd_, -1);
        buffer_ = std::move(other.buffer_);
    }
    return *this;
}

line_stream line_stream::connect(const endpoint &ep) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *res = nullptr;
    const auto port = std::to_string(ep.port);
    if (int rc = getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        throw socket_error{"cannot resolve " + ep.host + ": " + gai_strerror(rc)};
    }
    int fd = -1;
    for (auto *ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            break;
        }
        ::close(fd);
        fd = -1;
    }
    freeaddrinfo(res);
    if (fd < 0) {
        fail("cannot connect to " + ep.host + ":" + port);
    }
    return line_stream{fd};
}

std::optional<std::string> line_stream::read_line(std::size_t max_line) {
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        if (buffer_.size() > max_line) {
            throw socket_error{"line too long"};
        }
        char chunk[65536];
        const auto n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n == 0) {
            return std::nullopt;
        }
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            fail("recv");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

void line_stream::write_line(const std::string &line) {
    std::string out = line;
    out.push_back('\n');
    std::size_t off = 0;
    while (off < out.size()) {
        const auto n = ::send(fd_, out.data() + off, out.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            fail("send");
        }
        off += static_cast<std::size_t>(n);
    }
}

bool line_stream::peer_is_loopback() const {
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    if (::getpeername(fd_, reinterpret_cast<sockaddr *>(&addr), &len) != 0) {
        return false;
    }
    if (addr.ss_family == AF_INET) {
        const auto *in = reinterpret_cast<const sockaddr_in *>(&addr);
        return (ntohl(in->sin_addr.s_addr) >> 24) == 127;
    }
    if (addr.ss_family == AF_INET6) {
        const auto *in6 = reinterpret_cast<const sockaddr_in6 *>(&addr);
        if (IN6_IS_ADDR_LOOPBACK(&in6->sin6_addr)) {
            return true;
        }
        return IN6_IS_ADDR_V4MAPPED(&in6->sin6_addr) && in6->sin6_addr.s6_addr[12] == 127;
    }
    return false;
}

tcp_listener::tcp_listener(const endpoint &ep) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo *res = nullptr;
    const auto port = std::to_string(ep.port);
    const char *host = ep.host.empty() || ep.host == "*" ? nullptr : ep.host.c_str();
    if (int rc = getaddrinfo(host, port.c_str(), &hints, &res); rc != 0) {
        throw socket_error{"cannot resolve " + ep.host + ": " + gai_strerror(rc)};
    }
    for (auto *ai = res; ai != nullptr; ai = ai->ai_next) {
        fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd_ < 0) {
            continue;
        }
        int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd_, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd_, 64) == 0) {
            break;
        }
        ::close(fd_);
        fd_ = -1;
    }
    freeaddrinfo(res);
    if (fd_ < 0) {
        fail("cannot listen on " + ep.host + ":" + port);
    }
}

tcp_listener::~tcp_listener() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

line_stream tcp_listener::accept() {
    for (;;) {
        const int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) {
            return line_stream{fd};
        }
        if (errno != EINTR) {
            fail("accept");
        }
    }
}

std::uint16_t tcp_listener::port() const {
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr *>(&addr), &len) != 0) {
        fail("getsockname");
    }
    if (addr.ss_family == AF_INET6) {
        return ntohs(reinterpret_cast<const sockaddr_in6 *>(&addr)->sin6_port);
    }
    return ntohs(reinterpret_cast<const sockaddr_in *>(&addr)->sin_port);
}

} // namespace tcr
