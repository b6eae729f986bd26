#include "dyadsync/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fmt/format.h>

#include <array>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <thread>

#include "dyadsync/error.hpp"

namespace dyadsync::net {

namespace {

sockaddr_in to_sockaddr(const Address& a) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(a.port);
  const std::string host = a.host == "localhost" ? "127.0.0.1" : a.host;
  if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
    throw Error(Errc::invalid_argument, fmt::format("not an IPv4 address: '{}'", a.host));
  }
  return sa;
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

Address parse_address(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(Errc::invalid_argument, fmt::format("address '{}' is not host:port", text));
  }
  Address a;
  a.host = text.substr(0, colon);
  unsigned port = 0;
  const char* first = text.data() + colon + 1;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc{} || ptr != last || port > 65535) {
    throw Error(Errc::invalid_argument, fmt::format("bad port in address '{}'", text));
  }
  a.port = static_cast<std::uint16_t>(port);
  to_sockaddr(a);
  return a;
}

std::string to_string(const Address& a) { return fmt::format("{}:{}", a.host, a.port); }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.release();
  }
  return *this;
}

Socket::~Socket() { close(); }

int Socket::release() {
  const int fd = fd_;
  fd_ = -1;
  return fd;
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Socket listen_tcp(const Address& addr, int backlog) {
  const auto sa = to_sockaddr(addr);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw Error(Errc::io, fmt::format("socket: {}", errno_text()));
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
    throw Error(Errc::io, fmt::format("cannot bind {}: {}", to_string(addr), errno_text()));
  }
  if (::listen(s.fd(), backlog) != 0) throw Error(Errc::io, fmt::format("listen: {}", errno_text()));
  return s;
}

std::uint16_t local_port(const Socket& s) {
  sockaddr_in sa{};
  socklen_t len = sizeof sa;
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&sa), &len) != 0) {
    throw Error(Errc::io, fmt::format("getsockname: {}", errno_text()));
  }
  return ntohs(sa.sin_port);
}

std::optional<Socket> accept_for(const Socket& listener, std::chrono::milliseconds timeout) {
  pollfd p{listener.fd(), POLLIN, 0};
  const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (r <= 0) return std::nullopt;
  const int fd = ::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) return std::nullopt;
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(fd);
}

Socket connect_tcp(const Address& addr, std::chrono::milliseconds timeout) {
  const auto sa = to_sockaddr(addr);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!s.valid()) throw Error(Errc::io, fmt::format("socket: {}", errno_text()));
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&sa), sizeof sa) == 0) {
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error(Errc::io, fmt::format("cannot connect to {}: {}", to_string(addr), errno_text()));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

bool send_all(const Socket& s, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const auto n = ::send(s.fd(), bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool send_message(const Socket& s, const proto::Message& m) { return send_all(s, proto::encode(m)); }

std::size_t recv_some(const Socket& s, std::span<std::uint8_t> buf) {
  for (;;) {
    const auto n = ::recv(s.fd(), buf.data(), buf.size(), 0);
    if (n < 0 && errno == EINTR) continue;
    return n > 0 ? static_cast<std::size_t>(n) : 0;
  }
}

std::optional<proto::Message> MessageReader::read() {
  std::array<std::uint8_t, 16384> buf{};
  for (;;) {
    if (auto m = decoder_.next()) return m;
    const auto n = recv_some(socket_, buf);
    if (n == 0) {
      if (decoder_.buffered() > 0) throw Error(Errc::protocol, "connection closed inside a frame");
      return std::nullopt;
    }
    decoder_.feed(std::span<const std::uint8_t>(buf.data(), n));
  }
}

}  // namespace dyadsync::net
