#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "dyadsync/protocol.hpp"

namespace dyadsync::net {

struct Address {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Parses "host:port" (IPv4 literal or "localhost"). Throws Errc::invalid_argument.
Address parse_address(const std::string& text);
std::string to_string(const Address& a);

/// Owning TCP socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release();
  /// Half-closes both directions; pending reads on other threads return EOF.
  void shutdown();
  void close();

 private:
  int fd_ = -1;
};

/// Bound and listening socket. Port 0 picks a free port. Throws Errc::io.
Socket listen_tcp(const Address& addr, int backlog = 4);
std::uint16_t local_port(const Socket& s);

/// Waits up to `timeout` for a connection; nullopt on timeout.
std::optional<Socket> accept_for(const Socket& listener, std::chrono::milliseconds timeout);

/// Retries until connected or `timeout` elapses. Throws Errc::io.
Socket connect_tcp(const Address& addr, std::chrono::milliseconds timeout);

/// Returns false when the peer has gone away.
bool send_all(const Socket& s, std::span<const std::uint8_t> bytes);
bool send_message(const Socket& s, const proto::Message& m);

/// Reads available bytes into `buf`; 0 means EOF or error.
std::size_t recv_some(const Socket& s, std::span<std::uint8_t> buf);

/// Blocking message reader over one socket.
class MessageReader {
 public:
  explicit MessageReader(const Socket& s) : socket_(s) {}
  /// Next message, or nullopt on EOF. Throws Errc::protocol on a malformed frame.
  std::optional<proto::Message> read();

 private:
  const Socket& socket_;
  proto::FrameDecoder decoder_;
};

}  // namespace dyadsync::net
