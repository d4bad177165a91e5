#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "drive/error.hpp"

namespace drive::transport {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // Accepts "host:port", ":port" or "port".
  static Endpoint parse(std::string_view text);
  std::string to_string() const { return host + ":" + std::to_string(port); }
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

class AddressInUse : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

// Peer closed or reset the connection.
class ConnectionClosed : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

class Timeout : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

// Owning TCP socket handle.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  static Socket listen(const Endpoint& ep, int backlog = 16);
  static Socket connect(const Endpoint& ep, std::chrono::milliseconds timeout);

  // Waits up to `timeout` for a pending connection; invalid socket on timeout.
  Socket accept(std::chrono::milliseconds timeout) const;

  void send_all(std::span<const std::uint8_t> data) const;
  // Reads exactly data.size() bytes. Throws Timeout if no progress within
  // `timeout` (negative: wait forever), ConnectionClosed on EOF/reset.
  void recv_exact(std::span<std::uint8_t> data, std::chrono::milliseconds timeout) const;
  // Reads whatever is available (at least one byte) into data.
  std::size_t recv_some(std::span<std::uint8_t> data, std::chrono::milliseconds timeout) const;

  std::uint16_t local_port() const;
  // Unblocks readers/writers in other threads without releasing the fd.
  void shutdown() const noexcept;
  void close() noexcept;
  int release() noexcept {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }

 private:
  bool wait_readable(std::chrono::milliseconds timeout) const;

  int fd_ = -1;
};

}  // namespace drive::transport
