#include "drive/transport/socket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace drive::transport {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  const std::string host = ep.host.empty() || ep.host == "*" ? "0.0.0.0" : ep.host;
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw NetworkError("cannot resolve host '" + host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

int poll_one(int fd, short events, std::chrono::milliseconds timeout) {
  pollfd p{fd, events, 0};
  const int ms = timeout.count() < 0 ? -1 : static_cast<int>(timeout.count());
  for (;;) {
    const int rc = ::poll(&p, 1, ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw NetworkError(errno_text("poll"));
    return rc;
  }
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
  Endpoint ep;
  std::string_view port_text = text;
  if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) ep.host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  unsigned value = 0;
  const auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
  if (port_text.empty() || ec != std::errc() || end != port_text.data() + port_text.size() ||
      value > 65535) {
    throw InvalidArgument("bad endpoint '" + std::string(text) + "', expected host:port");
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.release();
  }
  return *this;
}

Socket Socket::listen(const Endpoint& ep, int backlog) {
  const sockaddr_in addr = resolve(ep);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw NetworkError(errno_text("socket"));
  int one = 1;
  ::setsockopt(s.fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(s.fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    if (errno == EADDRINUSE) throw AddressInUse("address in use: " + ep.to_string());
    throw NetworkError(errno_text(("bind " + ep.to_string()).c_str()));
  }
  if (::listen(s.fd_, backlog) != 0) throw NetworkError(errno_text("listen"));
  return s;
}

Socket Socket::connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(ep);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0));
  if (!s.valid()) throw NetworkError(errno_text("socket"));
  if (::connect(s.fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    if (errno != EINPROGRESS) throw NetworkError(errno_text(("connect " + ep.to_string()).c_str()));
    if (poll_one(s.fd_, POLLOUT, timeout) == 0) throw Timeout("connect timeout: " + ep.to_string());
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(s.fd_, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      throw NetworkError("connect " + ep.to_string() + ": " + std::strerror(err));
    }
  }
  const int flags = ::fcntl(s.fd_, F_GETFL);
  ::fcntl(s.fd_, F_SETFL, flags & ~O_NONBLOCK);
  set_nodelay(s.fd_);
  return s;
}

Socket Socket::accept(std::chrono::milliseconds timeout) const {
  if (poll_one(fd_, POLLIN, timeout) == 0) return Socket{};
  Socket c(::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC));
  if (!c.valid()) {
    if (errno == EAGAIN || errno == EINTR || errno == ECONNABORTED) return Socket{};
    throw NetworkError(errno_text("accept"));
  }
  set_nodelay(c.fd_);
  return c;
}

void Socket::send_all(std::span<const std::uint8_t> data) const {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionClosed(errno_text("send"));
    }
    off += static_cast<std::size_t>(n);
  }
}

bool Socket::wait_readable(std::chrono::milliseconds timeout) const {
  return poll_one(fd_, POLLIN, timeout) > 0;
}

std::size_t Socket::recv_some(std::span<std::uint8_t> data, std::chrono::milliseconds timeout) const {
  for (;;) {
    if (!wait_readable(timeout)) throw Timeout("receive timeout");
    const ssize_t n = ::recv(fd_, data.data(), data.size(), 0);
    if (n > 0) return static_cast<std::size_t>(n);
    if (n == 0) throw ConnectionClosed("peer closed connection");
    if (errno == EINTR || errno == EAGAIN) continue;
    throw ConnectionClosed(errno_text("recv"));
  }
}

void Socket::recv_exact(std::span<std::uint8_t> data, std::chrono::milliseconds timeout) const {
  std::size_t off = 0;
  while (off < data.size()) off += recv_some(data.subspan(off), timeout);
}

std::uint16_t Socket::local_port() const {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw NetworkError(errno_text("getsockname"));
  }
  return ntohs(addr.sin_port);
}

void Socket::shutdown() const noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace drive::transport
