#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>

#include "drive/transport/envelope.hpp"
#include "drive/transport/socket.hpp"

namespace drive::transport {

// Bidirectional envelope stream. send() may be called from one thread while
// another thread blocks in receive().
class EnvelopeChannel {
 public:
  virtual ~EnvelopeChannel() = default;

  virtual void send(const Envelope& env) = 0;
  // nullopt on timeout; ConnectionClosed on EOF; ProtocolError on bad input.
  virtual std::optional<Envelope> receive(std::chrono::milliseconds timeout) = 0;
  virtual void shutdown() noexcept = 0;
};

// Envelopes back to back on a TCP stream.
class TcpChannel final : public EnvelopeChannel {
 public:
  explicit TcpChannel(Socket socket) : socket_(std::move(socket)) {}

  static std::unique_ptr<TcpChannel> connect(const Endpoint& ep,
                                             std::chrono::milliseconds timeout);

  void send(const Envelope& env) override;
  std::optional<Envelope> receive(std::chrono::milliseconds timeout) override;
  void shutdown() noexcept override { socket_.shutdown(); }

  const Socket& socket() const noexcept { return socket_; }

 private:
  Socket socket_;
  std::mutex send_mu_;
};

}  // namespace drive::transport
