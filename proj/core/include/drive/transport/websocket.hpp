#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "drive/transport/channel.hpp"

namespace drive::transport {

// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept_key(const std::string& client_key);

// Envelope channel over a WebSocket connection, one envelope per binary
// message. Server side performs the HTTP upgrade in accept(); client side in
// connect(). Client frames are masked, server frames are not.
class WebSocketChannel final : public EnvelopeChannel {
 public:
  static std::unique_ptr<WebSocketChannel> accept(Socket socket,
                                                  std::chrono::milliseconds handshake_timeout);
  static std::unique_ptr<WebSocketChannel> connect(const Endpoint& ep,
                                                   std::chrono::milliseconds timeout,
                                                   const std::string& path = "/");

  void send(const Envelope& env) override;
  std::optional<Envelope> receive(std::chrono::milliseconds timeout) override;
  void shutdown() noexcept override { socket_.shutdown(); }

  // Raw message access, used by tests to inject malformed content.
  void send_binary(std::span<const std::uint8_t> payload);
  std::optional<std::vector<std::uint8_t>> receive_message(std::chrono::milliseconds timeout);

 private:
  WebSocketChannel(Socket socket, bool client) : socket_(std::move(socket)), client_(client) {}

  void send_frame(std::uint8_t opcode, std::span<const std::uint8_t> payload);

  Socket socket_;
  bool client_;
  std::uint32_t mask_state_ = 0x9e3779b9u;
  std::mutex send_mu_;
};

}  // namespace drive::transport
