#include "drive/transport/channel.hpp"

#include <array>

namespace drive::transport {

std::unique_ptr<TcpChannel> TcpChannel::connect(const Endpoint& ep,
                                                std::chrono::milliseconds timeout) {
  return std::make_unique<TcpChannel>(Socket::connect(ep, timeout));
}

void TcpChannel::send(const Envelope& env) {
  const auto bytes = encode_envelope(env);
  std::lock_guard lock(send_mu_);
  socket_.send_all(bytes);
}

std::optional<Envelope> TcpChannel::receive(std::chrono::milliseconds timeout) {
  std::array<std::uint8_t, kHeaderSize> header{};
  try {
    // Only the first byte may time out; once a message has started the rest
    // must follow promptly.
    std::size_t got = socket_.recv_some(std::span(header).first(1), timeout);
    (void)got;
  } catch (const Timeout&) {
    return std::nullopt;
  }
  socket_.recv_exact(std::span(header).subspan(1), std::chrono::seconds(5));
  const EnvelopeHeader h = decode_header(header);
  Envelope env{h.type, std::vector<std::uint8_t>(h.payload_len)};
  socket_.recv_exact(env.payload, std::chrono::seconds(5));
  return env;
}

}  // namespace drive::transport
