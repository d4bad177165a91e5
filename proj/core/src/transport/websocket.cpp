#include "drive/transport/websocket.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <random>

namespace drive::transport {

namespace {

constexpr const char* kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxHandshake = 8192;

enum Opcode : std::uint8_t {
  kContinuation = 0x0,
  kText = 0x1,
  kBinary = 0x2,
  kClose = 0x8,
  kPing = 0x9,
  kPong = 0xA,
};

std::string base64(std::span<const std::uint8_t> in) {
  std::string out(4 * ((in.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), in.data(),
                                static_cast<int>(in.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Reads an HTTP head up to and including the blank line, byte by byte so no
// frame data is consumed.
std::string read_http_head(const Socket& s, std::chrono::milliseconds timeout) {
  std::string head;
  std::uint8_t c = 0;
  while (head.size() < kMaxHandshake) {
    s.recv_exact(std::span(&c, 1), timeout);
    head.push_back(static_cast<char>(c));
    if (head.size() >= 4 && head.compare(head.size() - 4, 4, "\r\n\r\n") == 0) return head;
  }
  throw NetworkError("websocket handshake too large");
}

std::string header_value(const std::string& head, const std::string& name) {
  std::size_t pos = head.find("\r\n");
  while (pos != std::string::npos && pos + 2 < head.size()) {
    const std::size_t next = head.find("\r\n", pos + 2);
    const std::string line = head.substr(pos + 2, next - pos - 2);
    const auto colon = line.find(':');
    if (colon != std::string::npos && lower(trim(line.substr(0, colon))) == name) {
      return trim(line.substr(colon + 1));
    }
    pos = next;
  }
  return {};
}

}  // namespace

std::string websocket_accept_key(const std::string& client_key) {
  const std::string src = client_key + kGuid;
  std::array<std::uint8_t, EVP_MAX_MD_SIZE> digest{};
  unsigned len = 0;
  EVP_Digest(src.data(), src.size(), digest.data(), &len, EVP_sha1(), nullptr);
  return base64(std::span(digest).first(len));
}

std::unique_ptr<WebSocketChannel> WebSocketChannel::accept(
    Socket socket, std::chrono::milliseconds handshake_timeout) {
  const std::string head = read_http_head(socket, handshake_timeout);
  const std::string key = header_value(head, "sec-websocket-key");
  if (head.rfind("GET ", 0) != 0 || key.empty() ||
      lower(header_value(head, "upgrade")) != "websocket") {
    static constexpr std::string_view kBad =
        "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
    socket.send_all(std::span(reinterpret_cast<const std::uint8_t*>(kBad.data()), kBad.size()));
    throw NetworkError("not a websocket upgrade request");
  }
  const std::string resp =
      "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
      "Sec-WebSocket-Accept: " +
      websocket_accept_key(key) + "\r\n\r\n";
  socket.send_all(std::span(reinterpret_cast<const std::uint8_t*>(resp.data()), resp.size()));
  return std::unique_ptr<WebSocketChannel>(new WebSocketChannel(std::move(socket), false));
}

std::unique_ptr<WebSocketChannel> WebSocketChannel::connect(const Endpoint& ep,
                                                            std::chrono::milliseconds timeout,
                                                            const std::string& path) {
  Socket s = Socket::connect(ep, timeout);
  std::array<std::uint8_t, 16> nonce{};
  std::random_device rd;
  for (auto& b : nonce) b = static_cast<std::uint8_t>(rd());
  const std::string key = base64(nonce);
  const std::string req = "GET " + path + " HTTP/1.1\r\nHost: " + ep.to_string() +
                          "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                          "Sec-WebSocket-Key: " + key +
                          "\r\nSec-WebSocket-Version: 13\r\n\r\n";
  s.send_all(std::span(reinterpret_cast<const std::uint8_t*>(req.data()), req.size()));
  const std::string head = read_http_head(s, timeout);
  if (head.rfind("HTTP/1.1 101", 0) != 0 ||
      header_value(head, "sec-websocket-accept") != websocket_accept_key(key)) {
    throw NetworkError("websocket upgrade rejected by " + ep.to_string());
  }
  return std::unique_ptr<WebSocketChannel>(new WebSocketChannel(std::move(s), true));
}

void WebSocketChannel::send_frame(std::uint8_t opcode, std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 14);
  out.push_back(static_cast<std::uint8_t>(0x80 | opcode));
  const std::uint8_t mask_bit = client_ ? 0x80 : 0x00;
  const std::uint64_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<std::uint8_t>(mask_bit | n));
  } else if (n <= 0xffff) {
    out.push_back(mask_bit | 126);
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
  } else {
    out.push_back(mask_bit | 127);
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
  }
  std::lock_guard lock(send_mu_);
  if (client_) {
    // xorshift mask stream; masking only defeats proxy cache poisoning.
    mask_state_ ^= mask_state_ << 13;
    mask_state_ ^= mask_state_ >> 17;
    mask_state_ ^= mask_state_ << 5;
    const std::array<std::uint8_t, 4> mask = {
        static_cast<std::uint8_t>(mask_state_ >> 24), static_cast<std::uint8_t>(mask_state_ >> 16),
        static_cast<std::uint8_t>(mask_state_ >> 8), static_cast<std::uint8_t>(mask_state_)};
    out.insert(out.end(), mask.begin(), mask.end());
    for (std::size_t i = 0; i < payload.size(); ++i) out.push_back(payload[i] ^ mask[i & 3]);
  } else {
    out.insert(out.end(), payload.begin(), payload.end());
  }
  socket_.send_all(out);
}

void WebSocketChannel::send_binary(std::span<const std::uint8_t> payload) {
  send_frame(kBinary, payload);
}

void WebSocketChannel::send(const Envelope& env) { send_binary(encode_envelope(env)); }

std::optional<std::vector<std::uint8_t>> WebSocketChannel::receive_message(
    std::chrono::milliseconds timeout) {
  constexpr auto kFollow = std::chrono::seconds(5);
  std::vector<std::uint8_t> message;
  bool started = false;
  for (;;) {
    std::array<std::uint8_t, 2> hdr{};
    if (!started) {
      try {
        socket_.recv_some(std::span(hdr).first(1), timeout);
      } catch (const Timeout&) {
        return std::nullopt;
      }
      socket_.recv_exact(std::span(hdr).subspan(1), kFollow);
    } else {
      socket_.recv_exact(hdr, kFollow);
    }
    const bool fin = hdr[0] & 0x80;
    const std::uint8_t opcode = hdr[0] & 0x0f;
    const bool masked = hdr[1] & 0x80;
    std::uint64_t len = hdr[1] & 0x7f;
    if (len == 126) {
      std::array<std::uint8_t, 2> ext{};
      socket_.recv_exact(ext, kFollow);
      len = (std::uint64_t{ext[0]} << 8) | ext[1];
    } else if (len == 127) {
      std::array<std::uint8_t, 8> ext{};
      socket_.recv_exact(ext, kFollow);
      len = 0;
      for (auto b : ext) len = (len << 8) | b;
    }
    if (!client_ && !masked) throw ProtocolError(ProtocolErrc::kMalformedPayload, "unmasked client frame");
    if (message.size() + len > kMaxPayload + kHeaderSize) throw ProtocolError(ProtocolErrc::kOversize);
    std::array<std::uint8_t, 4> mask{};
    if (masked) socket_.recv_exact(mask, kFollow);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(len));
    socket_.recv_exact(data, kFollow);
    if (masked) {
      for (std::size_t i = 0; i < data.size(); ++i) data[i] ^= mask[i & 3];
    }

    switch (opcode) {
      case kPing:
        send_frame(kPong, data);
        continue;
      case kPong:
        continue;
      case kClose:
        try {
          send_frame(kClose, {});
        } catch (const NetworkError&) {
        }
        throw ConnectionClosed("websocket closed by peer");
      case kText:
        throw ProtocolError(ProtocolErrc::kMalformedPayload, "text message on binary channel");
      case kBinary:
      case kContinuation:
        if ((opcode == kBinary) == started) {
          throw ProtocolError(ProtocolErrc::kMalformedPayload, "bad websocket fragmentation");
        }
        started = true;
        message.insert(message.end(), data.begin(), data.end());
        if (fin) return message;
        continue;
      default:
        throw ProtocolError(ProtocolErrc::kMalformedPayload, "unknown websocket opcode");
    }
  }
}

std::optional<Envelope> WebSocketChannel::receive(std::chrono::milliseconds timeout) {
  auto msg = receive_message(timeout);
  if (!msg) return std::nullopt;
  return decode_envelope(*msg);
}

}  // namespace drive::transport
