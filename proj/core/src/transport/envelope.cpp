#include "drive/transport/envelope.hpp"

#include <algorithm>

namespace drive::transport {

bool is_known_type(std::uint8_t raw) noexcept { return raw >= 1 && raw <= 8; }

const char* to_string(MsgType t) noexcept {
  switch (t) {
    case MsgType::kFrame: return "Frame";
    case MsgType::kConditionMap: return "ConditionMap";
    case MsgType::kStyleRequest: return "StyleRequest";
    case MsgType::kStyleResult: return "StyleResult";
    case MsgType::kControlUpdate: return "ControlUpdate";
    case MsgType::kMetricsSnapshot: return "MetricsSnapshot";
    case MsgType::kSubscribe: return "Subscribe";
    case MsgType::kError: return "Error";
  }
  return "?";
}

const char* to_string(ProtocolErrc c) noexcept {
  switch (c) {
    case ProtocolErrc::kShortRead: return "short read";
    case ProtocolErrc::kBadMagic: return "bad magic";
    case ProtocolErrc::kBadVersion: return "bad version";
    case ProtocolErrc::kUnknownType: return "unknown type";
    case ProtocolErrc::kLengthMismatch: return "length mismatch";
    case ProtocolErrc::kOversize: return "oversize payload";
    case ProtocolErrc::kMalformedPayload: return "malformed payload";
  }
  return "?";
}

std::vector<std::uint8_t> encode_envelope(const Envelope& env) {
  if (env.payload.size() > kMaxPayload) {
    throw ProtocolError(ProtocolErrc::kOversize, std::to_string(env.payload.size()) + " bytes");
  }
  if (!is_known_type(static_cast<std::uint8_t>(env.type))) {
    throw ProtocolError(ProtocolErrc::kUnknownType);
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + env.payload.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(env.type));
  const auto len = static_cast<std::uint32_t>(env.payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(len >> shift));
  out.insert(out.end(), env.payload.begin(), env.payload.end());
  return out;
}

EnvelopeHeader decode_header(std::span<const std::uint8_t> header) {
  if (header.size() < kHeaderSize) throw ProtocolError(ProtocolErrc::kShortRead);
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) {
    throw ProtocolError(ProtocolErrc::kBadMagic);
  }
  if (header[4] != kVersion) throw ProtocolError(ProtocolErrc::kBadVersion);
  if (!is_known_type(header[5])) throw ProtocolError(ProtocolErrc::kUnknownType);
  const std::uint32_t len = (std::uint32_t{header[6]} << 24) | (std::uint32_t{header[7]} << 16) |
                            (std::uint32_t{header[8]} << 8) | std::uint32_t{header[9]};
  if (len > kMaxPayload) throw ProtocolError(ProtocolErrc::kOversize);
  return EnvelopeHeader{static_cast<MsgType>(header[5]), len};
}

Envelope decode_envelope(std::span<const std::uint8_t> bytes) {
  const EnvelopeHeader h = decode_header(bytes);
  if (bytes.size() - kHeaderSize != h.payload_len) {
    throw ProtocolError(ProtocolErrc::kLengthMismatch,
                        "declared " + std::to_string(h.payload_len) + ", have " +
                            std::to_string(bytes.size() - kHeaderSize));
  }
  const auto body = bytes.subspan(kHeaderSize);
  return Envelope{h.type, std::vector<std::uint8_t>(body.begin(), body.end())};
}

}  // namespace drive::transport
