#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drive/error.hpp"

namespace drive::transport {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'D', 'R', 'V', '1'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 10;  // magic, version, type, u32 length
inline constexpr std::uint32_t kMaxPayload = 16u << 20;

enum class MsgType : std::uint8_t {
  kFrame = 1,
  kConditionMap = 2,
  kStyleRequest = 3,
  kStyleResult = 4,
  kControlUpdate = 5,
  kMetricsSnapshot = 6,
  kSubscribe = 7,
  kError = 8,
};

bool is_known_type(std::uint8_t raw) noexcept;
const char* to_string(MsgType t) noexcept;

enum class ProtocolErrc {
  kShortRead,
  kBadMagic,
  kBadVersion,
  kUnknownType,
  kLengthMismatch,
  kOversize,
  kMalformedPayload,
};

const char* to_string(ProtocolErrc c) noexcept;

class ProtocolError : public Error {
 public:
  explicit ProtocolError(ProtocolErrc code, const std::string& detail = {})
      : Error(detail.empty() ? std::string(to_string(code))
                             : std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ProtocolErrc code() const noexcept { return code_; }

 private:
  ProtocolErrc code_;
};

struct Envelope {
  MsgType type = MsgType::kError;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

struct EnvelopeHeader {
  MsgType type;
  std::uint32_t payload_len;
};

// Throws ProtocolError(kOversize) past the 16 MiB cap.
std::vector<std::uint8_t> encode_envelope(const Envelope& env);

// Validates the fixed 10-byte header only; `header` must hold at least
// kHeaderSize bytes or kShortRead is raised.
EnvelopeHeader decode_header(std::span<const std::uint8_t> header);

// Decodes exactly one envelope occupying all of `bytes`.
Envelope decode_envelope(std::span<const std::uint8_t> bytes);

}  // namespace drive::transport
