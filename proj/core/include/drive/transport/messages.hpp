#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "drive/frame.hpp"
#include "drive/transport/envelope.hpp"

namespace drive::transport {

enum class Topic : std::uint8_t { kFramesRaw, kFramesCondition, kFramesStyled, kControl, kMetrics };

inline constexpr Topic kAllTopics[] = {Topic::kFramesRaw, Topic::kFramesCondition,
                                       Topic::kFramesStyled, Topic::kControl, Topic::kMetrics};

std::string_view topic_name(Topic t) noexcept;
std::optional<Topic> parse_topic(std::string_view name) noexcept;

// Image topics use latest-value coalescing; the others deliver every message.
constexpr bool is_image_topic(Topic t) noexcept {
  return t == Topic::kFramesRaw || t == Topic::kFramesCondition || t == Topic::kFramesStyled;
}

// Frame payload: id u64 | ts u64 | width u16 | height u16 | format u8 |
// source u8-len + bytes | raw pixels.
std::vector<std::uint8_t> encode_frame_payload(const Frame& frame);
Frame decode_frame_payload(std::span<const std::uint8_t> payload);
Envelope encode_frame(const Frame& frame);
Frame decode_frame(const Envelope& env);

// Subscribe payload: topic as u8-len string, optionally followed by a mode
// byte (0 = subscribe, 1 = advertise as the publisher of that topic).
enum class SubscribeMode : std::uint8_t { kSubscribe = 0, kAdvertise = 1 };

struct SubscribeMsg {
  std::string topic;
  SubscribeMode mode = SubscribeMode::kSubscribe;
  friend bool operator==(const SubscribeMsg&, const SubscribeMsg&) = default;
};

Envelope encode_subscribe(const SubscribeMsg& msg);
SubscribeMsg decode_subscribe(const Envelope& env);

enum class ErrorCode : std::uint16_t {
  kInvalidTopic = 1,
  kMalformed = 2,
  kNotAdvertised = 3,
  kWorkerFailure = 4,
};

struct ErrorMsg {
  ErrorCode code = ErrorCode::kMalformed;
  std::string message;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

Envelope encode_error(const ErrorMsg& msg);
ErrorMsg decode_error(const Envelope& env);

// Operator input carried on the "control" topic. Floats travel as binary32 BE.
struct ControlUpdate {
  float steer = 0.0f;
  float throttle = 0.0f;
  float brake = 0.0f;
  bool enhancement_enabled = true;
  bool focus_active = false;  // false: uniform thresholds
  float focus_x = 0.0f;
  float focus_y = 0.0f;
  float r_inner = 0.0f;
  float r_outer = 0.0f;
  float fine_low = 0.0f;
  float fine_high = 0.0f;
  float coarse_low = 0.0f;
  float coarse_high = 0.0f;

  friend bool operator==(const ControlUpdate&, const ControlUpdate&) = default;
};

Envelope encode_control(const ControlUpdate& msg);
ControlUpdate decode_control(const Envelope& env);

// Raises ProtocolError(kMalformedPayload) unless env.type == want.
void expect_type(const Envelope& env, MsgType want);

}  // namespace drive::transport
