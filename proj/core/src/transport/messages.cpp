#include "drive/transport/messages.hpp"

#include <array>
#include <cmath>

#include "drive/transport/wire.hpp"

namespace drive::transport {

void ByteWriter::short_string(std::string_view s) {
  if (s.size() > 255) throw InvalidArgument("string field exceeds 255 bytes");
  u8(static_cast<std::uint8_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteWriter::string16(std::string_view s) {
  if (s.size() > 65535) throw InvalidArgument("string field exceeds 65535 bytes");
  u16(static_cast<std::uint16_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

namespace {

constexpr std::array<std::string_view, 5> kTopicNames = {
    "frames/raw", "frames/condition", "frames/styled", "control", "metrics"};

}  // namespace

std::string_view topic_name(Topic t) noexcept { return kTopicNames[static_cast<std::size_t>(t)]; }

std::optional<Topic> parse_topic(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kTopicNames.size(); ++i) {
    if (kTopicNames[i] == name) return static_cast<Topic>(i);
  }
  return std::nullopt;
}

void expect_type(const Envelope& env, MsgType want) {
  if (env.type != want) {
    throw ProtocolError(ProtocolErrc::kMalformedPayload,
                        std::string("expected ") + to_string(want) + ", got " + to_string(env.type));
  }
}

std::vector<std::uint8_t> encode_frame_payload(const Frame& frame) {
  if (!frame.valid()) throw InvalidArgument("cannot encode malformed frame");
  if (frame.width > 0xffff || frame.height > 0xffff) {
    throw ProtocolError(ProtocolErrc::kOversize, "frame dimensions exceed u16");
  }
  ByteWriter w;
  w.buffer().reserve(32 + frame.source_id.size() + frame.pixels.size());
  w.u64(frame.id);
  w.u64(frame.ts_ns);
  w.u16(static_cast<std::uint16_t>(frame.width));
  w.u16(static_cast<std::uint16_t>(frame.height));
  w.u8(static_cast<std::uint8_t>(frame.format));
  w.short_string(frame.source_id);
  w.bytes(frame.pixels);
  if (w.buffer().size() > kMaxPayload) throw ProtocolError(ProtocolErrc::kOversize);
  return w.take();
}

Frame decode_frame_payload(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  Frame f;
  f.id = r.u64();
  f.ts_ns = r.u64();
  f.width = r.u16();
  f.height = r.u16();
  const std::uint8_t fmt = r.u8();
  if (fmt > 1) throw ProtocolError(ProtocolErrc::kMalformedPayload, "unknown pixel format");
  f.format = static_cast<PixelFormat>(fmt);
  f.source_id = r.short_string();
  const std::size_t need = static_cast<std::size_t>(f.width) * f.height * f.channels();
  if (r.remaining() != need) {
    throw ProtocolError(ProtocolErrc::kMalformedPayload, "pixel buffer size disagrees with geometry");
  }
  const auto px = r.rest();
  f.pixels.assign(px.begin(), px.end());
  return f;
}

Envelope encode_frame(const Frame& frame) {
  return Envelope{MsgType::kFrame, encode_frame_payload(frame)};
}

Frame decode_frame(const Envelope& env) {
  expect_type(env, MsgType::kFrame);
  return decode_frame_payload(env.payload);
}

Envelope encode_subscribe(const SubscribeMsg& msg) {
  ByteWriter w;
  w.short_string(msg.topic);
  if (msg.mode != SubscribeMode::kSubscribe) w.u8(static_cast<std::uint8_t>(msg.mode));
  return Envelope{MsgType::kSubscribe, w.take()};
}

SubscribeMsg decode_subscribe(const Envelope& env) {
  expect_type(env, MsgType::kSubscribe);
  ByteReader r(env.payload);
  SubscribeMsg m;
  m.topic = r.short_string();
  if (r.remaining() > 0) {
    const std::uint8_t mode = r.u8();
    if (mode > 1) throw ProtocolError(ProtocolErrc::kMalformedPayload, "unknown subscribe mode");
    m.mode = static_cast<SubscribeMode>(mode);
  }
  r.expect_end();
  return m;
}

Envelope encode_error(const ErrorMsg& msg) {
  ByteWriter w;
  w.u16(static_cast<std::uint16_t>(msg.code));
  w.string16(msg.message);
  return Envelope{MsgType::kError, w.take()};
}

ErrorMsg decode_error(const Envelope& env) {
  expect_type(env, MsgType::kError);
  ByteReader r(env.payload);
  ErrorMsg m;
  m.code = static_cast<ErrorCode>(r.u16());
  m.message = r.string16();
  r.expect_end();
  return m;
}

Envelope encode_control(const ControlUpdate& m) {
  ByteWriter w;
  w.f32(m.steer);
  w.f32(m.throttle);
  w.f32(m.brake);
  w.u8(m.enhancement_enabled ? 1 : 0);
  w.u8(m.focus_active ? 1 : 0);
  for (float v : {m.focus_x, m.focus_y, m.r_inner, m.r_outer, m.fine_low, m.fine_high,
                  m.coarse_low, m.coarse_high}) {
    w.f32(v);
  }
  return Envelope{MsgType::kControlUpdate, w.take()};
}

ControlUpdate decode_control(const Envelope& env) {
  expect_type(env, MsgType::kControlUpdate);
  ByteReader r(env.payload);
  ControlUpdate m;
  m.steer = r.f32();
  m.throttle = r.f32();
  m.brake = r.f32();
  const std::uint8_t enh = r.u8();
  const std::uint8_t focus = r.u8();
  if (enh > 1 || focus > 1) throw ProtocolError(ProtocolErrc::kMalformedPayload, "bad flag byte");
  m.enhancement_enabled = enh == 1;
  m.focus_active = focus == 1;
  for (float* v : {&m.focus_x, &m.focus_y, &m.r_inner, &m.r_outer, &m.fine_low, &m.fine_high,
                   &m.coarse_low, &m.coarse_high}) {
    *v = r.f32();
  }
  r.expect_end();
  return m;
}

}  // namespace drive::transport
