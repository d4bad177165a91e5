#include "drive/stylizer.hpp"

#include <cmath>

#include "drive/error.hpp"
#include "drive/transport/wire.hpp"

namespace drive::stylizer {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point since) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count());
}

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Rewrites the fixed-width timing block that follows the embedded frame blob.
void patch_timings(transport::Envelope& reply, const StageTimings& t) {
  auto& p = reply.payload;
  const std::size_t blob = (std::size_t{p[0]} << 24) | (std::size_t{p[1]} << 16) |
                           (std::size_t{p[2]} << 8) | std::size_t{p[3]};
  std::size_t off = 4 + blob;
  for (std::uint64_t v : {t.encode_ns, t.inference_ns, t.decode_ns, t.total_ns}) {
    for (int shift = 56; shift >= 0; shift -= 8) p[off++] = static_cast<std::uint8_t>(v >> shift);
  }
}

int floor_div(int a, int b) noexcept {
  const int q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace

void StyleRequest::validate() const {
  if (!frame.valid() || frame.format != PixelFormat::kRgb8) {
    throw InvalidArgument("style request frame must be a well-formed RGB8 frame");
  }
  if (condition.width != frame.width || condition.height != frame.height ||
      condition.data.size() != std::size_t{frame.width} * frame.height) {
    throw InvalidArgument("condition map dimensions do not match the frame");
  }
  if (condition.frame_id != frame.id) throw InvalidArgument("condition map belongs to another frame");
  if (steps < 1) throw InvalidArgument("steps must be at least 1");
  if (!(strength >= 0.0f && strength <= 1.0f)) throw InvalidArgument("strength must lie in [0,1]");
}

std::uint64_t seed_for_frame(const SeedPolicy& policy, std::uint64_t /*frame_id*/) noexcept {
  return policy.session_seed;
}

const std::array<std::array<std::uint8_t, 256>, 3>& tone_lut() noexcept {
  static constexpr std::array<std::array<std::uint8_t, 256>, 3> kLut = {{
#include "tone_lut_table.inc"
  }};
  return kLut;
}

std::uint64_t noise_bits(std::uint64_t seed, std::uint32_t x, std::uint32_t y) noexcept {
  const std::uint64_t counter = (std::uint64_t{x} << 32) | y;
  return mix64(mix64(seed ^ 0x9e3779b97f4a7c15ull) ^ counter);
}

int noise_offset(std::uint64_t seed, std::uint32_t x, std::uint32_t y) noexcept {
  return static_cast<int>(noise_bits(seed, x, y) % (2 * kNoiseAmplitude + 1)) - kNoiseAmplitude;
}

int quantize_strength(float strength) noexcept {
  const double s = std::clamp(static_cast<double>(strength), 0.0, 1.0);
  return static_cast<int>(std::floor(s * 1024.0 + 0.5));
}

int scale_offset(int offset, int strength_q) noexcept {
  return floor_div(offset * strength_q + 512, 1024);
}

StyleResult mock_stylize(const StyleRequest& req) {
  const auto start = Clock::now();
  req.validate();
  const auto& lut = tone_lut();
  const int sq = quantize_strength(req.strength);

  Frame out = req.frame;
  const std::uint32_t w = req.frame.width;
  const std::uint32_t h = req.frame.height;
  for (std::uint32_t y = 0; y < h; ++y) {
    const std::uint8_t* cond = req.condition.data.data() + std::size_t{y} * w;
    std::uint8_t* px = out.at(0, y);
    for (std::uint32_t x = 0; x < w; ++x, px += 3) {
      if (cond[x] == 255) continue;  // contour pixels keep the input value
      const int off = sq == 0 ? 0 : scale_offset(noise_offset(req.seed, x, y), sq);
      for (int c = 0; c < 3; ++c) px[c] = saturate(lut[static_cast<std::size_t>(c)][px[c]] + off);
    }
  }
  StyleResult res;
  res.frame = std::move(out);
  res.worker_id = "mock";
  res.timings.inference_ns = elapsed_ns(start);
  res.timings.total_ns = res.timings.inference_ns;
  return res;
}

transport::Envelope encode_request(const StyleRequest& req) {
  transport::ByteWriter w;
  w.blob(transport::encode_frame_payload(req.frame));
  w.blob(conditioning::encode_condition_payload(req.condition));
  w.u64(req.seed);
  w.u16(req.steps);
  w.f32(req.strength);
  w.short_string(req.style_id);
  if (w.buffer().size() > transport::kMaxPayload) {
    throw transport::ProtocolError(transport::ProtocolErrc::kOversize);
  }
  return transport::Envelope{transport::MsgType::kStyleRequest, w.take()};
}

StyleRequest decode_request(const transport::Envelope& env) {
  transport::expect_type(env, transport::MsgType::kStyleRequest);
  transport::ByteReader r(env.payload);
  StyleRequest req;
  req.frame = transport::decode_frame_payload(r.blob());
  req.condition = conditioning::decode_condition_payload(r.blob());
  req.seed = r.u64();
  req.steps = r.u16();
  req.strength = r.f32();
  req.style_id = r.short_string();
  r.expect_end();
  return req;
}

transport::Envelope encode_result(const StyleResult& res) {
  transport::ByteWriter w;
  w.blob(transport::encode_frame_payload(res.frame));
  w.u64(res.timings.encode_ns);
  w.u64(res.timings.inference_ns);
  w.u64(res.timings.decode_ns);
  w.u64(res.timings.total_ns);
  w.short_string(res.worker_id);
  return transport::Envelope{transport::MsgType::kStyleResult, w.take()};
}

StyleResult decode_result(const transport::Envelope& env) {
  transport::expect_type(env, transport::MsgType::kStyleResult);
  transport::ByteReader r(env.payload);
  StyleResult res;
  res.frame = transport::decode_frame_payload(r.blob());
  res.timings.encode_ns = r.u64();
  res.timings.inference_ns = r.u64();
  res.timings.decode_ns = r.u64();
  res.timings.total_ns = r.u64();
  res.worker_id = r.short_string();
  r.expect_end();
  return res;
}

StyleOutcome MockStylizer::stylize(const StyleRequest& req) {
  return StyleOutcome{StyleStatus::kOk, mock_stylize(req), {}};
}

DelayStylizer::DelayStylizer(std::chrono::nanoseconds delay, std::shared_ptr<Stylizer> inner)
    : DelayStylizer(DelayFn([delay](const StyleRequest&) { return delay; }), std::move(inner)) {}

DelayStylizer::DelayStylizer(DelayFn delay, std::shared_ptr<Stylizer> inner)
    : delay_(std::move(delay)), inner_(std::move(inner)) {}

StyleOutcome DelayStylizer::stylize(const StyleRequest& req) {
  const auto start = Clock::now();
  const auto d = delay_(req);
  if (d.count() > 0) std::this_thread::sleep_until(start + d);
  if (inner_) return inner_->stylize(req);
  StyleResult res{req.frame, {}, "delay-stub"};
  res.timings.inference_ns = elapsed_ns(start);
  res.timings.total_ns = res.timings.inference_ns;
  return StyleOutcome{StyleStatus::kOk, std::move(res), {}};
}

RemoteStylizer::RemoteStylizer(transport::Endpoint endpoint, RemoteOptions opts)
    : endpoint_(std::move(endpoint)), opts_(opts), backoff_(opts.backoff_initial) {}

bool RemoteStylizer::connect_now() {
  try {
    channel_ = transport::TcpChannel::connect(endpoint_, std::min(opts_.timeout, std::chrono::milliseconds(1000)));
  } catch (const Error&) {
    channel_.reset();
    next_attempt_ = Clock::now() + backoff_;
    backoff_ = std::min(backoff_ * 2, opts_.backoff_max);
    return false;
  }
  if (ever_connected_) ++reconnects_;
  ever_connected_ = true;
  backoff_ = opts_.backoff_initial;
  return true;
}

void RemoteStylizer::fail_connection() {
  channel_.reset();
  next_attempt_ = Clock::now() + backoff_;
  backoff_ = std::min(backoff_ * 2, opts_.backoff_max);
}

StyleOutcome RemoteStylizer::stylize(const StyleRequest& req) {
  if (!channel_) {
    if (Clock::now() < next_attempt_) return {StyleStatus::kUnavailable, std::nullopt, "backing off"};
    if (!connect_now()) return {StyleStatus::kUnavailable, std::nullopt, "worker unreachable"};
  }
  const auto start = Clock::now();
  const auto deadline = start + opts_.timeout;
  try {
    channel_->send(encode_request(req));
    for (;;) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      std::optional<transport::Envelope> env;
      if (left.count() > 0) env = channel_->receive(left);
      if (!env) {
        // The late reply would be mistaken for the next one; abandon the
        // connection and reconnect on the next call without backoff.
        channel_.reset();
        next_attempt_ = Clock::now();
        ++timeouts_;
        return {StyleStatus::kDropped, std::nullopt, "timeout"};
      }
      if (env->type == transport::MsgType::kError) {
        return {StyleStatus::kDropped, std::nullopt, transport::decode_error(*env).message};
      }
      StyleResult res = decode_result(*env);
      if (res.frame.id != req.frame.id) continue;  // stale reply
      return {StyleStatus::kOk, std::move(res), {}};
    }
  } catch (const transport::ProtocolError& e) {
    fail_connection();
    return {StyleStatus::kUnavailable, std::nullopt, e.what()};
  } catch (const transport::NetworkError& e) {
    fail_connection();
    return {StyleStatus::kUnavailable, std::nullopt, e.what()};
  }
}

struct StyleWorkerServer::Session {
  std::unique_ptr<transport::TcpChannel> channel;
  std::jthread thread;
  std::atomic<bool> done{false};

  ~Session() {
    if (channel) channel->shutdown();
    thread.request_stop();
    if (thread.joinable()) thread.join();
  }
};

StyleWorkerServer::StyleWorkerServer(Handler handler, std::string worker_id)
    : handler_(handler ? std::move(handler) : Handler(mock_stylize)), worker_id_(std::move(worker_id)) {}

StyleWorkerServer::~StyleWorkerServer() { stop(); }

std::uint16_t StyleWorkerServer::listen(const transport::Endpoint& ep) {
  listener_ = transport::Socket::listen(ep);
  const std::uint16_t port = listener_.local_port();
  acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
  return port;
}

void StyleWorkerServer::stop() {
  if (acceptor_.joinable()) {
    acceptor_.request_stop();
    acceptor_.join();
  }
  std::list<std::unique_ptr<Session>> sessions;
  {
    std::lock_guard lock(mu_);
    sessions.swap(sessions_);
  }
  sessions.clear();
  listener_.close();
}

void StyleWorkerServer::accept_loop(std::stop_token st) {
  while (!st.stop_requested()) {
    transport::Socket s;
    try {
      s = listener_.accept(std::chrono::milliseconds(100));
    } catch (const Error&) {
      continue;
    }
    std::lock_guard lock(mu_);
    std::erase_if(sessions_, [](const std::unique_ptr<Session>& x) { return x->done.load(); });
    if (!s.valid()) continue;
    auto session = std::make_unique<Session>();
    session->channel = std::make_unique<transport::TcpChannel>(std::move(s));
    Session* raw = session.get();
    sessions_.push_back(std::move(session));
    raw->thread = std::jthread([this, raw](std::stop_token sst) { serve(sst, raw); });
  }
}

void StyleWorkerServer::serve(std::stop_token st, Session* session) {
  auto& ch = *session->channel;
  try {
    while (!st.stop_requested()) {
      std::optional<transport::Envelope> env;
      try {
        env = ch.receive(std::chrono::milliseconds(100));
      } catch (const transport::ProtocolError& e) {
        ch.send(transport::encode_error({transport::ErrorCode::kMalformed, e.what()}));
        break;  // framing is lost
      }
      if (!env) continue;
      const auto start = Clock::now();
      StyleRequest req;
      try {
        req = decode_request(*env);
      } catch (const transport::ProtocolError& e) {
        ch.send(transport::encode_error({transport::ErrorCode::kMalformed, e.what()}));
        continue;
      }
      const std::uint64_t decode_ns = elapsed_ns(start);
      StyleResult res;
      try {
        res = handler_(req);
      } catch (const std::exception& e) {
        ch.send(transport::encode_error({transport::ErrorCode::kWorkerFailure, e.what()}));
        continue;
      }
      res.worker_id = worker_id_;
      const auto enc_start = Clock::now();
      res.timings.decode_ns = decode_ns;
      transport::Envelope reply = encode_result(res);
      res.timings.encode_ns = elapsed_ns(enc_start);
      res.timings.total_ns = elapsed_ns(start);
      patch_timings(reply, res.timings);
      ch.send(reply);
      ++served_;
    }
  } catch (const Error&) {
    // peer went away
  }
  session->done = true;
}

}  // namespace drive::stylizer
