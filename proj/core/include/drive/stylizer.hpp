#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "drive/conditioning.hpp"
#include "drive/frame.hpp"
#include "drive/transport/broker.hpp"
#include "drive/transport/channel.hpp"

namespace drive::stylizer {

using conditioning::ConditionMap;

inline constexpr std::uint64_t kDefaultSessionSeed = 42;
inline constexpr int kNoiseAmplitude = 24;

struct StyleRequest {
  Frame frame;
  ConditionMap condition;
  std::uint64_t seed = kDefaultSessionSeed;
  std::uint16_t steps = 1;
  float strength = 0.6f;
  std::string style_id = "thunderhill";

  void validate() const;
};

struct StageTimings {
  std::uint64_t encode_ns = 0;
  std::uint64_t inference_ns = 0;
  std::uint64_t decode_ns = 0;
  std::uint64_t total_ns = 0;

  friend bool operator==(const StageTimings&, const StageTimings&) = default;
};

struct StyleResult {
  Frame frame;
  StageTimings timings;
  std::string worker_id;

  friend bool operator==(const StyleResult&, const StyleResult&) = default;
};

/// Every frame of a session is stylized with the same seed, so identical
/// inputs always map to identical outputs.
struct SeedPolicy {
  enum class Mode : std::uint8_t { kFixedPerSession };
  Mode mode = Mode::kFixedPerSession;
  std::uint64_t session_seed = kDefaultSessionSeed;
};

std::uint64_t seed_for_frame(const SeedPolicy& policy, std::uint64_t frame_id) noexcept;

// Tone curve applied per channel, rows r, g, b. Also shipped as data/tone_lut.csv.
const std::array<std::array<std::uint8_t, 256>, 3>& tone_lut() noexcept;

// Counter-based noise: 64 bits that depend only on (seed, x, y).
std::uint64_t noise_bits(std::uint64_t seed, std::uint32_t x, std::uint32_t y) noexcept;
// Offset in [-24, 24] before strength scaling.
int noise_offset(std::uint64_t seed, std::uint32_t x, std::uint32_t y) noexcept;
// strength in 1/1024 units; the per-pixel path stays integer-only.
int quantize_strength(float strength) noexcept;
int scale_offset(int offset, int strength_q) noexcept;

/// Deterministic stand-in for the diffusion worker: LUT, then seeded value
/// noise, then every condition==255 pixel copied back from the input.
StyleResult mock_stylize(const StyleRequest& req);

// Wire codecs (msg_type 3 and 4). Embedded frame and condition payloads are
// u32-length-prefixed sub-encodings.
transport::Envelope encode_request(const StyleRequest& req);
StyleRequest decode_request(const transport::Envelope& env);
transport::Envelope encode_result(const StyleResult& res);
StyleResult decode_result(const transport::Envelope& env);

enum class StyleStatus {
  kOk,
  kDropped,      // timed out or failed; the frame is not shown
  kUnavailable,  // worker unreachable; caller shows the unstyled frame
};

struct StyleOutcome {
  StyleStatus status = StyleStatus::kOk;
  std::optional<StyleResult> result;
  std::string detail;
};

class Stylizer {
 public:
  virtual ~Stylizer() = default;
  virtual StyleOutcome stylize(const StyleRequest& req) = 0;
};

class MockStylizer final : public Stylizer {
 public:
  StyleOutcome stylize(const StyleRequest& req) override;
};

// Stub with a programmable per-call delay; wraps another stylizer or, when
// `inner` is null, returns the request frame unchanged.
class DelayStylizer final : public Stylizer {
 public:
  using DelayFn = std::function<std::chrono::nanoseconds(const StyleRequest&)>;

  DelayStylizer(std::chrono::nanoseconds delay, std::shared_ptr<Stylizer> inner = nullptr);
  DelayStylizer(DelayFn delay, std::shared_ptr<Stylizer> inner = nullptr);

  StyleOutcome stylize(const StyleRequest& req) override;

 private:
  DelayFn delay_;
  std::shared_ptr<Stylizer> inner_;
};

struct RemoteOptions {
  std::chrono::milliseconds timeout{1000};
  std::chrono::milliseconds backoff_initial{100};
  std::chrono::milliseconds backoff_max{5000};
};

/// Client for a worker speaking the StyleRequest/StyleResult protocol. One
/// request in flight per connection. A timeout drops the frame and abandons
/// the connection; connection failures make the stylizer report
/// kUnavailable until a reconnect (exponential backoff) succeeds.
class RemoteStylizer final : public Stylizer {
 public:
  explicit RemoteStylizer(transport::Endpoint endpoint, RemoteOptions opts = {});

  StyleOutcome stylize(const StyleRequest& req) override;

  // Attempts a connection now, ignoring backoff; true when connected.
  bool connect_now();
  bool connected() const noexcept { return channel_ != nullptr; }

  std::uint64_t timeouts() const noexcept { return timeouts_; }
  std::uint64_t reconnects() const noexcept { return reconnects_; }
  std::chrono::milliseconds current_backoff() const noexcept { return backoff_; }

 private:
  void fail_connection();

  transport::Endpoint endpoint_;
  RemoteOptions opts_;
  std::unique_ptr<transport::TcpChannel> channel_;
  std::chrono::steady_clock::time_point next_attempt_{};
  std::chrono::milliseconds backoff_;
  std::uint64_t timeouts_ = 0;
  std::uint64_t reconnects_ = 0;
  bool ever_connected_ = false;
};

/// TCP server answering StyleRequests with a handler (mock_stylize by default).
/// Requests on one connection are served strictly in order.
class StyleWorkerServer {
 public:
  using Handler = std::function<StyleResult(const StyleRequest&)>;

  explicit StyleWorkerServer(Handler handler = {}, std::string worker_id = "mock");
  ~StyleWorkerServer();
  StyleWorkerServer(const StyleWorkerServer&) = delete;
  StyleWorkerServer& operator=(const StyleWorkerServer&) = delete;

  std::uint16_t listen(const transport::Endpoint& ep);
  void stop();

  std::uint64_t served() const noexcept { return served_; }

 private:
  struct Session;
  void accept_loop(std::stop_token st);
  void serve(std::stop_token st, Session* session);

  Handler handler_;
  std::string worker_id_;
  transport::Socket listener_;
  std::mutex mu_;
  std::list<std::unique_ptr<Session>> sessions_;
  std::jthread acceptor_;
  std::atomic<std::uint64_t> served_{0};
};

}  // namespace drive::stylizer
