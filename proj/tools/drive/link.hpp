#pragma once

#include <chrono>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "drive/pipeline/pipeline.hpp"
#include "drive/transport/broker.hpp"
#include "drive/transport/messages.hpp"

namespace drive::cli {

/// Where pipeline output goes and control input comes from: either a broker
/// embedded in this process (TCP plus the console web-socket bridge) or an
/// external broker reached over TCP.
class BrokerLink {
 public:
  virtual ~BrokerLink() = default;

  virtual pipeline::FrameSink frame_sink() = 0;
  virtual pipeline::MetricsSink metrics_sink() = 0;
  virtual std::optional<transport::ControlUpdate> next_control(std::chrono::milliseconds timeout) = 0;
  virtual std::string describe() const = 0;
};

// console_port < 0 disables the web-socket bridge.
std::unique_ptr<BrokerLink> embedded_broker(const std::string& host, int tcp_port, int console_port);
std::unique_ptr<BrokerLink> remote_broker(const transport::Endpoint& ep);

/// One line per styled frame, `<id> <fnv64 of pixels>` in hex, plus a running
/// digest over the concatenated pixel stream.
class DigestLog {
 public:
  explicit DigestLog(const std::string& path);
  void add(const pipeline::EmittedFrame& frame);
  std::uint64_t stream_digest() const noexcept { return stream_; }

 private:
  std::ofstream out_;
  std::uint64_t stream_ = 0xcbf29ce484222325ull;
};

}  // namespace drive::cli
