#include "link.hpp"

#include <cinttypes>
#include <cstdio>

#include "drive/error.hpp"

namespace drive::cli {

namespace {

using transport::Topic;

class EmbeddedLink final : public BrokerLink {
 public:
  EmbeddedLink(const std::string& host, int tcp_port, int console_port) {
    tcp_port_ = broker_.listen_tcp({host, static_cast<std::uint16_t>(tcp_port)});
    if (console_port >= 0) {
      ws_port_ = broker_.listen_websocket({host, static_cast<std::uint16_t>(console_port)});
    }
    control_ = broker_.subscribe(Topic::kControl);
  }
  ~EmbeddedLink() override { broker_.stop(); }

  pipeline::FrameSink frame_sink() override { return pipeline::broker_sink(broker_); }
  pipeline::MetricsSink metrics_sink() override { return pipeline::broker_metrics_sink(broker_); }

  std::optional<transport::ControlUpdate> next_control(std::chrono::milliseconds timeout) override {
    auto env = control_->next(timeout);
    if (!env) return std::nullopt;
    return transport::decode_control(*env);
  }

  std::string describe() const override {
    std::string s = "broker tcp :" + std::to_string(tcp_port_);
    if (ws_port_) s += ", console ws :" + std::to_string(ws_port_);
    return s;
  }

 private:
  transport::Broker broker_;
  std::shared_ptr<transport::Subscription> control_;
  std::uint16_t tcp_port_ = 0;
  std::uint16_t ws_port_ = 0;
};

class RemoteLink final : public BrokerLink {
 public:
  explicit RemoteLink(const transport::Endpoint& ep) : ep_(ep) {
    raw_ = std::make_unique<transport::BrokerClient>(transport::BrokerClient::connect(ep));
    raw_->advertise(Topic::kFramesRaw);
    styled_ = std::make_unique<transport::BrokerClient>(transport::BrokerClient::connect(ep));
    styled_->advertise(Topic::kFramesStyled);
    // Condition maps and metrics use the broker's default topic mapping.
    misc_ = std::make_unique<transport::BrokerClient>(transport::BrokerClient::connect(ep));
    control_ = std::make_unique<transport::BrokerClient>(transport::BrokerClient::connect(ep));
    control_->subscribe(Topic::kControl);
  }

  pipeline::FrameSink frame_sink() override {
    return [this](const pipeline::EmittedFrame& e) {
      raw_->publish(transport::encode_frame(e.raw));
      misc_->publish(conditioning::encode_condition(e.condition));
      styled_->publish(transport::encode_frame(e.styled));
    };
  }
  pipeline::MetricsSink metrics_sink() override {
    return [this](const pipeline::MetricsSnapshot& m) { misc_->publish(pipeline::encode_metrics(m)); };
  }

  std::optional<transport::ControlUpdate> next_control(std::chrono::milliseconds timeout) override {
    auto env = control_->receive(timeout);
    if (!env || env->type != transport::MsgType::kControlUpdate) return std::nullopt;
    return transport::decode_control(*env);
  }

  std::string describe() const override { return "external broker " + ep_.to_string(); }

 private:
  transport::Endpoint ep_;
  std::unique_ptr<transport::BrokerClient> raw_, styled_, misc_, control_;
};

}  // namespace

std::unique_ptr<BrokerLink> embedded_broker(const std::string& host, int tcp_port, int console_port) {
  return std::make_unique<EmbeddedLink>(host, tcp_port, console_port);
}

std::unique_ptr<BrokerLink> remote_broker(const transport::Endpoint& ep) {
  return std::make_unique<RemoteLink>(ep);
}

DigestLog::DigestLog(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw IoError("cannot write " + path);
}

void DigestLog::add(const pipeline::EmittedFrame& frame) {
  const auto& px = frame.styled.pixels;
  stream_ = pixel_digest(px, stream_);
  char line[64];
  std::snprintf(line, sizeof line, "%" PRIu64 " %016" PRIx64 "\n", frame.styled.id, pixel_digest(px));
  out_ << line;
}

}  // namespace drive::cli
