#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "drive/transport/channel.hpp"
#include "drive/transport/messages.hpp"

namespace drive::transport {

/// Per-subscriber delivery queue.
///
/// Image topics keep a single latest-value slot: a new message replaces any
/// undelivered one, so a stalled subscriber holds O(1) frames. Other topics
/// keep an unbounded FIFO so every control and metrics message arrives in
/// publication order.
class Subscription {
 public:
  explicit Subscription(Topic topic) : topic_(topic) {}

  Topic topic() const noexcept { return topic_; }

  // Never blocks on the reader.
  void deliver(Envelope env);
  // Blocks until a message is available, the timeout expires or close().
  std::optional<Envelope> next(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;

  std::size_t pending() const;
  std::uint64_t coalesced() const noexcept { return coalesced_.load(); }

 private:
  const Topic topic_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Envelope> queue_;
  bool closed_ = false;
  std::atomic<std::uint64_t> coalesced_{0};
};

/// Topic pub/sub hub. In-process publishers and subscribers call publish() /
/// subscribe() directly; remote peers speak the envelope protocol over TCP
/// (listen_tcp) or WebSocket (listen_websocket).
///
/// Remote protocol: a peer sends Subscribe(topic) to receive a topic, or
/// Subscribe(topic, advertise) to bind the frames it publishes afterwards to
/// that topic. ConditionMap, ControlUpdate and MetricsSnapshot envelopes map
/// to their only topic without advertising. Unknown topics get an Error
/// envelope and the connection is closed.
class Broker {
 public:
  Broker() = default;
  ~Broker();
  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  void publish(Topic topic, Envelope env);
  std::shared_ptr<Subscription> subscribe(Topic topic);

  // Binds and starts accepting; returns the bound port (useful with port 0).
  std::uint16_t listen_tcp(const Endpoint& ep);
  std::uint16_t listen_websocket(const Endpoint& ep);

  void stop();

  std::size_t subscriber_count(Topic topic);
  std::size_t connection_count();

 private:
  struct Connection;
  using ChannelFactory = std::function<std::unique_ptr<EnvelopeChannel>(Socket)>;

  std::uint16_t start_listener(const Endpoint& ep, ChannelFactory factory);
  void accept_loop(std::stop_token st, const Socket& listener, ChannelFactory factory);
  void serve(std::stop_token st, Connection* conn);
  void reap_finished();

  std::mutex mu_;
  std::map<Topic, std::vector<std::weak_ptr<Subscription>>> subs_;
  std::list<std::shared_ptr<Connection>> connections_;
  std::vector<std::unique_ptr<Socket>> listeners_;
  std::vector<std::jthread> acceptors_;
  std::atomic<bool> stopping_{false};
};

/// Blocking TCP client for a remote broker.
class BrokerClient {
 public:
  static BrokerClient connect(const Endpoint& ep,
                              std::chrono::milliseconds timeout = std::chrono::seconds(2));

  void advertise(Topic topic);
  void subscribe(Topic topic);
  void subscribe_raw(const std::string& topic_name);
  void publish(const Envelope& env);
  std::optional<Envelope> receive(std::chrono::milliseconds timeout);
  void shutdown() noexcept { channel_->shutdown(); }

 private:
  explicit BrokerClient(std::unique_ptr<TcpChannel> ch) : channel_(std::move(ch)) {}
  std::unique_ptr<TcpChannel> channel_;
};

}  // namespace drive::transport
