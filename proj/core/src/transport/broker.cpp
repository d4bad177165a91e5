#include "drive/transport/broker.hpp"

#include <algorithm>

#include "drive/transport/websocket.hpp"

namespace drive::transport {

namespace {
constexpr auto kPoll = std::chrono::milliseconds(100);
}

void Subscription::deliver(Envelope env) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (is_image_topic(topic_) && !queue_.empty()) {
      queue_.front() = std::move(env);
      coalesced_.fetch_add(1, std::memory_order_relaxed);
    } else {
      queue_.push_back(std::move(env));
    }
  }
  cv_.notify_one();
}

std::optional<Envelope> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || !queue_.empty(); });
  if (queue_.empty()) return std::nullopt;
  Envelope env = std::move(queue_.front());
  queue_.pop_front();
  return env;
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    queue_.clear();
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::size_t Subscription::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

struct Broker::Connection {
  Socket socket;  // consumed by the factory inside serve()
  ChannelFactory factory;
  std::unique_ptr<EnvelopeChannel> channel;
  std::mutex mu;
  std::vector<std::shared_ptr<Subscription>> subs;
  std::vector<std::jthread> writers;
  std::jthread reader;
  std::atomic<bool> done{false};

  void halt() {
    std::lock_guard lock(mu);
    for (auto& s : subs) s->close();
    if (channel) channel->shutdown();
    socket.shutdown();
  }

  ~Connection() {
    halt();
    std::vector<std::jthread> ws;
    {
      std::lock_guard lock(mu);
      ws.swap(writers);
    }
    for (auto& w : ws) w.request_stop();
    ws.clear();
    reader.request_stop();
    if (reader.joinable()) reader.join();
  }
};

Broker::~Broker() { stop(); }

void Broker::publish(Topic topic, Envelope env) {
  std::vector<std::shared_ptr<Subscription>> live;
  {
    std::lock_guard lock(mu_);
    auto& list = subs_[topic];
    std::erase_if(list, [&](const std::weak_ptr<Subscription>& w) {
      auto s = w.lock();
      if (!s || s->closed()) return true;
      live.push_back(std::move(s));
      return false;
    });
  }
  for (std::size_t i = 0; i < live.size(); ++i) {
    if (i + 1 == live.size()) {
      live[i]->deliver(std::move(env));
    } else {
      live[i]->deliver(env);
    }
  }
}

std::shared_ptr<Subscription> Broker::subscribe(Topic topic) {
  auto sub = std::make_shared<Subscription>(topic);
  std::lock_guard lock(mu_);
  subs_[topic].push_back(sub);
  return sub;
}

std::size_t Broker::subscriber_count(Topic topic) {
  std::lock_guard lock(mu_);
  auto& list = subs_[topic];
  return static_cast<std::size_t>(std::count_if(list.begin(), list.end(), [](const auto& w) {
    auto s = w.lock();
    return s && !s->closed();
  }));
}

std::size_t Broker::connection_count() {
  reap_finished();
  std::lock_guard lock(mu_);
  return connections_.size();
}

std::uint16_t Broker::listen_tcp(const Endpoint& ep) {
  return start_listener(ep, [](Socket s) -> std::unique_ptr<EnvelopeChannel> {
    return std::make_unique<TcpChannel>(std::move(s));
  });
}

std::uint16_t Broker::listen_websocket(const Endpoint& ep) {
  return start_listener(ep, [](Socket s) -> std::unique_ptr<EnvelopeChannel> {
    return WebSocketChannel::accept(std::move(s), std::chrono::seconds(5));
  });
}

std::uint16_t Broker::start_listener(const Endpoint& ep, ChannelFactory factory) {
  auto listener = std::make_unique<Socket>(Socket::listen(ep));
  const std::uint16_t port = listener->local_port();
  std::lock_guard lock(mu_);
  const Socket& ref = *listener;
  listeners_.push_back(std::move(listener));
  acceptors_.emplace_back([this, &ref, factory = std::move(factory)](std::stop_token st) {
    accept_loop(st, ref, factory);
  });
  return port;
}

void Broker::accept_loop(std::stop_token st, const Socket& listener, ChannelFactory factory) {
  while (!st.stop_requested()) {
    Socket s;
    try {
      s = listener.accept(kPoll);
    } catch (const NetworkError&) {
      continue;
    }
    reap_finished();
    if (!s.valid()) continue;
    auto conn = std::make_shared<Connection>();
    conn->socket = std::move(s);
    conn->factory = factory;
    std::lock_guard lock(mu_);
    if (stopping_) return;
    connections_.push_back(conn);
    // The thread borrows a raw pointer. If it held a shared_ptr, the last
    // reference could be dropped when the thread state is destroyed, and the
    // Connection destructor would then join its own reader thread.
    Connection* raw = conn.get();
    raw->reader = std::jthread([this, raw](std::stop_token rst) { serve(rst, raw); });
  }
}

void Broker::serve(std::stop_token st, Connection* conn) {
  try {
    auto channel = conn->factory(std::move(conn->socket));
    {
      std::lock_guard lock(conn->mu);
      conn->channel = std::move(channel);
    }
  } catch (const Error&) {
    conn->done = true;
    return;
  }
  EnvelopeChannel& ch = *conn->channel;
  std::optional<Topic> advertised;

  try {
    while (!st.stop_requested()) {
      std::optional<Envelope> env;
      try {
        env = ch.receive(kPoll);
      } catch (const ProtocolError& e) {
        ch.send(encode_error({ErrorCode::kMalformed, e.what()}));
        break;
      }
      if (!env) continue;

      if (env->type == MsgType::kSubscribe) {
        SubscribeMsg msg;
        try {
          msg = decode_subscribe(*env);
        } catch (const ProtocolError& e) {
          ch.send(encode_error({ErrorCode::kMalformed, e.what()}));
          break;
        }
        const auto topic = parse_topic(msg.topic);
        if (!topic) {
          ch.send(encode_error({ErrorCode::kInvalidTopic, "invalid topic '" + msg.topic + "'"}));
          break;
        }
        if (msg.mode == SubscribeMode::kAdvertise) {
          advertised = *topic;
          continue;
        }
        auto sub = subscribe(*topic);
        std::lock_guard lock(conn->mu);
        conn->subs.push_back(sub);
        conn->writers.emplace_back([conn, sub](std::stop_token wst) {
          while (!wst.stop_requested()) {
            auto out = sub->next(kPoll);
            if (!out) {
              if (sub->closed()) return;
              continue;
            }
            try {
              conn->channel->send(*out);
            } catch (const Error&) {
              conn->halt();
              return;
            }
          }
        });
        continue;
      }

      std::optional<Topic> target = advertised;
      if (!target) {
        switch (env->type) {
          case MsgType::kConditionMap: target = Topic::kFramesCondition; break;
          case MsgType::kControlUpdate: target = Topic::kControl; break;
          case MsgType::kMetricsSnapshot: target = Topic::kMetrics; break;
          default: break;
        }
      }
      if (!target) {
        ch.send(encode_error({ErrorCode::kNotAdvertised,
                              std::string(to_string(env->type)) + " sent before advertising a topic"}));
        continue;
      }
      publish(*target, std::move(*env));
    }
  } catch (const Error&) {
    // connection reset: the subscriber is dropped silently
  }
  conn->halt();
  conn->done = true;
}

void Broker::reap_finished() {
  std::list<std::shared_ptr<Connection>> finished;
  {
    std::lock_guard lock(mu_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      if ((*it)->done) {
        finished.push_back(std::move(*it));
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }
  // destructors join outside the broker lock
}

void Broker::stop() {
  std::list<std::shared_ptr<Connection>> conns;
  std::vector<std::jthread> acceptors;
  {
    std::lock_guard lock(mu_);
    if (stopping_.exchange(true)) return;
    conns.swap(connections_);
    acceptors.swap(acceptors_);
    for (auto& [topic, list] : subs_) {
      for (auto& w : list) {
        if (auto s = w.lock()) s->close();
      }
    }
  }
  for (auto& a : acceptors) a.request_stop();
  acceptors.clear();
  for (auto& c : conns) c->halt();
  conns.clear();
  listeners_.clear();
}

BrokerClient BrokerClient::connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
  return BrokerClient(TcpChannel::connect(ep, timeout));
}

void BrokerClient::advertise(Topic topic) {
  channel_->send(encode_subscribe({std::string(topic_name(topic)), SubscribeMode::kAdvertise}));
}

void BrokerClient::subscribe(Topic topic) { subscribe_raw(std::string(topic_name(topic))); }

void BrokerClient::subscribe_raw(const std::string& name) {
  channel_->send(encode_subscribe({name, SubscribeMode::kSubscribe}));
}

void BrokerClient::publish(const Envelope& env) { channel_->send(env); }

std::optional<Envelope> BrokerClient::receive(std::chrono::milliseconds timeout) {
  return channel_->receive(timeout);
}

}  // namespace drive::transport
