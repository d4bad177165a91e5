#include <cstdio>
#include <memory>
#include <thread>

#include "common.hpp"
#include "drive/stylizer.hpp"

namespace drive::cli {

namespace {

struct WorkerArgs {
  std::string listen = "0.0.0.0:7073";
  std::string worker_id = "mock";
  unsigned delay_ms = 0;
};

int worker_command(const WorkerArgs& a) {
  std::stop_source stop;
  SignalStop signals(stop);

  stylizer::StyleWorkerServer::Handler handler = [delay = a.delay_ms](const stylizer::StyleRequest& r) {
    if (delay) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    return stylizer::mock_stylize(r);
  };
  stylizer::StyleWorkerServer server(handler, a.worker_id);
  const auto port = server.listen(transport::Endpoint::parse(a.listen));
  std::printf("worker-mock listening on port %u\n", port);
  std::fflush(stdout);

  const std::stop_token st = stop.get_token();
  while (!st.stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  std::printf("served %llu requests\n", static_cast<unsigned long long>(server.served()));
  return kExitOk;
}

}  // namespace

void add_worker_mock(CLI::App& app) {
  auto args = std::make_shared<WorkerArgs>();
  CLI::App* cmd = app.add_subcommand("worker-mock", "Serve the deterministic mock stylizer over TCP");
  cmd->add_option("--listen", args->listen, "HOST:PORT to bind")->capture_default_str();
  cmd->add_option("--worker-id", args->worker_id, "Identifier echoed in results")->capture_default_str();
  cmd->add_option("--delay-ms", args->delay_ms, "Extra per-request latency")->capture_default_str();
  cmd->callback([args] { exit_status() = guarded([&] { return worker_command(*args); }); });
}

}  // namespace drive::cli
