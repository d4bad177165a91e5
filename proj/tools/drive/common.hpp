#pragma once

#include <cstdint>
#include <functional>
#include <stop_token>
#include <string>
#include <thread>

#include <CLI11.hpp>

namespace drive::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitNetwork = 2,      // port in use, broker unreachable
  kExitBadInput = 3,     // missing or malformed input file
  kExitUnreachable = 4,  // remote stylizer unreachable
  kExitFailure = 5,
  kExitUsage = 64,
};

struct Resolution {
  std::uint32_t width = 640;
  std::uint32_t height = 480;
};

// "WxH" -> Resolution; throws CLI::ValidationError.
Resolution parse_resolution(const std::string& text);
CLI::Validator resolution_validator();

// Runs `body`, mapping library exceptions onto exit codes and printing a
// one-line diagnostic to stderr.
int guarded(const std::function<int()>& body);

/// Blocks SIGINT/SIGTERM for the whole process (construct before starting
/// threads) and requests `source` to stop when one arrives.
class SignalStop {
 public:
  explicit SignalStop(std::stop_source source);
  ~SignalStop();
  SignalStop(const SignalStop&) = delete;
  SignalStop& operator=(const SignalStop&) = delete;

  bool signalled() const noexcept { return signalled_; }

 private:
  std::stop_source source_;
  std::jthread waiter_;
  bool signalled_ = false;
};

void add_run(CLI::App& app);
void add_replay(CLI::App& app);
void add_bench(CLI::App& app);
void add_eval(CLI::App& app);
void add_sample(CLI::App& app);
void add_worker_mock(CLI::App& app);

// Set by the subcommand callback; main returns it.
int& exit_status();

}  // namespace drive::cli
