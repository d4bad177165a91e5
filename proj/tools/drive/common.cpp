#include "common.hpp"

#include <signal.h>

#include <charconv>
#include <cstdio>
#include <ctime>

#include "drive/error.hpp"
#include "drive/transport/envelope.hpp"
#include "drive/transport/socket.hpp"

namespace drive::cli {

int& exit_status() {
  static int status = kExitOk;
  return status;
}

Resolution parse_resolution(const std::string& text) {
  const auto x = text.find('x');
  Resolution r;
  auto num = [&](std::string_view s, std::uint32_t& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size() && out > 0 && out <= 8192;
  };
  if (x == std::string::npos || !num(std::string_view(text).substr(0, x), r.width) ||
      !num(std::string_view(text).substr(x + 1), r.height)) {
    throw CLI::ValidationError("resolution", "expected WxH, got '" + text + "'");
  }
  return r;
}

CLI::Validator resolution_validator() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          parse_resolution(s);
          return {};
        } catch (const CLI::ValidationError& e) {
          return e.what();
        }
      },
      "WxH");
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const transport::AddressInUse& e) {
    std::fprintf(stderr, "drive: %s\n", e.what());
    return kExitNetwork;
  } catch (const transport::NetworkError& e) {
    std::fprintf(stderr, "drive: network error: %s\n", e.what());
    return kExitNetwork;
  } catch (const IoError& e) {
    std::fprintf(stderr, "drive: %s\n", e.what());
    return kExitBadInput;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "drive: %s\n", e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "drive: %s\n", e.what());
    return kExitFailure;
  }
}

SignalStop::SignalStop(std::stop_source source) : source_(std::move(source)) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  waiter_ = std::jthread([this, set](std::stop_token st) {
    const timespec poll{0, 100'000'000};
    while (!st.stop_requested()) {
      if (sigtimedwait(&set, nullptr, &poll) > 0) {
        signalled_ = true;
        source_.request_stop();
        return;
      }
    }
  });
}

SignalStop::~SignalStop() {
  waiter_.request_stop();
  waiter_.join();
}

}  // namespace drive::cli
