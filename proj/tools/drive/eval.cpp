#include <cstdio>
#include <fstream>
#include <memory>

#include "common.hpp"
#include "drive/error.hpp"
#include "drive/evaluation.hpp"

namespace drive::cli {

namespace {

struct EvalArgs {
  std::string sessions;
  std::string racing_line;
  std::string out;
  std::size_t area_samples = 200;
};

int eval_command(const EvalArgs& a) {
  const sim::RacingLineFile line = sim::load_racing_line(a.racing_line);
  const std::vector<eval::Session> sessions = eval::load_sessions(a.sessions);
  eval::EvalReport report;
  try {
    report = eval::make_report(sessions, line.line.polyline, line.start_line, a.area_samples);
  } catch (const eval::IncompleteSession& e) {
    std::fprintf(stderr, "drive: %s\n", e.what());
    return kExitBadInput;
  }
  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw IoError("cannot write " + a.out);
    out << report.csv();
  }
  std::fputs(report.table().c_str(), stdout);
  return kExitOk;
}

}  // namespace

void add_eval(CLI::App& app) {
  auto args = std::make_shared<EvalArgs>();
  CLI::App* cmd = app.add_subcommand("eval", "Score driving sessions against the racing line");
  cmd->add_option("--sessions", args->sessions, "Directory of <condition>_<id>.csv trajectories")->required();
  cmd->add_option("--racing-line", args->racing_line, "Racing-line or track JSON")->required();
  cmd->add_option("--out", args->out, "Report CSV (condition,metric,mean,std)");
  cmd->add_option("--area-samples", args->area_samples, "Resample count for the area metric")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  cmd->callback([args] { exit_status() = guarded([&] { return eval_command(*args); }); });
}

}  // namespace drive::cli
