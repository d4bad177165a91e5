#include <cstdio>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "drive/error.hpp"
#include "drive/pipeline/pipeline.hpp"
#include "drive/stylizer.hpp"

namespace drive::cli {

namespace {

struct BenchArgs {
  std::uint64_t frames = 300;
  std::string resolution = "640x480";
  std::string stylizer = "mock";
  std::string worker = "127.0.0.1:7073";
  double fps = 30.0;
  std::uint64_t seed = kDefaultSeed;
  std::string report;
};

double ms(std::uint64_t ns) { return double(ns) / 1e6; }

int bench_command(const BenchArgs& a) {
  const Resolution res = parse_resolution(a.resolution);
  nlohmann::ordered_json report;
  report["frames"] = a.frames;
  report["resolution"] = a.resolution;
  report["stylizer"] = a.stylizer;
  report["source_fps"] = a.fps;

  std::shared_ptr<stylizer::Stylizer> styl;
  if (a.stylizer == "remote") {
    auto remote = std::make_shared<stylizer::RemoteStylizer>(transport::Endpoint::parse(a.worker));
    if (!remote->connect_now()) {
      std::fprintf(stderr, "drive: stylizer worker %s unreachable\n", a.worker.c_str());
      return kExitUnreachable;
    }
    styl = remote;
  } else {
    styl = std::make_shared<stylizer::MockStylizer>();
  }

  pipeline::PipelineStats stats;
  if (a.frames > 0) {
    PipelineConfig config;
    config.width = res.width;
    config.height = res.height;
    config.seed = a.seed;
    config.validate();
    // Synthetic frames are produced at the configured resolution so the
    // resize step is a no-op and the measurement covers the real stages.
    auto source = std::make_shared<pipeline::SyntheticSource>(res.width, res.height, a.frames, a.fps);
    std::stop_source stop;
    SignalStop signals(stop);
    stats = pipeline::run_pipeline(config, source, styl, {}, stop.get_token());
  }

  report["frames_in"] = stats.frames_in;
  report["frames_out"] = stats.frames_out;
  report["dropped"] = stats.dropped();
  report["dropped_timeout"] = stats.dropped_timeout;
  report["passthrough"] = stats.passthrough;
  report["drop_rate"] = stats.drop_rate();
  report["achieved_fps"] = stats.output_fps();
  report["elapsed_s"] = double(stats.elapsed.count()) / 1e9;
  report["max_resident_frames"] = stats.max_resident;
  if (stats.latency.count() > 0) {
    report["latency_ms"] = {
        {"p50", ms(stats.latency.percentile(0.50))},
        {"p95", ms(stats.latency.percentile(0.95))},
        {"p99", ms(stats.latency.percentile(0.99))},
        {"max", ms(stats.latency.max_ns())},
    };
  } else {
    // Nothing was emitted, so there is no distribution to summarize.
    report["latency_ms"] = {{"p50", nullptr}, {"p95", nullptr}, {"p99", nullptr}, {"max", nullptr}};
  }

  const std::string text = report.dump(2) + "\n";
  if (!a.report.empty()) {
    std::ofstream out(a.report, std::ios::binary);
    if (!out) throw IoError("cannot write " + a.report);
    out << text;
  }
  std::fputs(text.c_str(), stdout);
  return kExitOk;
}

}  // namespace

void add_bench(CLI::App& app) {
  auto args = std::make_shared<BenchArgs>();
  CLI::App* cmd = app.add_subcommand("bench", "Measure end-to-end throughput on synthetic frames");
  cmd->add_option("--frames", args->frames, "Number of source frames")->capture_default_str();
  cmd->add_option("--resolution", args->resolution, "Frame size WxH")
      ->capture_default_str()
      ->check(resolution_validator());
  cmd->add_option("--stylizer", args->stylizer, "mock or remote")
      ->capture_default_str()
      ->check(CLI::IsMember({"mock", "remote"}));
  cmd->add_option("--worker", args->worker, "Worker HOST:PORT for --stylizer remote")->capture_default_str();
  cmd->add_option("--fps", args->fps, "Source frame rate (0: unpaced)")->capture_default_str();
  cmd->add_option("--seed", args->seed, "Stylizer base seed")->capture_default_str()->envname("DRIVE_SEED");
  cmd->add_option("--report", args->report, "Write the JSON report here as well as to stdout");
  cmd->callback([args] { exit_status() = guarded([&] { return bench_command(*args); }); });
}

}  // namespace drive::cli
