#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <thread>

#include "common.hpp"
#include "drive/error.hpp"
#include "drive/pipeline/pipeline.hpp"
#include "drive/simworld.hpp"
#include "drive/stylizer.hpp"
#include "link.hpp"

namespace drive::cli {

namespace {

// Installed copy first, then the source tree (for runs from a build dir).
std::string default_track() {
#if defined(DRIVE_INSTALLED_TRACK) && defined(DRIVE_SOURCE_TRACK)
  if (std::filesystem::exists(DRIVE_INSTALLED_TRACK)) return DRIVE_INSTALLED_TRACK;
  return DRIVE_SOURCE_TRACK;
#else
  return "default_track.json";
#endif
}

struct RunArgs {
  std::string track = default_track();
  std::string broker;
  std::string listen_host = "127.0.0.1";
  int broker_port = 7071;
  int console_port = 7072;
  std::string worker;
  std::uint64_t seed = kDefaultSeed;
  double fps = kDefaultTargetFps;
  bool no_enhance = false;
  std::string resolution = "640x480";
  std::uint64_t frames = 0;
  std::string trajectory = "trajectory.csv";
  std::string control_script;
  std::string digest_out;
  bool lockstep = false;
};

std::shared_ptr<stylizer::Stylizer> make_stylizer(const std::string& worker) {
  if (worker.empty()) return std::make_shared<stylizer::MockStylizer>();
  auto remote = std::make_shared<stylizer::RemoteStylizer>(transport::Endpoint::parse(worker));
  if (!remote->connect_now()) {
    std::fprintf(stderr, "drive: worker %s not reachable yet; frames pass through until it is\n",
                 worker.c_str());
  }
  return remote;
}

std::optional<conditioning::ThresholdField> field_from(const transport::ControlUpdate& u) {
  if (!u.focus_active) return std::nullopt;
  conditioning::ThresholdField f;
  f.focus_x = u.focus_x;
  f.focus_y = u.focus_y;
  f.r_inner = u.r_inner;
  f.r_outer = u.r_outer;
  f.fine = {u.fine_low, u.fine_high};
  f.coarse = {u.coarse_low, u.coarse_high};
  try {
    f.validate();
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "drive: ignoring threshold field: %s\n", e.what());
    return std::nullopt;
  }
  return f;
}

int run_command(const RunArgs& a) {
  sim::TrackFile track;
  try {
    track = sim::load_track_file(a.track);
  } catch (const Error& e) {
    std::fprintf(stderr, "drive: bad track file %s: %s\n", a.track.c_str(), e.what());
    return kExitBadInput;
  }
  std::optional<sim::ControlScript> script;
  if (!a.control_script.empty()) script = sim::ControlScript::load(a.control_script);

  const Resolution res = parse_resolution(a.resolution);
  PipelineConfig config;
  config.width = res.width;
  config.height = res.height;
  config.target_fps = a.fps;
  config.seed = a.seed;
  config.enhancement_enabled = !a.no_enhance;
  if (!a.worker.empty()) config.worker_endpoint = a.worker;
  config.validate();

  std::stop_source stop;
  SignalStop signals(stop);

  std::unique_ptr<BrokerLink> link =
      a.broker.empty() ? embedded_broker(a.listen_host, a.broker_port, a.console_port)
                       : remote_broker(transport::Endpoint::parse(a.broker));

  auto session = std::make_shared<sim::SimSession>(sim::start_state(track.track));
  if (script) session->set_script(*script);
  auto renderer = std::make_shared<const sim::Renderer>(
      track.track, track.racing_line, sim::CameraIntrinsics::for_resolution(res.width, res.height),
      res.width, res.height);
  auto source = std::make_shared<sim::SimSource>(session, renderer, a.fps, !a.lockstep, a.frames);

  pipeline::PipelineOptions opts;
  opts.lockstep = a.lockstep;
  pipeline::Pipeline pipe(config, source, make_stylizer(a.worker), opts);
  pipe.set_enhancement(config.enhancement_enabled);
  pipe.add_sink(link->frame_sink());
  pipe.set_metrics_sink(link->metrics_sink());
  std::optional<DigestLog> digests;
  if (!a.digest_out.empty()) {
    digests.emplace(a.digest_out);
    pipe.add_sink([&](const pipeline::EmittedFrame& f) { digests->add(f); });
  }

  // Control updates steer the vehicle unless a script owns the controls.
  std::jthread control([&](std::stop_token st) {
    while (!st.stop_requested()) {
      auto u = link->next_control(std::chrono::milliseconds(100));
      if (!u) continue;
      if (!script) session->set_control({u->steer, u->throttle, u->brake});
      pipe.set_enhancement(u->enhancement_enabled);
      pipe.set_threshold_field(field_from(*u));
    }
  });

  std::printf("drive run: %s, %ux%u at %.1f fps, seed %llu, %s\n", link->describe().c_str(), res.width,
              res.height, a.fps, static_cast<unsigned long long>(a.seed),
              config.enhancement_enabled ? "enhancement on" : "passthrough");
  std::fflush(stdout);

  const pipeline::PipelineStats stats = pipe.run(stop.get_token());
  control.request_stop();
  control.join();

  sim::save_trajectory_csv(session->trajectory(), a.trajectory);
  std::printf("frames in %llu, out %llu, dropped %llu (%.1f%%), %.2f fps, p99 %.1f ms\n",
              static_cast<unsigned long long>(stats.frames_in),
              static_cast<unsigned long long>(stats.frames_out),
              static_cast<unsigned long long>(stats.dropped()), 100.0 * stats.drop_rate(),
              stats.output_fps(), double(stats.latency.percentile(0.99)) / 1e6);
  std::printf("trajectory: %s (%zu samples)\n", a.trajectory.c_str(),
              session->trajectory().samples.size());
  if (digests) {
    std::printf("styled stream digest: %016llx\n",
                static_cast<unsigned long long>(digests->stream_digest()));
  }
  return kExitOk;
}

}  // namespace

void add_run(CLI::App& app) {
  auto args = std::make_shared<RunArgs>();
  CLI::App* cmd = app.add_subcommand("run", "Drive the simulator through the live pipeline");
  cmd->add_option("--track", args->track, "Track and racing-line JSON")->capture_default_str();
  cmd->add_option("--broker", args->broker, "Use an external broker at HOST:PORT instead of embedding one")
      ->envname("DRIVE_BROKER_ADDR");
  cmd->add_option("--listen-host", args->listen_host, "Interface for the embedded broker")
      ->capture_default_str();
  cmd->add_option("--broker-port", args->broker_port, "Embedded broker TCP port (0: any)")
      ->capture_default_str()
      ->check(CLI::Range(0, 65535));
  cmd->add_option("--console-port", args->console_port, "Console web-socket port (0: any, -1: off)")
      ->capture_default_str()
      ->check(CLI::Range(-1, 65535));
  cmd->add_option("--worker", args->worker, "Remote stylizer HOST:PORT (default: in-process mock)");
  cmd->add_option("--seed", args->seed, "Stylizer base seed")->capture_default_str()->envname("DRIVE_SEED");
  cmd->add_option("--fps", args->fps, "Simulator frame rate")
      ->capture_default_str()
      ->check(CLI::Range(0.1, 240.0));
  cmd->add_flag("--no-enhance", args->no_enhance, "Pass raw frames through (condition B)");
  cmd->add_option("--resolution", args->resolution, "Output resolution WxH")
      ->capture_default_str()
      ->check(resolution_validator());
  cmd->add_option("--frames", args->frames, "Stop after N frames (0: until interrupted)")
      ->capture_default_str();
  cmd->add_option("--trajectory", args->trajectory, "Trajectory CSV written on exit")->capture_default_str();
  cmd->add_option("--control-script", args->control_script, "Drive from a t_ms,steer,throttle,brake CSV");
  cmd->add_option("--digest-out", args->digest_out, "Write per-frame styled digests");
  cmd->add_flag("--lockstep", args->lockstep, "Unpaced, lossless hand-off (deterministic runs)");
  cmd->callback([args] { exit_status() = guarded([&] { return run_command(*args); }); });
}

}  // namespace drive::cli
