#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>

#include "common.hpp"
#include "drive/manifest.hpp"
#include "drive/pipeline/pipeline.hpp"
#include "drive/ppm.hpp"
#include "drive/stylizer.hpp"
#include "link.hpp"

namespace drive::cli {

namespace {

struct ReplayArgs {
  std::string manifest;
  double fps = 0.0;
  std::uint64_t seed = kDefaultSeed;
  bool no_enhance = false;
  std::string resolution = "640x480";
  std::string out_dir;
  std::string digest_out;
  std::string broker;
  bool publish = false;
  int broker_port = 7071;
  int console_port = 7072;
  bool lockstep = false;
};

int replay_command(const ReplayArgs& a) {
  FrameManifest manifest = load_manifest(a.manifest);
  const Resolution res = parse_resolution(a.resolution);
  PipelineConfig config;
  config.width = res.width;
  config.height = res.height;
  config.seed = a.seed;
  config.enhancement_enabled = !a.no_enhance;
  config.validate();

  std::stop_source stop;
  SignalStop signals(stop);

  // fps < 0 means unpaced for ReplaySource; lockstep runs never pace.
  const double source_fps = a.lockstep ? -1.0 : a.fps;
  auto source = std::make_shared<pipeline::ReplaySource>(manifest, source_fps);
  pipeline::PipelineOptions opts;
  opts.lockstep = a.lockstep;
  pipeline::Pipeline pipe(config, source, std::make_shared<stylizer::MockStylizer>(), opts);
  pipe.set_enhancement(config.enhancement_enabled);

  std::unique_ptr<BrokerLink> link;
  if (!a.broker.empty()) {
    link = remote_broker(transport::Endpoint::parse(a.broker));
  } else if (a.publish) {
    link = embedded_broker("127.0.0.1", a.broker_port, a.console_port);
  }
  if (link) {
    pipe.add_sink(link->frame_sink());
    pipe.set_metrics_sink(link->metrics_sink());
  }

  std::optional<DigestLog> digests;
  if (!a.digest_out.empty()) {
    digests.emplace(a.digest_out);
    pipe.add_sink([&](const pipeline::EmittedFrame& f) { digests->add(f); });
  }
  FrameManifest written;
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    written.base_dir = a.out_dir;
    pipe.add_sink([&](const pipeline::EmittedFrame& f) {
      char name[32];
      std::snprintf(name, sizeof name, "styled_%06llu.ppm", static_cast<unsigned long long>(f.styled.id));
      save_pnm(f.styled, std::filesystem::path(a.out_dir) / name);
      written.entries.push_back({name, f.styled.ts_ns});
    });
  }

  const pipeline::PipelineStats stats = pipe.run(stop.get_token());
  if (!a.out_dir.empty()) save_manifest(written, std::filesystem::path(a.out_dir) / "manifest.tsv");
  std::printf("replayed %zu entries: out %llu, dropped %llu, %.2f fps\n", manifest.size(),
              static_cast<unsigned long long>(stats.frames_out),
              static_cast<unsigned long long>(stats.dropped()), stats.output_fps());
  if (digests) {
    std::printf("styled stream digest: %016llx\n",
                static_cast<unsigned long long>(digests->stream_digest()));
  }
  return kExitOk;
}

}  // namespace

void add_replay(CLI::App& app) {
  auto args = std::make_shared<ReplayArgs>();
  CLI::App* cmd = app.add_subcommand("replay", "Run recorded frames from a manifest through the pipeline");
  cmd->add_option("--manifest", args->manifest, "TAB-separated path/timestamp manifest")->required();
  cmd->add_option("--fps", args->fps, "Playback rate (0: manifest timestamps, <0: unpaced)")
      ->capture_default_str();
  cmd->add_option("--seed", args->seed, "Stylizer base seed")->capture_default_str()->envname("DRIVE_SEED");
  cmd->add_flag("--no-enhance", args->no_enhance, "Pass raw frames through");
  cmd->add_option("--resolution", args->resolution, "Output resolution WxH")
      ->capture_default_str()
      ->check(resolution_validator());
  cmd->add_option("--out-dir", args->out_dir, "Write styled frames (PPM) and a manifest here");
  cmd->add_option("--digest-out", args->digest_out, "Write per-frame styled digests");
  cmd->add_option("--broker", args->broker, "Publish to an external broker at HOST:PORT")
      ->envname("DRIVE_BROKER_ADDR");
  cmd->add_flag("--publish", args->publish, "Publish through an embedded broker");
  cmd->add_option("--broker-port", args->broker_port, "Embedded broker TCP port")
      ->capture_default_str()
      ->check(CLI::Range(0, 65535));
  cmd->add_option("--console-port", args->console_port, "Console web-socket port (-1: off)")
      ->capture_default_str()
      ->check(CLI::Range(-1, 65535));
  cmd->add_flag("--lockstep", args->lockstep, "Emit every frame, unpaced (deterministic runs)");
  cmd->callback([args] { exit_status() = guarded([&] { return replay_command(*args); }); });
}

}  // namespace drive::cli
