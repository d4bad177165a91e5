#include <cstdio>
#include <filesystem>
#include <memory>

#include "common.hpp"
#include "drive/error.hpp"
#include "drive/manifest.hpp"

namespace drive::cli {

namespace {

struct SampleArgs {
  std::string manifest;
  std::size_t k = 0;
  std::string out;
};

int sample_command(const SampleArgs& a) {
  namespace fs = std::filesystem;
  const FrameManifest manifest = load_manifest(a.manifest);
  FrameManifest picked = sample_uniform(manifest, a.k);
  fs::create_directories(a.out);
  FrameManifest written;
  written.base_dir = a.out;
  for (const ManifestEntry& e : picked.entries) {
    const fs::path src = manifest.resolve(e);
    const fs::path dst = fs::path(a.out) / src.filename();
    if (!fs::exists(src)) throw IoError("missing frame " + src.string());
    fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
    written.entries.push_back({dst.filename().string(), e.ts_ns});
  }
  save_manifest(written, fs::path(a.out) / "manifest.tsv");
  std::printf("sampled %zu of %zu frames into %s\n", written.size(), manifest.size(), a.out.c_str());
  return kExitOk;
}

}  // namespace

void add_sample(CLI::App& app) {
  auto args = std::make_shared<SampleArgs>();
  CLI::App* cmd = app.add_subcommand("sample", "Copy k uniformly spaced frames out of a manifest");
  cmd->add_option("--manifest", args->manifest, "Source manifest")->required();
  cmd->add_option("-k", args->k, "Number of frames")->required();
  cmd->add_option("--out", args->out, "Destination directory")->required();
  cmd->callback([args] {
    exit_status() = guarded([&]() -> int {
      try {
        return sample_command(*args);
      } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "drive: %s\n", e.what());
        return kExitBadInput;
      }
    });
  });
}

}  // namespace drive::cli
