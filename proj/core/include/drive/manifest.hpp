#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace drive {

struct ManifestEntry {
  std::string path;  // relative to FrameManifest::base_dir
  std::uint64_t ts_ns = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// Backing store of a replay source: one `path<TAB>ts_ns` line per frame.
struct FrameManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& e) const { return base_dir / e.path; }
  std::size_t size() const noexcept { return entries.size(); }
};

// Blank lines are ignored. Entries come back sorted by timestamp (stable).
FrameManifest load_manifest(const std::filesystem::path& path);
FrameManifest parse_manifest(const std::string& text, std::filesystem::path base_dir);
void save_manifest(const FrameManifest& manifest, const std::filesystem::path& path);

// Indices floor(i*N/k) for i in [0,k).
std::vector<std::size_t> uniform_indices(std::size_t n, std::size_t k);
FrameManifest sample_uniform(const FrameManifest& manifest, std::size_t k);

}  // namespace drive
