#include "drive/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "drive/error.hpp"

namespace drive {

FrameManifest parse_manifest(const std::string& text, std::filesystem::path base_dir) {
  FrameManifest m;
  m.base_dir = std::move(base_dir);
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError("missing TAB separator", line_no);
    const std::string_view path = line.substr(0, tab);
    const std::string_view ts = line.substr(tab + 1);
    if (path.empty()) throw ParseError("empty path", line_no);

    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), value);
    if (ts.empty() || ec != std::errc() || end != ts.data() + ts.size()) {
      throw ParseError("non-numeric timestamp '" + std::string(ts) + "'", line_no);
    }
    if (!seen.emplace(path).second) {
      throw ParseError("duplicate path '" + std::string(path) + "'", line_no);
    }
    m.entries.push_back(ManifestEntry{std::string(path), value});
  }
  std::stable_sort(m.entries.begin(), m.entries.end(),
                   [](const ManifestEntry& a, const ManifestEntry& b) { return a.ts_ns < b.ts_ns; });
  return m;
}

FrameManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open manifest " + path.string());
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return parse_manifest(text, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void save_manifest(const FrameManifest& manifest, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& e : manifest.entries) os << e.path << '\t' << e.ts_ns << '\n';
  if (!os) throw IoError("short write to " + path.string());
}

std::vector<std::size_t> uniform_indices(std::size_t n, std::size_t k) {
  if (k > n) {
    throw InvalidArgument("cannot sample " + std::to_string(k) + " of " + std::to_string(n) +
                          " entries");
  }
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) {
    // i*n fits comfortably: manifests are far below 2^32 entries
    idx[i] = i * n / k;
  }
  return idx;
}

FrameManifest sample_uniform(const FrameManifest& manifest, std::size_t k) {
  FrameManifest out;
  out.base_dir = manifest.base_dir;
  for (std::size_t i : uniform_indices(manifest.entries.size(), k)) {
    out.entries.push_back(manifest.entries[i]);
  }
  return out;
}

}  // namespace drive
