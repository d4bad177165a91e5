#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "drive/frame.hpp"
#include "drive/geometry.hpp"

namespace drive::test {

// Seeded generator for hand-rolled property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen_);
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  bool chance(double p) { return real(0.0, 1.0) < p; }
  std::uint8_t byte() { return static_cast<std::uint8_t>(integer(0, 255)); }
  std::uint64_t u64() { return gen_(); }
  std::vector<std::uint8_t> bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = byte();
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

Frame random_frame(Rng& rng, std::uint32_t w, std::uint32_t h, PixelFormat fmt = PixelFormat::kRgb8);
// Random blocks of flat color: gives edges with realistic structure.
Frame random_blocks(Rng& rng, std::uint32_t w, std::uint32_t h, int blocks);
Frame solid_frame(std::uint32_t w, std::uint32_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b);
// Columns < x0 get `lo`, the rest `hi` (gray values replicated to RGB).
Frame vertical_step(std::uint32_t w, std::uint32_t h, std::uint32_t x0, std::uint8_t lo = 0,
                    std::uint8_t hi = 255);
Frame mirror_horizontal(const Frame& f);
Frame transpose(const Frame& f);

Polyline random_polyline(Rng& rng, std::size_t min_points, std::size_t max_points, double lo, double hi);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path source_dir();  // repository root
std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);

}  // namespace drive::test
