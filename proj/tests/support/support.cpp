#include "support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace drive::test {

Frame random_frame(Rng& rng, std::uint32_t w, std::uint32_t h, PixelFormat fmt) {
  Frame f = Frame::blank(w, h, fmt);
  for (auto& b : f.pixels) b = rng.byte();
  f.id = static_cast<std::uint64_t>(rng.integer(1, 1 << 20));
  return f;
}

Frame random_blocks(Rng& rng, std::uint32_t w, std::uint32_t h, int blocks) {
  Frame f = solid_frame(w, h, rng.byte(), rng.byte(), rng.byte());
  for (int i = 0; i < blocks; ++i) {
    const auto x0 = static_cast<std::uint32_t>(rng.integer(0, w - 1));
    const auto y0 = static_cast<std::uint32_t>(rng.integer(0, h - 1));
    const auto x1 = static_cast<std::uint32_t>(rng.integer(x0, w - 1));
    const auto y1 = static_cast<std::uint32_t>(rng.integer(y0, h - 1));
    const std::uint8_t c[3] = {rng.byte(), rng.byte(), rng.byte()};
    for (std::uint32_t y = y0; y <= y1; ++y) {
      for (std::uint32_t x = x0; x <= x1; ++x) {
        std::uint8_t* p = f.at(x, y);
        p[0] = c[0];
        p[1] = c[1];
        p[2] = c[2];
      }
    }
  }
  return f;
}

Frame solid_frame(std::uint32_t w, std::uint32_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Frame f = Frame::blank(w, h);
  for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
    f.pixels[i] = r;
    f.pixels[i + 1] = g;
    f.pixels[i + 2] = b;
  }
  return f;
}

Frame vertical_step(std::uint32_t w, std::uint32_t h, std::uint32_t x0, std::uint8_t lo, std::uint8_t hi) {
  Frame f = Frame::blank(w, h);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      std::uint8_t* p = f.at(x, y);
      p[0] = p[1] = p[2] = x < x0 ? lo : hi;
    }
  }
  return f;
}

Frame mirror_horizontal(const Frame& f) {
  Frame out = f;
  const std::size_t c = f.channels();
  for (std::uint32_t y = 0; y < f.height; ++y) {
    for (std::uint32_t x = 0; x < f.width; ++x) {
      const std::uint8_t* src = f.at(f.width - 1 - x, y);
      std::copy(src, src + c, out.at(x, y));
    }
  }
  return out;
}

Frame transpose(const Frame& f) {
  Frame out = Frame::blank(f.height, f.width, f.format);
  out.id = f.id;
  const std::size_t c = f.channels();
  for (std::uint32_t y = 0; y < f.height; ++y) {
    for (std::uint32_t x = 0; x < f.width; ++x) {
      const std::uint8_t* src = f.at(x, y);
      std::copy(src, src + c, out.at(y, x));
    }
  }
  return out;
}

Polyline random_polyline(Rng& rng, std::size_t min_points, std::size_t max_points, double lo, double hi) {
  const auto n = static_cast<std::size_t>(
      rng.integer(static_cast<std::int64_t>(min_points), static_cast<std::int64_t>(max_points)));
  Polyline p;
  for (std::size_t i = 0; i < n; ++i) p.push_back({rng.real(lo, hi), rng.real(lo, hi)});
  return p;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "drive-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path source_dir() { return DRIVE_SOURCE_DIR; }

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace drive::test
