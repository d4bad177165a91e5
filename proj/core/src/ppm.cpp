#include "drive/ppm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include "drive/error.hpp"

namespace drive {

std::string encode_pnm(const Frame& frame) {
  if (!frame.valid()) throw InvalidArgument("cannot encode malformed frame");
  std::string out = (frame.format == PixelFormat::kRgb8 ? "P6\n" : "P5\n") +
                    std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
  return out;
}

void save_pnm(const Frame& frame, const std::filesystem::path& path) {
  const std::string bytes = encode_pnm(frame);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("short write to " + path.string());
}

namespace {

// Reads one header token, skipping whitespace and '#' comments.
std::string next_token(const std::string& s, std::size_t& pos) {
  for (;;) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return s.substr(start, pos - start);
}

std::uint32_t parse_dim(const std::string& tok, const char* what) {
  if (tok.empty() || tok.size() > 9 ||
      tok.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError(std::string("bad PNM ") + what + " '" + tok + "'", 0);
  }
  return static_cast<std::uint32_t>(std::stoul(tok));
}

}  // namespace

Frame decode_pnm(const std::string& bytes, std::uint64_t id, std::uint64_t ts_ns,
                 std::string source_id) {
  std::size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  PixelFormat format;
  if (magic == "P6") {
    format = PixelFormat::kRgb8;
  } else if (magic == "P5") {
    format = PixelFormat::kGray8;
  } else {
    throw ParseError("unsupported PNM magic '" + magic + "'", 0);
  }
  const std::uint32_t w = parse_dim(next_token(bytes, pos), "width");
  const std::uint32_t h = parse_dim(next_token(bytes, pos), "height");
  const std::uint32_t maxval = parse_dim(next_token(bytes, pos), "maxval");
  if (maxval != 255) throw ParseError("PNM maxval must be 255", 0);
  if (pos >= bytes.size()) throw ParseError("PNM truncated after header", 0);
  ++pos;  // single whitespace byte before the raster
  const std::size_t need = static_cast<std::size_t>(w) * h * channel_count(format);
  if (bytes.size() - pos != need) {
    throw ParseError("PNM raster has " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                         std::to_string(need),
                     0);
  }
  std::vector<std::uint8_t> px(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return Frame::make(id, ts_ns, w, h, format, std::move(px), std::move(source_id));
}

Frame load_pnm(const std::filesystem::path& path, std::uint64_t id, std::uint64_t ts_ns,
               std::string source_id) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_pnm(bytes, id, ts_ns, std::move(source_id));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

}  // namespace drive
