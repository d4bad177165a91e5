#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "drive/frame.hpp"

namespace drive {

// Binary PNM I/O: RGB8 frames as P6, GRAY8 frames as P5, maxval 255.
void save_pnm(const Frame& frame, const std::filesystem::path& path);
std::string encode_pnm(const Frame& frame);

Frame load_pnm(const std::filesystem::path& path, std::uint64_t id = 0, std::uint64_t ts_ns = 0,
               std::string source_id = {});
Frame decode_pnm(const std::string& bytes, std::uint64_t id = 0, std::uint64_t ts_ns = 0,
                 std::string source_id = {});

}  // namespace drive
