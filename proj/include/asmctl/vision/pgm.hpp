#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asmctl/vision/image.hpp"

namespace asmctl::vision {

// Binary 8-bit PGM (P5). Samples map linearly onto [0, 1] by maxval.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage read_pgm(const std::string& path);

// Writes maxval 255; values are rounded to the nearest level.
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
void write_pgm(const std::string& path, const GrayImage& image);

// 8-bit grayscale PNG, for browser display of camera frames.
std::vector<std::uint8_t> encode_png(const GrayImage& image);

}  // namespace asmctl::vision
