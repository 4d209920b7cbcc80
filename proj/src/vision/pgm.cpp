#include "asmctl/vision/pgm.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "asmctl/common.hpp"

namespace asmctl::vision {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number() {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000) throw ImageError("PGM header value too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw ImageError("malformed PGM header");
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw ImageError("not a binary PGM (P5) image");
  }
  HeaderReader r(bytes.subspan(2));
  const long width = r.number();
  const long height = r.number();
  const long maxval = r.number();
  if (width <= 0 || height <= 0) throw ImageError("PGM dimensions must be positive");
  if (maxval <= 0 || maxval > 255) throw ImageError("only 8-bit PGM is supported");
  // Exactly one whitespace byte separates the header from the raster.
  const std::size_t raster = 2 + r.pos() + 1;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() < raster || bytes.size() - raster < count) {
    throw ImageError("PGM raster is truncated");
  }
  std::vector<double> px(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = bytes[raster + i];
    if (v > maxval) throw ImageError("PGM sample exceeds maxval");
    px[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(px));
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.pixels().size());
  for (double v : image.pixels()) {
    out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  }
  return out;
}

void write_pgm(const std::string& path, const GrayImage& image) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

}  // namespace asmctl::vision
