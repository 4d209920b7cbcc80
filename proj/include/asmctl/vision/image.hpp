#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace asmctl::vision {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row-major luminance image with values in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  double at(int x, int y) const { return pixels_[index(x, y)]; }
  void set(int x, int y, double v) { pixels_[index(x, y)] = v; }

  std::span<const double> row(int y) const {
    return {pixels_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<const double> pixels() const { return pixels_; }
  std::span<double> mutable_pixels() { return pixels_; }

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

// A named pattern to search for. Construction rejects 1-pixel-wide patterns
// and patterns with no luminance variation, since normalized correlation is
// undefined for them.
class Template {
 public:
  Template(std::string template_id, GrayImage image);

  const std::string& id() const { return id_; }
  const GrayImage& image() const { return image_; }
  int width() const { return image_.width(); }
  int height() const { return image_.height(); }

 private:
  std::string id_;
  GrayImage image_;
};

// Per-pixel variance below this counts as flat.
inline constexpr double kFlatVariancePerPixel = 1e-12;

}  // namespace asmctl::vision
