#include "asmctl/vision/image.hpp"

#include <cmath>

namespace asmctl::vision {

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw ImageError("image dimensions must be positive");
  if (!(fill >= 0.0 && fill <= 1.0)) throw ImageError("pixel value outside [0, 1]");
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) throw ImageError("image dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw ImageError("pixel count does not match dimensions");
  }
  for (double v : pixels_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ImageError("pixel value outside [0, 1]");
  }
}

Template::Template(std::string template_id, GrayImage image)
    : id_(std::move(template_id)), image_(std::move(image)) {
  if (image_.width() < 2 || image_.height() < 2) {
    throw ImageError("template '" + id_ + "' must be at least 2x2");
  }
  const auto px = image_.pixels();
  double mean = 0.0;
  for (double v : px) mean += v;
  mean /= static_cast<double>(px.size());
  double ss = 0.0;
  for (double v : px) ss += (v - mean) * (v - mean);
  if (ss <= kFlatVariancePerPixel * static_cast<double>(px.size())) {
    throw ImageError("template '" + id_ + "' has no luminance variation");
  }
}

}  // namespace asmctl::vision
