#include "asmctl/vision/render.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace asmctl::vision {

GrayImage render_scene(std::span<const ScenePlacement> placements, int width,
                       int height, double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  GrayImage canvas(width, height, kSceneBackground);
  for (const auto& p : placements) {
    if (p.pattern == nullptr) throw std::invalid_argument("placement without a pattern");
    const GrayImage& img = p.pattern->image();
    if (p.x < 0 || p.y < 0 || p.x + img.width() > width ||
        p.y + img.height() > height) {
      throw OutOfCanvas("pattern '" + p.pattern->id() + "' at (" +
                        std::to_string(p.x) + "," + std::to_string(p.y) +
                        ") does not fit the canvas");
    }
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        canvas.set(p.x + x, p.y + y, img.at(x, y));
      }
    }
  }
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (double& v : canvas.mutable_pixels()) {
      v = std::clamp(v + noise(rng), 0.0, 1.0);
    }
  }
  return canvas;
}

}  // namespace asmctl::vision
