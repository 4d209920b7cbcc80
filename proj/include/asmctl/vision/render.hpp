#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

#include "asmctl/vision/image.hpp"

namespace asmctl::vision {

class OutOfCanvas : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One pattern composited onto the canvas with its top-left corner at (x, y).
// Patterns are placed axis-aligned; there is no rotation.
struct ScenePlacement {
  const Template* pattern = nullptr;
  int x = 0;
  int y = 0;
};

inline constexpr double kSceneBackground = 0.5;

// Synthetic workbench frame: uniform background, patterns pasted in order,
// then additive Gaussian noise clipped to [0, 1]. Deterministic per seed.
GrayImage render_scene(std::span<const ScenePlacement> placements, int width,
                       int height, double noise_sigma, std::uint64_t seed);

}  // namespace asmctl::vision
