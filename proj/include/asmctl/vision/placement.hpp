#pragma once

#include <variant>

#include "asmctl/common.hpp"
#include "asmctl/vision/template_match.hpp"

namespace asmctl::vision {

struct Correct {
  Detection detection;
};

struct Misplaced {
  Detection detection;
  double offset_px = 0.0;
};

struct NotFound {
  double best_score = 0.0;
};

using PlacementVerdict = std::variant<Correct, Misplaced, NotFound>;

inline constexpr double kDefaultMinScore = 0.8;
inline constexpr double kDefaultTolerancePx = 20.0;

// NotFound below min_score; otherwise Correct when the detection center is
// within tol_px (Euclidean) of the region center, else Misplaced.
// Throws std::invalid_argument for tol_px < 0 or min_score outside [-1, 1].
PlacementVerdict verify_placement(const Detection& detection,
                                  const Region& expected_region, double tol_px,
                                  double min_score);

}  // namespace asmctl::vision
