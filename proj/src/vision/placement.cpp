#include "asmctl/vision/placement.hpp"

#include <cmath>
#include <stdexcept>

namespace asmctl::vision {

PlacementVerdict verify_placement(const Detection& detection,
                                  const Region& expected_region, double tol_px,
                                  double min_score) {
  if (!(tol_px >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  if (!(min_score >= -1.0 && min_score <= 1.0)) {
    throw std::invalid_argument("min_score must lie in [-1, 1]");
  }
  if (detection.score < min_score) return NotFound{detection.score};
  const double dx = detection.center_x - expected_region.center_x();
  const double dy = detection.center_y - expected_region.center_y();
  const double offset = std::hypot(dx, dy);
  if (offset <= tol_px) return Correct{detection};
  return Misplaced{detection, offset};
}

}  // namespace asmctl::vision
