#pragma once

#include <stdexcept>

namespace asmctl::vision {

// Single-coefficient radial lens model. Distances are normalized by the
// focal length and measured from the principal point:
//   x_d = x_u * (1 + k1 * r_u^2)
struct CameraModel {
  double focal_px = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
};

struct PointPx {
  double x = 0.0;
  double y = 0.0;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kUndistortMaxIterations = 100;
// Pixel-space residual of the forward map at the returned point.
inline constexpr double kUndistortResidualPx = 1e-9;

PointPx distort_point(PointPx undistorted, const CameraModel& camera);

// Inverts distort_point by fixed-point iteration. Returns the input
// unchanged when k1 == 0. Throws NoConvergence when the iteration does not
// settle (k1 too strong for that radius) and std::invalid_argument for
// non-finite input or focal_px <= 0.
PointPx undistort_point(PointPx distorted, const CameraModel& camera);

}  // namespace asmctl::vision
