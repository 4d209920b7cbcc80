#include "asmctl/vision/undistort.hpp"

#include <cmath>
#include <string>

namespace asmctl::vision {

namespace {

void check_camera(const CameraModel& camera) {
  if (!(camera.focal_px > 0.0) || !std::isfinite(camera.focal_px)) {
    throw std::invalid_argument("focal length must be positive");
  }
}

}  // namespace

PointPx distort_point(PointPx p, const CameraModel& camera) {
  check_camera(camera);
  const double xu = (p.x - camera.cx) / camera.focal_px;
  const double yu = (p.y - camera.cy) / camera.focal_px;
  const double gain = 1.0 + camera.k1 * (xu * xu + yu * yu);
  return {camera.cx + camera.focal_px * xu * gain,
          camera.cy + camera.focal_px * yu * gain};
}

PointPx undistort_point(PointPx p, const CameraModel& camera) {
  check_camera(camera);
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw std::invalid_argument("point coordinates must be finite");
  }
  if (camera.k1 == 0.0) return p;

  const double xd = (p.x - camera.cx) / camera.focal_px;
  const double yd = (p.y - camera.cy) / camera.focal_px;
  const double tol = kUndistortResidualPx / camera.focal_px;
  double xu = xd, yu = yd;
  for (int it = 0; it < kUndistortMaxIterations; ++it) {
    const double gain = 1.0 + camera.k1 * (xu * xu + yu * yu);
    const double rx = xu * gain - xd;
    const double ry = yu * gain - yd;
    if (std::hypot(rx, ry) < tol) {
      return {camera.cx + camera.focal_px * xu, camera.cy + camera.focal_px * yu};
    }
    if (!(gain > 0.0)) break;
    xu = xd / gain;
    yu = yd / gain;
  }
  throw NoConvergence("radial undistortion did not converge for k1=" +
                      std::to_string(camera.k1));
}

}  // namespace asmctl::vision
