#include "asmctl/workcell/scene_source.hpp"

#include <algorithm>
#include <cmath>

#include "asmctl/vision/pgm.hpp"
#include "asmctl/vision/render.hpp"

namespace asmctl::workcell {

std::uint64_t mix_seed(std::uint64_t seed, std::string_view label, std::uint64_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  h ^= n + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  // splitmix64 finalizer
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

vision::GrayImage SimScene::acquire(const FrameRequest& request) {
  if (!request.camera) throw CameraUnavailable("no camera bound to step " + request.step_id);
  if (!request.pattern) throw CameraUnavailable("no pattern for step " + request.step_id);
  const CameraConfig& cam = *request.camera;
  const vision::Template& tpl = *request.pattern;

  Perturbation p;
  if (auto it = perturbations_.find(request.step_id); it != perturbations_.end()) {
    if (it->second.attempts == 0 || request.attempt <= it->second.attempts) p = it->second;
  }

  std::vector<vision::ScenePlacement> placements;
  if (!p.absent) {
    const vision::PointPx ideal{request.expected_region.center_x() + p.dx,
                                request.expected_region.center_y() + p.dy};
    const vision::PointPx seen = vision::distort_point(ideal, cam.model);
    const int max_x = cam.frame_width - tpl.width();
    const int max_y = cam.frame_height - tpl.height();
    if (max_x < 0 || max_y < 0) {
      throw CameraUnavailable("template " + tpl.id() + " does not fit the frame of " +
                              cam.camera_id);
    }
    const double fx = std::round(seen.x - (tpl.width() - 1) / 2.0);
    const double fy = std::round(seen.y - (tpl.height() - 1) / 2.0);
    const int x = static_cast<int>(std::clamp(std::isfinite(fx) ? fx : 0.0, 0.0, double(max_x)));
    const int y = static_cast<int>(std::clamp(std::isfinite(fy) ? fy : 0.0, 0.0, double(max_y)));
    placements.push_back({&tpl, x, y});
  }
  const std::uint64_t frame_seed =
      mix_seed(seed_, cam.camera_id + "/" + request.step_id, static_cast<std::uint64_t>(request.attempt));
  return vision::render_scene(placements, cam.frame_width, cam.frame_height, noise_, frame_seed);
}

vision::GrayImage DirectoryScene::acquire(const FrameRequest& request) {
  const std::string camera_id = request.camera ? request.camera->camera_id : "";
  const std::filesystem::path candidates[] = {
      dir_ / (request.step_id + "_" + std::to_string(request.attempt) + ".pgm"),
      dir_ / (request.step_id + ".pgm"),
      dir_ / (camera_id + ".pgm"),
  };
  for (const auto& path : candidates) {
    if (!std::filesystem::is_regular_file(path)) continue;
    try {
      return vision::read_pgm(path.string());
    } catch (const std::exception& e) {
      throw CameraUnavailable("unreadable frame " + path.string() + ": " + e.what());
    }
  }
  throw CameraUnavailable("no frame for step " + request.step_id + " in " + dir_.string());
}

void FrameInbox::submit(const std::string& camera_id, vision::GrayImage frame) {
  {
    std::lock_guard lock(mu_);
    pending_[camera_id] = std::move(frame);
  }
  cv_.notify_all();
}

vision::GrayImage FrameInbox::acquire(const FrameRequest& request) {
  const std::string camera_id = request.camera ? request.camera->camera_id : "";
  std::unique_lock lock(mu_);
  const bool ready = cv_.wait_for(lock, wait_, [&] {
    return closed_ || pending_.count(camera_id) > 0;
  });
  if (!ready || closed_) {
    throw CameraUnavailable("no frame submitted for camera " + camera_id);
  }
  auto node = pending_.extract(camera_id);
  return std::move(node.mapped());
}

void FrameInbox::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

}  // namespace asmctl::workcell
