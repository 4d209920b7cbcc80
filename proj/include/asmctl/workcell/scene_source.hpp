#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "asmctl/common.hpp"
#include "asmctl/vision/image.hpp"
#include "asmctl/workcell/config.hpp"

namespace asmctl::workcell {

// No frame could be produced for the requested camera.
class CameraUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FrameRequest {
  const CameraConfig* camera = nullptr;
  const vision::Template* pattern = nullptr;
  Region expected_region;  // undistorted pixel coordinates
  std::string step_id;
  int attempt = 1;
};

class SceneSource {
 public:
  virtual ~SceneSource() = default;
  // Raw (distorted) camera frame. Throws CameraUnavailable.
  virtual vision::GrayImage acquire(const FrameRequest& request) = 0;
};

// Deterministic synthetic workbench: the requested element sits at its
// expected region, mapped through the camera's lens model, plus noise.
// Perturbations move or remove the element for chosen steps.
class SimScene : public SceneSource {
 public:
  struct Perturbation {
    double dx = 0.0;
    double dy = 0.0;
    bool absent = false;
    int attempts = 0;  // applies to attempts 1..n; 0 means every attempt
  };

  SimScene(std::uint64_t seed, double noise_sigma) : seed_(seed), noise_(noise_sigma) {}

  void perturb(const std::string& step_id, Perturbation p) { perturbations_[step_id] = p; }

  vision::GrayImage acquire(const FrameRequest& request) override;

 private:
  std::uint64_t seed_;
  double noise_;
  std::map<std::string, Perturbation> perturbations_;
};

// Frames from files: <dir>/<step_id>_<attempt>.pgm, then <dir>/<step_id>.pgm,
// then <dir>/<camera_id>.pgm.
class DirectoryScene : public SceneSource {
 public:
  explicit DirectoryScene(std::filesystem::path dir) : dir_(std::move(dir)) {}
  vision::GrayImage acquire(const FrameRequest& request) override;

 private:
  std::filesystem::path dir_;
};

// Frames submitted through the operator API. acquire() takes the newest
// frame submitted for the camera, waiting up to the timeout for one.
class FrameInbox : public SceneSource {
 public:
  explicit FrameInbox(std::chrono::milliseconds wait = std::chrono::seconds(30)) : wait_(wait) {}

  void submit(const std::string& camera_id, vision::GrayImage frame);
  vision::GrayImage acquire(const FrameRequest& request) override;
  // Wakes any waiting acquire(), which then throws CameraUnavailable.
  void close();

 private:
  std::chrono::milliseconds wait_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, vision::GrayImage> pending_;
  bool closed_ = false;
};

// Stable 64-bit mix of a seed with a string and an integer, for per-frame
// noise seeds that do not depend on the standard library's hash.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view label, std::uint64_t n);

}  // namespace asmctl::workcell
