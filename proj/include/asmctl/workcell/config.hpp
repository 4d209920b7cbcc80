#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "asmctl/procedure/procedure.hpp"
#include "asmctl/vision/template_library.hpp"
#include "asmctl/vision/undistort.hpp"

namespace asmctl::workcell {

struct CameraConfig {
  std::string camera_id;
  double resolution_mp = 2.0;
  double fov_deg = 90.0;
  vision::CameraModel model;
  int frame_width = 640;
  int frame_height = 480;

  bool operator==(const CameraConfig&) const = default;
};

inline constexpr double kMinFovDeg = 90.0;

// Workplace equipment and defaults. On disk:
//
//   workcell N1
//   tool yes
//   light yes
//   retry_cap 3
//   min_score 0.8
//   tolerance 20
//   templates templates/manifest.txt
//   logbook http://127.0.0.1:8700
//   tool_endpoint 127.0.0.1:8701
//   sim_noise 0.02
//   camera cam0
//     resolution_mp = 8
//     fov_deg = 100
//     focal_px = 300
//     cx = 159.5
//     cy = 119.5
//     k1 = 0
//     frame = 320x240
//
// Relative paths resolve against the config file's directory.
struct WorkcellConfig {
  std::string workcell_id;
  std::vector<CameraConfig> cameras;
  bool has_tool = false;
  bool has_light = false;
  int retry_cap = 3;
  double min_score = 0.8;
  double tol_px = 20.0;
  std::string logbook_url;
  std::string tool_endpoint;
  std::string templates_manifest;
  double sim_noise_sigma = 0.02;

  const CameraConfig* find_camera(std::string_view camera_id) const;
  bool operator==(const WorkcellConfig&) const = default;
};

// Config file content that parses but breaks a field rule.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws SyntaxError for malformed lines or values and ConfigError for
// missing `workcell`, duplicate cameras or out-of-range fields.
WorkcellConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir = {});
WorkcellConfig load_config(const std::string& path);

struct ConfigViolation {
  std::string code;
  std::string step_id;  // empty for cell-level problems
  std::string message;

  bool operator==(const ConfigViolation&) const = default;
};

// Equipment/step compatibility. Codes:
//   tighten_without_tool   Tighten step, has_tool false
//   vision_without_camera  Install/Inspect step, no camera configured
//   narrow_camera          vision steps present, a camera below 90 degrees
//   unknown_camera         step binds a camera id the cell lacks
//   unknown_template       template id missing from the library
//   region_outside_frame   expected region does not fit the bound frame
//   template_exceeds_frame template not smaller than the bound frame
// Template checks run only when a library is given.
std::vector<ConfigViolation> validate_config(const WorkcellConfig& config,
                                             const procedure::ProcedureScript& script,
                                             const vision::TemplateLibrary* templates = nullptr);

// The camera a vision step runs on: its explicit binding, else the first
// configured camera. Null when neither exists.
const CameraConfig* camera_for(const WorkcellConfig& config, const procedure::Step& step);

}  // namespace asmctl::workcell
