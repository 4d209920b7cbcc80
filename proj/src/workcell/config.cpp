#include "asmctl/workcell/config.hpp"

#include <cmath>
#include <set>

#include "asmctl/text_format.hpp"

namespace asmctl::workcell {
namespace {

using procedure::InspectParams;
using procedure::InstallParams;
using procedure::Step;
using procedure::StepKind;

const std::string& single_arg(const text::Directive& d) {
  if (d.args.size() != 1) {
    throw SyntaxError(d.line, "'" + d.keyword + "' takes exactly one argument");
  }
  return d.args[0];
}

void require_no_properties(const text::Directive& d) {
  if (!d.properties.empty()) {
    throw SyntaxError(d.properties.front().line,
                      "'" + d.keyword + "' does not take indented properties");
  }
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

void parse_frame(const text::Property& p, CameraConfig& cam) {
  const auto x = p.value.find('x');
  if (x == std::string::npos) throw SyntaxError(p.line, "frame must be WIDTHxHEIGHT");
  cam.frame_width = static_cast<int>(text::to_int(p.value.substr(0, x), p.line));
  cam.frame_height = static_cast<int>(text::to_int(p.value.substr(x + 1), p.line));
}

CameraConfig parse_camera(const text::Directive& d) {
  CameraConfig cam;
  cam.camera_id = single_arg(d);
  bool have_cx = false, have_cy = false, have_focal = false;
  std::set<std::string> seen;
  for (const auto& p : d.properties) {
    if (!seen.insert(p.key).second) throw SyntaxError(p.line, "duplicate key '" + p.key + "'");
    if (p.key == "resolution_mp") {
      cam.resolution_mp = text::to_double(p.value, p.line);
    } else if (p.key == "fov_deg") {
      cam.fov_deg = text::to_double(p.value, p.line);
    } else if (p.key == "focal_px") {
      cam.model.focal_px = text::to_double(p.value, p.line);
      have_focal = true;
    } else if (p.key == "cx") {
      cam.model.cx = text::to_double(p.value, p.line);
      have_cx = true;
    } else if (p.key == "cy") {
      cam.model.cy = text::to_double(p.value, p.line);
      have_cy = true;
    } else if (p.key == "k1") {
      cam.model.k1 = text::to_double(p.value, p.line);
    } else if (p.key == "frame") {
      parse_frame(p, cam);
    } else {
      throw SyntaxError(p.line, "unknown camera key '" + p.key + "'");
    }
  }
  if (!(cam.resolution_mp > 0) || !std::isfinite(cam.resolution_mp)) {
    throw ConfigError("camera " + cam.camera_id + ": resolution_mp must be positive");
  }
  if (!(cam.fov_deg > 0) || !(cam.fov_deg < 180)) {
    throw ConfigError("camera " + cam.camera_id + ": fov_deg must be in (0, 180)");
  }
  if (cam.frame_width < 2 || cam.frame_height < 2) {
    throw ConfigError("camera " + cam.camera_id + ": frame must be at least 2x2");
  }
  if (!have_cx) cam.model.cx = (cam.frame_width - 1) / 2.0;
  if (!have_cy) cam.model.cy = (cam.frame_height - 1) / 2.0;
  if (!have_focal) {
    // Pinhole focal length that spans the horizontal field of view.
    const double half = cam.fov_deg * M_PI / 360.0;
    cam.model.focal_px = (cam.frame_width / 2.0) / std::tan(half);
  }
  if (!(cam.model.focal_px > 0) || !std::isfinite(cam.model.focal_px)) {
    throw ConfigError("camera " + cam.camera_id + ": focal_px must be positive");
  }
  if (!std::isfinite(cam.model.k1) || !std::isfinite(cam.model.cx) ||
      !std::isfinite(cam.model.cy)) {
    throw ConfigError("camera " + cam.camera_id + ": non-finite lens parameter");
  }
  return cam;
}

struct VisionBinding {
  const std::string* template_id;
  const Region* region;
  const std::optional<std::string>* camera_id;
};

std::optional<VisionBinding> vision_binding(const Step& step) {
  if (const auto* p = std::get_if<InstallParams>(&step.params)) {
    return VisionBinding{&p->template_id, &p->expected_region, &p->camera_id};
  }
  if (const auto* p = std::get_if<InspectParams>(&step.params)) {
    return VisionBinding{&p->template_id, &p->expected_region, &p->camera_id};
  }
  return std::nullopt;
}

}  // namespace

const CameraConfig* WorkcellConfig::find_camera(std::string_view camera_id) const {
  for (const auto& c : cameras) {
    if (c.camera_id == camera_id) return &c;
  }
  return nullptr;
}

WorkcellConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  WorkcellConfig cfg;
  std::set<std::string> seen;
  bool have_id = false;
  for (const auto& d : text::parse_blocks(text)) {
    if (d.keyword != "camera") {
      if (!seen.insert(d.keyword).second) {
        throw SyntaxError(d.line, "duplicate '" + d.keyword + "' line");
      }
      require_no_properties(d);
    }
    if (d.keyword == "workcell") {
      cfg.workcell_id = single_arg(d);
      have_id = true;
    } else if (d.keyword == "tool") {
      cfg.has_tool = text::to_bool(single_arg(d), d.line);
    } else if (d.keyword == "light") {
      cfg.has_light = text::to_bool(single_arg(d), d.line);
    } else if (d.keyword == "retry_cap") {
      const long long v = text::to_int(single_arg(d), d.line);
      if (v < 0 || v > 100) throw ConfigError("retry_cap must be within [0, 100]");
      cfg.retry_cap = static_cast<int>(v);
    } else if (d.keyword == "min_score") {
      cfg.min_score = text::to_double(single_arg(d), d.line);
      if (!(cfg.min_score >= -1.0 && cfg.min_score <= 1.0)) {
        throw ConfigError("min_score must be within [-1, 1]");
      }
    } else if (d.keyword == "tolerance") {
      cfg.tol_px = text::to_double(single_arg(d), d.line);
      if (!(cfg.tol_px >= 0) || !std::isfinite(cfg.tol_px)) {
        throw ConfigError("tolerance must be a finite value >= 0");
      }
    } else if (d.keyword == "templates") {
      cfg.templates_manifest = resolve(base_dir, single_arg(d));
    } else if (d.keyword == "logbook") {
      cfg.logbook_url = single_arg(d);
    } else if (d.keyword == "tool_endpoint") {
      cfg.tool_endpoint = single_arg(d);
    } else if (d.keyword == "sim_noise") {
      cfg.sim_noise_sigma = text::to_double(single_arg(d), d.line);
      if (!(cfg.sim_noise_sigma >= 0) || !std::isfinite(cfg.sim_noise_sigma)) {
        throw ConfigError("sim_noise must be a finite value >= 0");
      }
    } else if (d.keyword == "camera") {
      CameraConfig cam = parse_camera(d);
      if (cfg.find_camera(cam.camera_id)) {
        throw ConfigError("duplicate camera id " + cam.camera_id);
      }
      cfg.cameras.push_back(std::move(cam));
    } else {
      throw SyntaxError(d.line, "unknown config line '" + d.keyword + "'");
    }
  }
  if (!have_id) throw ConfigError("config has no 'workcell' line");
  return cfg;
}

WorkcellConfig load_config(const std::string& path) {
  return parse_config(text::read_file(path), std::filesystem::path(path).parent_path());
}

const CameraConfig* camera_for(const WorkcellConfig& config, const Step& step) {
  const auto binding = vision_binding(step);
  if (binding && *binding->camera_id) return config.find_camera(**binding->camera_id);
  return config.cameras.empty() ? nullptr : &config.cameras.front();
}

std::vector<ConfigViolation> validate_config(const WorkcellConfig& config,
                                             const procedure::ProcedureScript& script,
                                             const vision::TemplateLibrary* templates) {
  std::vector<ConfigViolation> out;
  bool has_vision = false;
  for (const auto& step : script.steps) {
    if (step.kind() == StepKind::Tighten && !config.has_tool) {
      out.push_back({"tighten_without_tool", step.step_id,
                     "tighten step needs a workcell with a tool"});
    }
    const auto binding = vision_binding(step);
    if (!binding) continue;
    has_vision = true;
    if (config.cameras.empty()) {
      out.push_back({"vision_without_camera", step.step_id,
                     "vision step needs a workcell with a camera"});
      continue;
    }
    const CameraConfig* cam = camera_for(config, step);
    if (!cam) {
      out.push_back({"unknown_camera", step.step_id,
                     "camera " + **binding->camera_id + " is not configured"});
      continue;
    }
    const Region& r = *binding->region;
    if (r.x + r.w > cam->frame_width || r.y + r.h > cam->frame_height) {
      out.push_back({"region_outside_frame", step.step_id,
                     "expected region " + text::format_region(r) + " exceeds the " +
                         std::to_string(cam->frame_width) + "x" +
                         std::to_string(cam->frame_height) + " frame of " + cam->camera_id});
    }
    if (templates) {
      const vision::Template* tpl = templates->find(*binding->template_id);
      if (!tpl) {
        out.push_back({"unknown_template", step.step_id,
                       "template " + *binding->template_id + " is not in the library"});
      } else if (tpl->width() >= cam->frame_width || tpl->height() >= cam->frame_height) {
        out.push_back({"template_exceeds_frame", step.step_id,
                       "template " + tpl->id() + " does not fit inside the frame of " +
                           cam->camera_id});
      }
    }
  }
  if (has_vision) {
    for (const auto& cam : config.cameras) {
      if (cam.fov_deg < kMinFovDeg) {
        out.push_back({"narrow_camera", "",
                       "camera " + cam.camera_id + " has a field of view below 90 degrees"});
      }
    }
  }
  return out;
}

}  // namespace asmctl::workcell
