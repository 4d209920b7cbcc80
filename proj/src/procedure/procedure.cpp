#include "asmctl/procedure/procedure.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace asmctl::procedure {

namespace {

using text::Directive;
using text::Property;

struct KindName {
  StepKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {StepKind::InstallElement, "install"},
    {StepKind::Tighten, "tighten"},
    {StepKind::Inspect, "inspect"},
    {StepKind::OperatorConfirm, "confirm"},
};

// Collects the properties of one step block and reports leftovers.
class PropertyBag {
 public:
  PropertyBag(const Directive& d, std::string step_id)
      : directive_(d), step_id_(std::move(step_id)) {
    std::set<std::string> seen;
    for (const auto& p : d.properties) {
      if (!seen.insert(p.key).second) {
        throw SyntaxError(p.line, "duplicate key '" + p.key + "'");
      }
    }
  }

  const Property* find(std::string_view key) {
    for (const auto& p : directive_.properties) {
      if (p.key == key) {
        used_.insert(p.key);
        return &p;
      }
    }
    return nullptr;
  }

  const Property& require(std::string_view key) {
    const Property* p = find(key);
    if (p == nullptr) {
      throw ValidationError(step_id_, "missing key '" + std::string(key) + "'");
    }
    return *p;
  }

  std::optional<double> optional_double(std::string_view key) {
    const Property* p = find(key);
    if (p == nullptr) return std::nullopt;
    return text::to_double(p->value, p->line);
  }

  std::optional<std::string> optional_string(std::string_view key) {
    const Property* p = find(key);
    if (p == nullptr) return std::nullopt;
    return p->value;
  }

  void reject_unused() const {
    for (const auto& p : directive_.properties) {
      if (!used_.count(p.key)) {
        throw ValidationError(step_id_, "unknown key '" + p.key + "'");
      }
    }
  }

 private:
  const Directive& directive_;
  std::string step_id_;
  std::set<std::string> used_;
};

ToolMode parse_mode(const Property& p) {
  if (p.value == "torque_limit") return ToolMode::TorqueLimit;
  if (p.value == "actuation_cutoff") return ToolMode::ActuationCutoff;
  throw SyntaxError(p.line, "unknown tool mode '" + p.value + "'");
}

Step parse_step(const Directive& d) {
  if (d.args.size() != 2) {
    throw SyntaxError(d.line, "expected 'step <id> <kind>'");
  }
  const std::string& id = d.args[0];
  const std::string& kind_name = d.args[1];
  const KindName* kind = nullptr;
  for (const auto& k : kKindNames) {
    if (k.name == kind_name) kind = &k;
  }
  if (kind == nullptr) {
    throw SyntaxError(d.line, "unknown step kind '" + kind_name + "'");
  }

  PropertyBag bag(d, id);
  Step step;
  step.step_id = id;
  switch (kind->kind) {
    case StepKind::InstallElement: {
      InstallParams p;
      p.element_id = bag.require("element").value;
      p.template_id = bag.require("template").value;
      const auto& region = bag.require("region");
      p.expected_region = text::to_region(region.value, region.line);
      p.position_tolerance_px = bag.optional_double("tolerance");
      p.min_score = bag.optional_double("min_score");
      p.camera_id = bag.optional_string("camera");
      step.params = std::move(p);
      break;
    }
    case StepKind::Tighten: {
      TightenParams p;
      const auto& count = bag.require("fasteners");
      p.fastener_count = static_cast<int>(text::to_int(count.value, count.line));
      const auto& torque = bag.require("torque");
      p.target_torque_nm = text::to_double(torque.value, torque.line);
      if (const Property* mode = bag.find("mode")) p.mode = parse_mode(*mode);
      step.params = p;
      break;
    }
    case StepKind::Inspect: {
      InspectParams p;
      p.template_id = bag.require("template").value;
      const auto& region = bag.require("region");
      p.expected_region = text::to_region(region.value, region.line);
      p.min_score = bag.optional_double("min_score");
      p.position_tolerance_px = bag.optional_double("tolerance");
      p.camera_id = bag.optional_string("camera");
      step.params = std::move(p);
      break;
    }
    case StepKind::OperatorConfirm: {
      ConfirmParams p;
      p.prompt = bag.require("prompt").value;
      step.params = std::move(p);
      break;
    }
  }
  bag.reject_unused();
  return step;
}

// Identifiers are single whitespace-free tokens so they survive the
// line-oriented format.
bool is_token(std::string_view s) {
  if (s.empty() || s.front() == '#') return false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '=') return false;
  }
  return true;
}

void check_token(const std::string& step_id, std::string_view what,
                 std::string_view value) {
  if (!is_token(value)) {
    throw ValidationError(step_id, "invalid " + std::string(what) + " '" +
                                       std::string(value) + "'");
  }
}

void check_vision(const std::string& id, const Region& region,
                  const std::optional<double>& tol,
                  const std::optional<double>& min_score,
                  const std::string& template_id) {
  check_token(id, "template id", template_id);
  if (region.w <= 0 || region.h <= 0) {
    throw ValidationError(id, "region must have positive size");
  }
  if (region.x < 0 || region.y < 0) {
    throw ValidationError(id, "region origin must be non-negative");
  }
  if (tol && !(*tol >= 0.0 && std::isfinite(*tol))) {
    throw ValidationError(id, "position tolerance must be >= 0");
  }
  if (min_score && !(*min_score >= -1.0 && *min_score <= 1.0)) {
    throw ValidationError(id, "min_score must lie in [-1, 1]");
  }
}

}  // namespace

std::string_view to_string(StepKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ValidationError::ValidationError(std::string step_id, const std::string& message)
    : std::runtime_error(step_id.empty() ? message : step_id + ": " + message),
      step_id_(std::move(step_id)) {}

const Step* ProcedureScript::find(std::string_view step_id) const {
  for (const auto& s : steps) {
    if (s.step_id == step_id) return &s;
  }
  return nullptr;
}

void validate_script(const ProcedureScript& script) {
  check_token("", "procedure id", script.procedure_id);
  check_token("", "product type", script.product_type);
  if (script.revision < 1) throw ValidationError("", "revision must be positive");
  if (script.steps.empty()) throw ValidationError("", "procedure has no steps");

  std::set<std::string> ids;
  for (const auto& step : script.steps) {
    const std::string& id = step.step_id;
    check_token("", "step id", id);
    if (!ids.insert(id).second) throw ValidationError(id, "duplicate step id");
    if (const auto* p = std::get_if<InstallParams>(&step.params)) {
      check_token(id, "element id", p->element_id);
      if (p->camera_id) check_token(id, "camera id", *p->camera_id);
      check_vision(id, p->expected_region, p->position_tolerance_px,
                   p->min_score, p->template_id);
    } else if (const auto* p = std::get_if<InspectParams>(&step.params)) {
      if (p->camera_id) check_token(id, "camera id", *p->camera_id);
      check_vision(id, p->expected_region, p->position_tolerance_px,
                   p->min_score, p->template_id);
    } else if (const auto* p = std::get_if<TightenParams>(&step.params)) {
      if (p->fastener_count < 1) {
        throw ValidationError(id, "fastener count must be >= 1");
      }
      if (!(p->target_torque_nm > 0.0) || !std::isfinite(p->target_torque_nm)) {
        throw ValidationError(id, "target torque must be positive");
      }
    } else if (const auto* p = std::get_if<ConfirmParams>(&step.params)) {
      if (p->prompt.empty() || p->prompt.find('\n') != std::string::npos ||
          p->prompt.front() == ' ' || p->prompt.back() == ' ') {
        throw ValidationError(id, "prompt must be a single trimmed line");
      }
    }
  }
}

ProcedureScript parse_procedure(std::string_view text) {
  ProcedureScript script;
  script.revision = 0;
  bool have_id = false, have_product = false, have_revision = false;

  for (const auto& d : text::parse_blocks(text)) {
    if (d.keyword == "step") {
      script.steps.push_back(parse_step(d));
      continue;
    }
    if (!d.properties.empty()) {
      throw SyntaxError(d.properties.front().line,
                        "header line '" + d.keyword + "' takes no properties");
    }
    if (!script.steps.empty()) {
      throw SyntaxError(d.line, "header line after first step");
    }
    if (d.args.size() != 1) {
      throw SyntaxError(d.line, "expected '" + d.keyword + " <value>'");
    }
    auto once = [&](bool& flag) {
      if (flag) throw SyntaxError(d.line, "repeated '" + d.keyword + "'");
      flag = true;
    };
    if (d.keyword == "procedure") {
      once(have_id);
      script.procedure_id = d.args[0];
    } else if (d.keyword == "product") {
      once(have_product);
      script.product_type = d.args[0];
    } else if (d.keyword == "revision") {
      once(have_revision);
      script.revision = static_cast<int>(text::to_int(d.args[0], d.line));
    } else {
      throw SyntaxError(d.line, "unknown directive '" + d.keyword + "'");
    }
  }
  if (!have_id) throw SyntaxError(1, "missing 'procedure' header");
  if (!have_product) throw SyntaxError(1, "missing 'product' header");
  if (!have_revision) throw SyntaxError(1, "missing 'revision' header");

  validate_script(script);
  return script;
}

ProcedureScript load_procedure(const std::string& path) {
  return parse_procedure(text::read_file(path));
}

std::string serialize_procedure(const ProcedureScript& script) {
  std::ostringstream out;
  out << "procedure " << script.procedure_id << "\n"
      << "product " << script.product_type << "\n"
      << "revision " << script.revision << "\n";
  auto opt_num = [&](const char* key, const std::optional<double>& v) {
    if (v) out << "  " << key << " = " << text::format_double(*v) << "\n";
  };
  auto opt_str = [&](const char* key, const std::optional<std::string>& v) {
    if (v) out << "  " << key << " = " << *v << "\n";
  };
  for (const auto& step : script.steps) {
    out << "\nstep " << step.step_id << " " << to_string(step.kind()) << "\n";
    if (const auto* p = std::get_if<InstallParams>(&step.params)) {
      out << "  element = " << p->element_id << "\n"
          << "  template = " << p->template_id << "\n"
          << "  region = " << text::format_region(p->expected_region) << "\n";
      opt_num("tolerance", p->position_tolerance_px);
      opt_num("min_score", p->min_score);
      opt_str("camera", p->camera_id);
    } else if (const auto* p = std::get_if<TightenParams>(&step.params)) {
      out << "  fasteners = " << p->fastener_count << "\n"
          << "  torque = " << text::format_double(p->target_torque_nm) << "\n"
          << "  mode = " << to_string(p->mode) << "\n";
    } else if (const auto* p = std::get_if<InspectParams>(&step.params)) {
      out << "  template = " << p->template_id << "\n"
          << "  region = " << text::format_region(p->expected_region) << "\n";
      opt_num("min_score", p->min_score);
      opt_num("tolerance", p->position_tolerance_px);
      opt_str("camera", p->camera_id);
    } else if (const auto* p = std::get_if<ConfirmParams>(&step.params)) {
      out << "  prompt = " << p->prompt << "\n";
    }
  }
  return out.str();
}

}  // namespace asmctl::procedure
