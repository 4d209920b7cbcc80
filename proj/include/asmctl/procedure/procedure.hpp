#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asmctl/common.hpp"
#include "asmctl/text_format.hpp"

namespace asmctl::procedure {

enum class StepKind { InstallElement, Tighten, Inspect, OperatorConfirm };

std::string_view to_string(StepKind kind);

struct InstallParams {
  std::string element_id;
  std::string template_id;
  Region expected_region;
  // Unset values fall back to the workcell defaults.
  std::optional<double> position_tolerance_px;
  std::optional<double> min_score;
  std::optional<std::string> camera_id;

  bool operator==(const InstallParams&) const = default;
};

struct TightenParams {
  int fastener_count = 1;
  double target_torque_nm = 0.0;
  ToolMode mode = ToolMode::TorqueLimit;

  bool operator==(const TightenParams&) const = default;
};

struct InspectParams {
  std::string template_id;
  Region expected_region;
  std::optional<double> min_score;
  std::optional<double> position_tolerance_px;
  std::optional<std::string> camera_id;

  bool operator==(const InspectParams&) const = default;
};

struct ConfirmParams {
  std::string prompt;

  bool operator==(const ConfirmParams&) const = default;
};

using StepParams =
    std::variant<InstallParams, TightenParams, InspectParams, ConfirmParams>;

struct Step {
  std::string step_id;
  StepParams params;

  StepKind kind() const { return static_cast<StepKind>(params.index()); }
  bool is_vision() const {
    return kind() == StepKind::InstallElement || kind() == StepKind::Inspect;
  }

  bool operator==(const Step&) const = default;
};

struct ProcedureScript {
  std::string procedure_id;
  std::string product_type;
  int revision = 1;
  std::vector<Step> steps;

  const Step* find(std::string_view step_id) const;

  bool operator==(const ProcedureScript&) const = default;
};

// Well-formed document whose content breaks a script invariant. `step_id`
// is empty for script-level problems.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string step_id, const std::string& message);
  const std::string& step_id() const { return step_id_; }

 private:
  std::string step_id_;
};

ProcedureScript parse_procedure(std::string_view text);
ProcedureScript load_procedure(const std::string& path);

// Canonical text form. parse_procedure(serialize_procedure(s)) == s.
std::string serialize_procedure(const ProcedureScript& script);

// Checks every script invariant; throws ValidationError on the first breach.
void validate_script(const ProcedureScript& script);

}  // namespace asmctl::procedure
