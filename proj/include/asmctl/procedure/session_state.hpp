#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asmctl/procedure/procedure.hpp"

namespace asmctl::procedure {

enum class StepStatus { Pending, Active, Passed, Failed, Skipped };

std::string_view to_string(StepStatus status);
StepStatus step_status_from_string(std::string_view name);

struct StepState {
  std::string step_id;
  StepStatus status = StepStatus::Pending;
  int attempts = 0;

  bool operator==(const StepState&) const = default;
};

using StepStates = std::vector<StepState>;

inline constexpr int kDefaultRetryCap = 3;

class StateError : public std::logic_error {
 public:
  enum class Code { InconsistentState, UnknownStep, NotActive, NotPending };

  StateError(Code code, const std::string& message)
      : std::logic_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct SessionComplete {};
struct SessionHalted {
  std::string failed_step_id;
};

// The step to work on next: the Active step if there is one, otherwise the
// first Pending step.
using NextStep = std::variant<const Step*, SessionComplete, SessionHalted>;

enum class Outcome { Passed, Failed };

struct ApplyResult {
  StepStates states;
  bool halted = false;
};

StepStates initial_states(const ProcedureScript& script);

NextStep next_pending(const ProcedureScript& script, const StepStates& states);

// Pending -> Active.
StepStates activate(StepStates states, std::string_view step_id);

// Pending -> Skipped, for steps gated on equipment the cell does not have.
StepStates skip(StepStates states, std::string_view step_id);

// Records one attempt of the Active step. A failure returns the step to
// Pending for another try unless it has already used `retry_cap` retries,
// in which case the step stays Failed and the session halts.
ApplyResult apply_result(StepStates states, std::string_view step_id,
                         Outcome outcome, int retry_cap = kDefaultRetryCap);

bool is_complete(const StepStates& states);

}  // namespace asmctl::procedure
