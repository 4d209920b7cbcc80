#include "asmctl/procedure/session_state.hpp"

#include <algorithm>

namespace asmctl::procedure {

namespace {

constexpr std::pair<StepStatus, std::string_view> kStatusNames[] = {
    {StepStatus::Pending, "Pending"}, {StepStatus::Active, "Active"},
    {StepStatus::Passed, "Passed"},   {StepStatus::Failed, "Failed"},
    {StepStatus::Skipped, "Skipped"},
};

StepState& find_state(StepStates& states, std::string_view step_id) {
  auto it = std::find_if(states.begin(), states.end(),
                         [&](const StepState& s) { return s.step_id == step_id; });
  if (it == states.end()) {
    throw StateError(StateError::Code::UnknownStep,
                     "unknown step '" + std::string(step_id) + "'");
  }
  return *it;
}

bool is_done(StepStatus s) {
  return s == StepStatus::Passed || s == StepStatus::Skipped;
}

}  // namespace

std::string_view to_string(StepStatus status) {
  for (const auto& [s, name] : kStatusNames) {
    if (s == status) return name;
  }
  return "Unknown";
}

StepStatus step_status_from_string(std::string_view name) {
  for (const auto& [s, n] : kStatusNames) {
    if (n == name) return s;
  }
  throw std::invalid_argument("unknown step status '" + std::string(name) + "'");
}

StepStates initial_states(const ProcedureScript& script) {
  StepStates states;
  states.reserve(script.steps.size());
  for (const auto& step : script.steps) {
    states.push_back({step.step_id, StepStatus::Pending, 0});
  }
  return states;
}

NextStep next_pending(const ProcedureScript& script, const StepStates& states) {
  if (states.size() != script.steps.size()) {
    throw StateError(StateError::Code::InconsistentState,
                     "state list does not match the script");
  }
  const Step* active = nullptr;
  const Step* pending = nullptr;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Step& step = script.steps[i];
    const StepState& st = states[i];
    if (st.step_id != step.step_id) {
      throw StateError(StateError::Code::InconsistentState,
                       "state order does not match the script at '" +
                           step.step_id + "'");
    }
    switch (st.status) {
      case StepStatus::Active:
        if (active != nullptr) {
          throw StateError(StateError::Code::InconsistentState,
                           "two active steps: '" + active->step_id + "' and '" +
                               step.step_id + "'");
        }
        active = &step;
        break;
      case StepStatus::Failed:
        return SessionHalted{step.step_id};
      case StepStatus::Pending:
        if (pending == nullptr) pending = &step;
        break;
      default:
        break;
    }
  }
  if (active != nullptr) return active;
  if (pending != nullptr) return pending;
  return SessionComplete{};
}

StepStates activate(StepStates states, std::string_view step_id) {
  for (const auto& s : states) {
    if (s.status == StepStatus::Active) {
      throw StateError(StateError::Code::InconsistentState,
                       "step '" + s.step_id + "' is already active");
    }
  }
  StepState& st = find_state(states, step_id);
  if (st.status != StepStatus::Pending) {
    throw StateError(StateError::Code::NotPending,
                     "step '" + st.step_id + "' is not pending");
  }
  st.status = StepStatus::Active;
  return states;
}

StepStates skip(StepStates states, std::string_view step_id) {
  StepState& st = find_state(states, step_id);
  if (st.status != StepStatus::Pending) {
    throw StateError(StateError::Code::NotPending,
                     "step '" + st.step_id + "' is not pending");
  }
  st.status = StepStatus::Skipped;
  return states;
}

ApplyResult apply_result(StepStates states, std::string_view step_id,
                         Outcome outcome, int retry_cap) {
  StepState& st = find_state(states, step_id);
  if (st.status != StepStatus::Active) {
    throw StateError(StateError::Code::NotActive,
                     "step '" + st.step_id + "' is not active");
  }
  const int previous_attempts = st.attempts;
  ++st.attempts;
  ApplyResult result;
  if (outcome == Outcome::Passed) {
    st.status = StepStatus::Passed;
  } else if (previous_attempts >= retry_cap) {
    st.status = StepStatus::Failed;
    result.halted = true;
  } else {
    st.status = StepStatus::Pending;
  }
  result.states = std::move(states);
  return result;
}

bool is_complete(const StepStates& states) {
  return std::all_of(states.begin(), states.end(),
                     [](const StepState& s) { return is_done(s.status); });
}

}  // namespace asmctl::procedure
