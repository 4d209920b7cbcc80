#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asmctl/logbook/store.hpp"
#include "asmctl/logbook/work_event.hpp"

namespace asmctl::logbook {

struct TorqueRecord {
  int attempt = 0;
  int fastener = 0;
  std::int64_t final_torque_mnm = 0;
  std::string mode;
  std::string status;
  bool within_band = false;

  bool operator==(const TorqueRecord&) const = default;
};

struct DetectionRecord {
  int attempt = 0;
  std::string camera_id;
  std::string template_id;
  double center_x = 0.0;
  double center_y = 0.0;
  double score = 0.0;
  double offset_px = 0.0;
  std::string verdict;

  bool operator==(const DetectionRecord&) const = default;
};

struct StepSummary {
  std::string step_id;
  std::string kind;
  std::string status = "Pending";  // step state name; "Active" while started
  int attempts = 0;
  std::optional<std::int64_t> first_started_ms;
  std::optional<std::int64_t> last_finished_ms;
  // Sum over attempts of (step_result - step_start); the time the worker
  // actually spent on the step.
  std::int64_t active_ms = 0;
  std::optional<std::string> reason;
  std::vector<TorqueRecord> torques;
  std::vector<DetectionRecord> detections;

  bool operator==(const StepSummary&) const = default;
};

struct SessionSummary {
  std::string session_id;
  std::string workcell_id;
  std::string procedure_id;
  std::string revision;
  std::int64_t started_ms = 0;
  std::optional<std::int64_t> ended_ms;
  std::string outcome = "open";  // open | complete | halted
  std::vector<StepSummary> steps;
  int alarms = 0;

  bool operator==(const SessionSummary&) const = default;
};

struct DigitalPassport {
  std::string product_serial;
  std::vector<SessionSummary> sessions;

  bool operator==(const DigitalPassport&) const = default;
};

// Folds one session's events (in event_id order) into its summary. Step
// order follows the session_begin step list. Events naming unknown steps
// are ignored.
SessionSummary fold_session(const std::vector<WorkEvent>& events);

// Pure function of the event set: sessions whose events carry the serial,
// ordered by start time then session_id.
DigitalPassport build_passport(const std::string& product_serial,
                               const std::vector<std::vector<WorkEvent>>& sessions);
DigitalPassport build_passport(const EventStore& store, const std::string& product_serial);

Json to_json(const DigitalPassport& passport);
std::string format_passport(const DigitalPassport& passport);

}  // namespace asmctl::logbook
