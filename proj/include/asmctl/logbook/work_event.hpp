#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace asmctl::logbook {

using Json = nlohmann::json;

enum class EventKind {
  SessionBegin,
  StepStart,
  Detection,
  TorqueResult,
  OperatorAction,
  AlarmRaised,
  AlarmAcked,
  StepResult,
  SessionEnd,
};

const char* to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

// One line of a session log. Payload shape depends on kind; see
// docs/event-schema.json for the field list of each kind.
struct WorkEvent {
  std::uint64_t event_id = 0;
  std::string session_id;
  std::string workcell_id;
  std::string product_serial;
  std::int64_t timestamp_ms = 0;
  EventKind kind = EventKind::SessionBegin;
  Json payload = Json::object();
  std::optional<std::string> media_ref;

  bool operator==(const WorkEvent&) const = default;
};

// Malformed or invariant-breaking event. Maps to HTTP 400 in the collector.
class InvalidEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checks field-level invariants: ids are non-empty tokens, event_id >= 1,
// timestamp >= 0, payload is an object, media_ref (if any) is a token.
void validate_event(const WorkEvent& event);

Json to_json(const WorkEvent& event);
// Throws InvalidEvent on missing or mistyped fields; does not run
// validate_event.
WorkEvent event_from_json(const Json& j);

// Compact single-line form used in session logs. Keys are sorted, so the
// encoding of a given event is unique.
std::string to_json_line(const WorkEvent& event);
WorkEvent parse_json_line(std::string_view line);

// True for strings usable as file names and ids: [A-Za-z0-9._:-]+, not
// starting with '.'.
bool is_safe_id(std::string_view id);

}  // namespace asmctl::logbook
