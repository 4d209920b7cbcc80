#include "asmctl/logbook/work_event.hpp"

#include <array>
#include <utility>

namespace asmctl::logbook {
namespace {

constexpr std::array<std::pair<EventKind, const char*>, 9> kKindNames = {{
    {EventKind::SessionBegin, "session_begin"},
    {EventKind::StepStart, "step_start"},
    {EventKind::Detection, "detection"},
    {EventKind::TorqueResult, "torque_result"},
    {EventKind::OperatorAction, "operator_action"},
    {EventKind::AlarmRaised, "alarm_raised"},
    {EventKind::AlarmAcked, "alarm_acked"},
    {EventKind::StepResult, "step_result"},
    {EventKind::SessionEnd, "session_end"},
}};

template <typename T>
T field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw InvalidEvent(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw InvalidEvent(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

const char* to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  return std::nullopt;
}

bool is_safe_id(std::string_view id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-' ||
                    c == ':';
    if (!ok) return false;
  }
  return true;
}

void validate_event(const WorkEvent& e) {
  if (e.event_id == 0) throw InvalidEvent("event_id must be >= 1");
  if (!is_safe_id(e.session_id)) throw InvalidEvent("session_id is not a valid id");
  if (!is_safe_id(e.workcell_id)) throw InvalidEvent("workcell_id is not a valid id");
  if (e.product_serial.empty()) throw InvalidEvent("product_serial is empty");
  if (e.timestamp_ms < 0) throw InvalidEvent("timestamp_ms is negative");
  if (!e.payload.is_object()) throw InvalidEvent("payload must be an object");
  if (e.media_ref && !is_safe_id(*e.media_ref)) {
    throw InvalidEvent("media_ref is not a valid id");
  }
}

Json to_json(const WorkEvent& e) {
  Json j = {
      {"event_id", e.event_id},
      {"session_id", e.session_id},
      {"workcell_id", e.workcell_id},
      {"product_serial", e.product_serial},
      {"timestamp_ms", e.timestamp_ms},
      {"kind", to_string(e.kind)},
      {"payload", e.payload},
  };
  j["media_ref"] = e.media_ref ? Json(*e.media_ref) : Json(nullptr);
  return j;
}

WorkEvent event_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidEvent("event must be a JSON object");
  WorkEvent e;
  const Json& id = j.contains("event_id") ? j.at("event_id") : Json();
  if (!id.is_number_integer()) throw InvalidEvent("event_id must be an integer");
  if (id.is_number_unsigned()) {
    e.event_id = id.get<std::uint64_t>();
  } else if (id.get<std::int64_t>() < 0) {
    throw InvalidEvent("event_id must be >= 1");
  } else {
    e.event_id = static_cast<std::uint64_t>(id.get<std::int64_t>());
  }
  e.session_id = field<std::string>(j, "session_id");
  e.workcell_id = field<std::string>(j, "workcell_id");
  e.product_serial = field<std::string>(j, "product_serial");
  const Json& ts = j.contains("timestamp_ms") ? j.at("timestamp_ms") : Json();
  if (!ts.is_number_integer()) throw InvalidEvent("timestamp_ms must be an integer");
  e.timestamp_ms = ts.get<std::int64_t>();
  if (ts.is_number_unsigned() && e.timestamp_ms < 0) {
    throw InvalidEvent("timestamp_ms out of range");
  }
  const auto kind_name = field<std::string>(j, "kind");
  const auto kind = event_kind_from_string(kind_name);
  if (!kind) throw InvalidEvent("unknown event kind '" + kind_name + "'");
  e.kind = *kind;
  if (!j.contains("payload")) throw InvalidEvent("missing field 'payload'");
  e.payload = j.at("payload");
  if (auto it = j.find("media_ref"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw InvalidEvent("field 'media_ref' has the wrong type");
    e.media_ref = it->get<std::string>();
  }
  return e;
}

std::string to_json_line(const WorkEvent& event) {
  return to_json(event).dump(-1, ' ', false, Json::error_handler_t::replace);
}

WorkEvent parse_json_line(std::string_view line) {
  Json j = Json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw InvalidEvent("event is not valid JSON");
  return event_from_json(j);
}

}  // namespace asmctl::logbook
