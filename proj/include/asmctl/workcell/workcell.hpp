#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "asmctl/logbook/work_event.hpp"
#include "asmctl/procedure/procedure.hpp"
#include "asmctl/procedure/session_state.hpp"
#include "asmctl/tooling/torque_model.hpp"
#include "asmctl/vision/image.hpp"
#include "asmctl/vision/template_library.hpp"
#include "asmctl/workcell/config.hpp"
#include "asmctl/workcell/event_sink.hpp"
#include "asmctl/workcell/scene_source.hpp"
#include "asmctl/workcell/tool_link.hpp"

namespace asmctl::workcell {

using logbook::Json;

enum class LightState { Idle, Proceed, Attention, Alarm };
const char* to_string(LightState light);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
  // Accounts for modeled work. Wall clocks ignore it.
  virtual void advance(std::int64_t ms) = 0;
};

inline constexpr std::int64_t kSimEpochMs = 1'767'225'600'000;  // 2026-01-01T00:00:00Z

class SimClock : public Clock {
 public:
  explicit SimClock(std::int64_t start_ms = kSimEpochMs) : now_(start_ms) {}
  std::int64_t now_ms() override { return now_; }
  void advance(std::int64_t ms) override { now_ += ms; }

 private:
  std::int64_t now_;
};

// UTC wall clock that never steps backwards.
class SystemClock : public Clock {
 public:
  std::int64_t now_ms() override;
  void advance(std::int64_t) override {}

 private:
  std::mutex mu_;
  std::int64_t last_ = 0;
};

enum class SessionPhase { Running, Complete, Halted };
const char* to_string(SessionPhase phase);

struct Session {
  std::string session_id;
  std::string workcell_id;
  std::string product_serial;
  procedure::ProcedureScript script;
  procedure::StepStates states;
  std::int64_t started_at_ms = 0;
  std::optional<std::int64_t> ended_at_ms;
  SessionPhase phase = SessionPhase::Running;
  std::string failed_step_id;
  LightState light = LightState::Idle;
  std::uint64_t events = 0;
};

struct StepOutcome {
  procedure::Outcome outcome = procedure::Outcome::Passed;
  std::string reason;  // empty when passed
};

struct TelemetrySummary {
  std::string step_id;
  int fastener = 0;
  int samples = 0;
  std::uint32_t t_ms = 0;
  double current_a = 0.0;
  double torque_nm = 0.0;
  double peak_torque_nm = 0.0;
  double angle_deg = 0.0;
  double setpoint_nm = 0.0;
};

enum class ConfirmStatus { Accepted, AlreadyConfirmed, NotActive, UnknownStep, NoSession };

struct RunOptions {
  std::uint64_t seed = 7;
  // Confirm OperatorConfirm steps without waiting for the operator API.
  bool headless = true;
  // Upload a PGM keyframe per vision attempt and reference it from the
  // detection event.
  bool keyframes = true;
  // Upper bound on waiting for an operator confirmation; 0 waits forever.
  std::chrono::milliseconds confirm_timeout{0};
};

// Precondition failure; nothing was emitted.
class SessionRejected : public std::invalid_argument {
 public:
  SessionRejected(const std::string& message, std::vector<ConfigViolation> violations = {})
      : std::invalid_argument(message), violations_(std::move(violations)) {}
  const std::vector<ConfigViolation>& violations() const { return violations_; }

 private:
  std::vector<ConfigViolation> violations_;
};

class SessionBusy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// UUID-formatted id derived from the seed and the session identity.
std::string make_session_id(std::uint64_t seed, const std::string& workcell_id,
                            const std::string& product_serial);

// One workplace: runs sessions step by step and exposes their state to the
// operator API. A session runs on the caller's thread; confirm(),
// acknowledge_alarm() and the read accessors may be called from any thread.
class Workcell {
 public:
  Workcell(WorkcellConfig config, vision::TemplateLibrary templates, SceneSource& scene,
           EventSink& sink, ToolLink* tool, Clock& clock);
  ~Workcell();

  Workcell(const Workcell&) = delete;
  Workcell& operator=(const Workcell&) = delete;

  const WorkcellConfig& config() const { return config_; }
  const vision::TemplateLibrary& templates() const { return templates_; }

  // Checks the serial, the script and the equipment (SessionRejected), then
  // runs next_pending / run_step / apply_result until the session completes
  // or halts. Throws SessionBusy while another session runs.
  Session run_session(const procedure::ProcedureScript& script,
                      const std::string& product_serial, const RunOptions& options = {});

  // Consistent copy of the current (or last) session.
  std::optional<Session> session() const;
  // Events of the current (or last) session, in order.
  std::vector<logbook::WorkEvent> session_events() const;
  LightState light() const;
  Json snapshot_json() const;

  ConfirmStatus confirm(const std::string& step_id, const std::string& source = "operator");
  // Alarm -> Attention with an alarm_acked event. False when not in Alarm.
  bool acknowledge_alarm(const std::string& source = "operator");
  // Ends a waiting confirmation or frame wait; the session halts.
  void abort();

  struct StreamItem {
    std::uint64_t seq = 0;
    std::string type;  // work_event | light
    Json data;
  };
  // Items with seq > after, waiting up to `wait` for at least one.
  std::vector<StreamItem> stream_since(std::uint64_t after, std::chrono::milliseconds wait) const;

  void record_frame(const std::string& camera_id, vision::GrayImage frame);
  std::optional<vision::GrayImage> last_frame(const std::string& camera_id) const;

 private:
  StepOutcome run_step(const procedure::Step& step, int attempt, const RunOptions& options);
  StepOutcome run_vision(const procedure::Step& step, int attempt, const RunOptions& options);
  StepOutcome run_tighten(const procedure::Step& step, int attempt);
  StepOutcome run_confirm(const procedure::Step& step, int attempt, const RunOptions& options);

  // Returns false, emitting nothing, when `only_if_open` is set and the
  // session log is already closed.
  bool emit(logbook::EventKind kind, Json payload,
            std::optional<std::string> media_ref = std::nullopt, bool only_if_open = false);
  void set_light_locked(LightState light);
  void push_stream_locked(std::string type, Json data);
  void check_active_count(const procedure::StepStates& states, int expected) const;

  WorkcellConfig config_;
  vision::TemplateLibrary templates_;
  SceneSource& scene_;
  EventSink& sink_;
  ToolLink* tool_;
  Clock& clock_;
  tooling::TorqueModel torque_model_;

  std::mutex emit_mu_;  // orders event ids with sink delivery

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::optional<Session> session_;
  bool running_ = false;
  bool aborted_ = false;
  bool log_open_ = false;
  std::uint64_t next_event_id_ = 1;
  std::vector<logbook::WorkEvent> events_;
  LightState light_ = LightState::Idle;
  std::string alarm_step_;
  std::optional<std::string> awaiting_confirm_;
  std::set<std::string> confirmed_;
  std::string confirm_source_;
  std::optional<TelemetrySummary> telemetry_;
  std::optional<Json> last_detection_;
  std::map<std::string, vision::GrayImage> frames_;
  std::vector<StreamItem> stream_;
};

// Terminal step states rebuilt from a session's events alone.
procedure::StepStates replay_states(const procedure::ProcedureScript& script,
                                    const std::vector<logbook::WorkEvent>& events);

// Fixed-width text table: step, kind, status, attempts, detail.
std::string format_step_table(const Session& session, const std::vector<logbook::WorkEvent>& events);

}  // namespace asmctl::workcell
