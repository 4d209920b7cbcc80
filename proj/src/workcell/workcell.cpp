#include "asmctl/workcell/workcell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "asmctl/vision/pgm.hpp"
#include "asmctl/vision/placement.hpp"
#include "asmctl/vision/template_match.hpp"
#include "asmctl/vision/undistort.hpp"

namespace asmctl::workcell {

using logbook::EventKind;
using logbook::WorkEvent;
using procedure::Outcome;
using procedure::Step;
using procedure::StepKind;
using procedure::StepStatus;

namespace {

// Modeled durations charged to the clock (simulated clocks only).
constexpr std::int64_t kVisionCheckMs = 350;
constexpr std::int64_t kFastenerHandlingMs = 150;
constexpr std::int64_t kHeadlessConfirmMs = 1500;

std::string kind_name(const Step& step) { return std::string(procedure::to_string(step.kind())); }

const char* tool_status_name(std::uint8_t status) {
  switch (status) {
    case 0:
      return "completed";
    case 1:
      return "stalled";
    case 2:
      return "aborted";
    default:
      return "unknown";
  }
}

std::string safe_token(std::string s) {
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return s;
}

StepOutcome failed(std::string reason) { return {Outcome::Failed, std::move(reason)}; }

}  // namespace

const char* to_string(LightState light) {
  switch (light) {
    case LightState::Idle:
      return "idle";
    case LightState::Proceed:
      return "proceed";
    case LightState::Attention:
      return "attention";
    case LightState::Alarm:
      return "alarm";
  }
  return "idle";
}

const char* to_string(SessionPhase phase) {
  switch (phase) {
    case SessionPhase::Running:
      return "running";
    case SessionPhase::Complete:
      return "complete";
    case SessionPhase::Halted:
      return "halted";
  }
  return "running";
}

std::int64_t SystemClock::now_ms() {
  const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  std::lock_guard lock(mu_);
  last_ = std::max<std::int64_t>(last_, now);
  return last_;
}

std::string make_session_id(std::uint64_t seed, const std::string& workcell_id,
                            const std::string& product_serial) {
  const std::string label = workcell_id + "/" + product_serial;
  const std::uint64_t hi = mix_seed(seed, label, 1);
  const std::uint64_t lo = mix_seed(seed, label, 2);
  // Version 4 / variant 1 bit layout.
  const std::uint64_t a = (hi & 0xFFFFFFFFFFFF0FFFull) | 0x0000000000004000ull;
  const std::uint64_t b = (lo & 0x3FFFFFFFFFFFFFFFull) | 0x8000000000000000ull;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%08llx-%04llx-%04llx-%04llx-%012llx",
                static_cast<unsigned long long>(a >> 32),
                static_cast<unsigned long long>((a >> 16) & 0xFFFF),
                static_cast<unsigned long long>(a & 0xFFFF),
                static_cast<unsigned long long>(b >> 48),
                static_cast<unsigned long long>(b & 0xFFFFFFFFFFFFull));
  return buf;
}

Workcell::Workcell(WorkcellConfig config, vision::TemplateLibrary templates, SceneSource& scene,
                   EventSink& sink, ToolLink* tool, Clock& clock)
    : config_(std::move(config)),
      templates_(std::move(templates)),
      scene_(scene),
      sink_(sink),
      tool_(tool),
      clock_(clock) {}

Workcell::~Workcell() { abort(); }

// ---------------------------------------------------------------------------
// Event emission and shared state

bool Workcell::emit(EventKind kind, Json payload, std::optional<std::string> media_ref,
                    bool only_if_open) {
  std::lock_guard order(emit_mu_);
  WorkEvent e;
  {
    std::lock_guard lock(mu_);
    if (!session_ || (only_if_open && !log_open_)) return false;
    e.event_id = next_event_id_++;
    e.session_id = session_->session_id;
    e.workcell_id = session_->workcell_id;
    e.product_serial = session_->product_serial;
    e.timestamp_ms = clock_.now_ms();
    e.kind = kind;
    e.payload = std::move(payload);
    e.media_ref = std::move(media_ref);
    if (kind == EventKind::SessionEnd) log_open_ = false;
    session_->events = e.event_id;
    events_.push_back(e);
    push_stream_locked("work_event", logbook::to_json(e));
  }
  sink_.emit(e);
  return true;
}

void Workcell::push_stream_locked(std::string type, Json data) {
  stream_.push_back({stream_.size() + 1, std::move(type), std::move(data)});
  cv_.notify_all();
}

void Workcell::set_light_locked(LightState light) {
  if (session_) session_->light = light;
  if (light == light_) return;
  light_ = light;
  push_stream_locked("light", {{"light", to_string(light)}});
}

void Workcell::check_active_count(const procedure::StepStates& states, int expected) const {
  const auto active = std::count_if(states.begin(), states.end(), [](const auto& s) {
    return s.status == StepStatus::Active;
  });
  if (active != expected) {
    throw procedure::StateError(procedure::StateError::Code::InconsistentState,
                                "expected " + std::to_string(expected) + " active step(s), found " +
                                    std::to_string(active));
  }
}

std::optional<Session> Workcell::session() const {
  std::lock_guard lock(mu_);
  return session_;
}

std::vector<WorkEvent> Workcell::session_events() const {
  std::lock_guard lock(mu_);
  return events_;
}

LightState Workcell::light() const {
  std::lock_guard lock(mu_);
  return light_;
}

void Workcell::record_frame(const std::string& camera_id, vision::GrayImage frame) {
  std::lock_guard lock(mu_);
  frames_[camera_id] = std::move(frame);
}

std::optional<vision::GrayImage> Workcell::last_frame(const std::string& camera_id) const {
  std::lock_guard lock(mu_);
  auto it = frames_.find(camera_id);
  if (it == frames_.end()) return std::nullopt;
  return it->second;
}

std::vector<Workcell::StreamItem> Workcell::stream_since(std::uint64_t after,
                                                         std::chrono::milliseconds wait) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, wait, [&] { return stream_.size() > after; });
  std::vector<StreamItem> out;
  for (std::size_t i = after; i < stream_.size(); ++i) out.push_back(stream_[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Operator inputs

ConfirmStatus Workcell::confirm(const std::string& step_id, const std::string& source) {
  std::lock_guard lock(mu_);
  if (!session_) return ConfirmStatus::NoSession;
  const Step* step = session_->script.find(step_id);
  if (!step) return ConfirmStatus::UnknownStep;
  if (confirmed_.count(step_id)) return ConfirmStatus::AlreadyConfirmed;
  if (awaiting_confirm_ != step_id) return ConfirmStatus::NotActive;
  confirmed_.insert(step_id);
  confirm_source_ = source;
  cv_.notify_all();
  return ConfirmStatus::Accepted;
}

bool Workcell::acknowledge_alarm(const std::string& source) {
  std::string step;
  {
    std::lock_guard lock(mu_);
    if (light_ != LightState::Alarm) return false;
    step = alarm_step_;
    set_light_locked(running_ ? LightState::Attention : LightState::Idle);
    cv_.notify_all();
  }
  emit(EventKind::AlarmAcked, {{"step_id", step}, {"source", source}}, std::nullopt, true);
  return true;
}

void Workcell::abort() {
  std::lock_guard lock(mu_);
  aborted_ = true;
  cv_.notify_all();
}

// ---------------------------------------------------------------------------
// Session loop

Session Workcell::run_session(const procedure::ProcedureScript& script,
                              const std::string& product_serial, const RunOptions& options) {
  if (product_serial.empty()) throw SessionRejected("product serial is empty");
  try {
    procedure::validate_script(script);
  } catch (const procedure::ValidationError& e) {
    throw SessionRejected(std::string("invalid procedure: ") + e.what());
  }
  auto violations = validate_config(config_, script, &templates_);
  if (!violations.empty()) {
    throw SessionRejected("workcell " + config_.workcell_id + " cannot run procedure " +
                              script.procedure_id,
                          std::move(violations));
  }

  {
    std::lock_guard lock(mu_);
    if (running_) throw SessionBusy("a session is already running on " + config_.workcell_id);
    running_ = true;
    aborted_ = false;
    log_open_ = true;
    next_event_id_ = 1;
    events_.clear();
    confirmed_.clear();
    awaiting_confirm_.reset();
    telemetry_.reset();
    last_detection_.reset();
    alarm_step_.clear();

    Session s;
    s.session_id = make_session_id(options.seed, config_.workcell_id, product_serial);
    s.workcell_id = config_.workcell_id;
    s.product_serial = product_serial;
    s.script = script;
    s.states = procedure::initial_states(script);
    s.started_at_ms = clock_.now_ms();
    session_ = std::move(s);
    set_light_locked(LightState::Idle);
  }
  struct RunningGuard {
    Workcell* w;
    ~RunningGuard() {
      std::lock_guard lock(w->mu_);
      w->running_ = false;
      w->awaiting_confirm_.reset();
    }
  } guard{this};

  Json steps = Json::array();
  for (const auto& st : script.steps) {
    steps.push_back({{"step_id", st.step_id}, {"kind", kind_name(st)}});
  }
  emit(EventKind::SessionBegin, {{"procedure_id", script.procedure_id},
                                 {"product_type", script.product_type},
                                 {"revision", std::to_string(script.revision)},
                                 {"retry_cap", config_.retry_cap},
                                 {"steps", std::move(steps)}});

  procedure::StepStates states = procedure::initial_states(script);
  SessionPhase phase = SessionPhase::Complete;
  std::string failed_step;
  while (true) {
    const auto next = procedure::next_pending(script, states);
    if (std::holds_alternative<procedure::SessionComplete>(next)) break;
    if (const auto* halted = std::get_if<procedure::SessionHalted>(&next)) {
      phase = SessionPhase::Halted;
      failed_step = halted->failed_step_id;
      break;
    }
    const Step& step = *std::get<const Step*>(next);
    states = procedure::activate(std::move(states), step.step_id);
    check_active_count(states, 1);
    const auto it = std::find_if(states.begin(), states.end(),
                                 [&](const auto& s) { return s.step_id == step.step_id; });
    const int attempt = it->attempts + 1;
    {
      std::lock_guard lock(mu_);
      session_->states = states;
    }
    emit(EventKind::StepStart,
         {{"step_id", step.step_id}, {"kind", kind_name(step)}, {"attempt", attempt}});

    const StepOutcome outcome = run_step(step, attempt, options);

    auto applied = procedure::apply_result(std::move(states), step.step_id, outcome.outcome,
                                           config_.retry_cap);
    states = std::move(applied.states);
    check_active_count(states, 0);
    const auto after = std::find_if(states.begin(), states.end(),
                                    [&](const auto& s) { return s.step_id == step.step_id; });
    {
      std::lock_guard lock(mu_);
      session_->states = states;
    }
    Json result = {{"step_id", step.step_id},
                   {"attempt", attempt},
                   {"outcome", outcome.outcome == Outcome::Passed ? "passed" : "failed"},
                   {"status_after", std::string(procedure::to_string(after->status))}};
    if (!outcome.reason.empty()) result["reason"] = outcome.reason;
    emit(EventKind::StepResult, std::move(result));

    if (outcome.outcome == Outcome::Passed) {
      std::lock_guard lock(mu_);
      set_light_locked(LightState::Proceed);
    } else {
      {
        std::lock_guard lock(mu_);
        alarm_step_ = step.step_id;
        set_light_locked(LightState::Alarm);
      }
      emit(EventKind::AlarmRaised, {{"step_id", step.step_id},
                                    {"attempt", attempt},
                                    {"reason", outcome.reason}});
    }
    if (applied.halted) {
      phase = SessionPhase::Halted;
      failed_step = step.step_id;
      break;
    }
    if (outcome.outcome == Outcome::Failed && !options.headless) {
      // An operator is present: the retry waits for the alarm to be
      // acknowledged.
      std::unique_lock lock(mu_);
      auto acked = [&] { return light_ != LightState::Alarm || aborted_; };
      if (options.confirm_timeout.count() > 0) {
        cv_.wait_for(lock, options.confirm_timeout, acked);
      } else {
        cv_.wait(lock, acked);
      }
    }
    bool aborted = false;
    {
      std::lock_guard lock(mu_);
      aborted = aborted_;
    }
    if (aborted && outcome.outcome == Outcome::Failed) {
      phase = SessionPhase::Halted;
      failed_step = step.step_id;
      break;
    }
  }

  Json end = {{"outcome", to_string(phase)}};
  if (!failed_step.empty()) end["failed_step_id"] = failed_step;
  emit(EventKind::SessionEnd, std::move(end));
  sink_.flush();

  std::lock_guard lock(mu_);
  session_->phase = phase;
  session_->failed_step_id = failed_step;
  session_->ended_at_ms = clock_.now_ms();
  if (phase == SessionPhase::Complete) set_light_locked(LightState::Idle);
  return *session_;
}

StepOutcome Workcell::run_step(const Step& step, int attempt, const RunOptions& options) {
  switch (step.kind()) {
    case StepKind::InstallElement:
    case StepKind::Inspect:
      return run_vision(step, attempt, options);
    case StepKind::Tighten:
      return run_tighten(step, attempt);
    case StepKind::OperatorConfirm:
      return run_confirm(step, attempt, options);
  }
  return failed("unknown_step_kind");
}

StepOutcome Workcell::run_vision(const Step& step, int attempt, const RunOptions& options) {
  std::string template_id;
  Region region;
  double min_score = config_.min_score;
  double tol = config_.tol_px;
  if (const auto* p = std::get_if<procedure::InstallParams>(&step.params)) {
    template_id = p->template_id;
    region = p->expected_region;
    min_score = p->min_score.value_or(min_score);
    tol = p->position_tolerance_px.value_or(tol);
  } else {
    const auto& q = std::get<procedure::InspectParams>(step.params);
    template_id = q.template_id;
    region = q.expected_region;
    min_score = q.min_score.value_or(min_score);
    tol = q.position_tolerance_px.value_or(tol);
  }
  const CameraConfig* camera = camera_for(config_, step);
  const vision::Template* tpl = templates_.find(template_id);
  if (!camera) return failed("camera_unavailable");
  if (!tpl) return failed("unknown_template");

  vision::GrayImage frame;
  try {
    frame = scene_.acquire({camera, tpl, region, step.step_id, attempt});
  } catch (const CameraUnavailable&) {
    return failed("camera_unavailable");
  }
  clock_.advance(kVisionCheckMs);
  record_frame(camera->camera_id, frame);

  vision::Detection det;
  try {
    det = vision::match_template(frame, *tpl);
  } catch (const vision::TemplateTooLarge&) {
    return failed("camera_unavailable");
  }
  const vision::PointPx raw{det.center_x, det.center_y};
  vision::Detection corrected = det;
  bool lens_ok = true;
  try {
    const auto p = vision::undistort_point(raw, camera->model);
    corrected.center_x = p.x;
    corrected.center_y = p.y;
  } catch (const vision::NoConvergence&) {
    lens_ok = false;
  }
  const double offset = std::hypot(corrected.center_x - region.center_x(),
                                   corrected.center_y - region.center_y());

  std::string verdict = "not_found";
  StepOutcome outcome = failed("not_found");
  if (lens_ok) {
    const auto v = vision::verify_placement(corrected, region, tol, min_score);
    if (std::holds_alternative<vision::Correct>(v)) {
      verdict = "correct";
      outcome = {Outcome::Passed, ""};
    } else if (std::holds_alternative<vision::Misplaced>(v)) {
      verdict = "misplaced";
      outcome = failed("misplaced");
    }
  }

  std::optional<std::string> media_ref;
  if (options.keyframes) {
    MediaUpload upload;
    upload.artifact_id = safe_token(session()->session_id + "-" + step.step_id + "-a" +
                                    std::to_string(attempt));
    upload.session_id = session()->session_id;
    upload.kind = logbook::MediaKind::KeyFrame;
    upload.captured_at_ms = clock_.now_ms();
    upload.bytes = vision::encode_pgm(frame);
    try {
      sink_.put_media(upload);
      media_ref = upload.artifact_id;
    } catch (const std::exception&) {
    }
  }

  Json detection = {{"step_id", step.step_id},
                    {"attempt", attempt},
                    {"camera_id", camera->camera_id},
                    {"template_id", template_id},
                    {"center_x", corrected.center_x},
                    {"center_y", corrected.center_y},
                    {"raw_x", det.center_x},
                    {"raw_y", det.center_y},
                    {"score", det.score},
                    {"offset_px", offset},
                    {"expected_region", {region.x, region.y, region.w, region.h}},
                    {"min_score", min_score},
                    {"tolerance_px", tol},
                    {"verdict", verdict}};
  {
    std::lock_guard lock(mu_);
    last_detection_ = detection;
  }
  emit(EventKind::Detection, std::move(detection), media_ref);
  return outcome;
}

StepOutcome Workcell::run_tighten(const Step& step, int attempt) {
  const auto& p = std::get<procedure::TightenParams>(step.params);
  if (!tool_) return failed("tool_unavailable");
  const auto setpoint_mnm = static_cast<std::uint32_t>(std::lround(p.target_torque_nm * 1000.0));
  const auto band_mnm = std::llround(torque_model_.band_nm * 1000.0);

  for (int fastener = 1; fastener <= p.fastener_count; ++fastener) {
    {
      std::lock_guard lock(mu_);
      telemetry_ = TelemetrySummary{};
      telemetry_->step_id = step.step_id;
      telemetry_->fastener = fastener;
      telemetry_->setpoint_nm = p.target_torque_nm;
    }
    auto on_telemetry = [&](const wireproto::Telemetry& t) {
      const double current = t.current_ma / 1000.0;
      const double torque = torque_model_.k_nm_per_a * current + torque_model_.offset_nm;
      std::lock_guard lock(mu_);
      if (!telemetry_) return;
      ++telemetry_->samples;
      telemetry_->t_ms = t.t_ms;
      telemetry_->current_a = current;
      telemetry_->torque_nm = torque;
      telemetry_->peak_torque_nm = std::max(telemetry_->peak_torque_nm, torque);
      telemetry_->angle_deg = t.angle_mdeg / 1000.0;
    };

    wireproto::FastenOutcome out;
    try {
      out = tool_->client().fasten(p.mode, setpoint_mnm, on_telemetry);
    } catch (const wireproto::ToolUnreachable&) {
      tool_->drop();
      return failed("tool_unreachable");
    } catch (const wireproto::ToolRejected&) {
      return failed("tool_rejected");
    }
    const std::uint32_t duration_ms = out.telemetry.empty() ? 0 : out.telemetry.back().t_ms;
    clock_.advance(duration_ms + kFastenerHandlingMs);

    const auto diff = static_cast<long long>(out.result.final_torque_mnm) -
                      static_cast<long long>(setpoint_mnm);
    const bool completed = out.result.status == 0;
    const bool within_band = completed && std::llabs(diff) <= band_mnm;
    emit(EventKind::TorqueResult, {{"step_id", step.step_id},
                                   {"attempt", attempt},
                                   {"fastener", fastener},
                                   {"final_torque_mnm", out.result.final_torque_mnm},
                                   {"setpoint_mnm", setpoint_mnm},
                                   {"mode", std::string(to_string(p.mode))},
                                   {"status", tool_status_name(out.result.status)},
                                   {"within_band", within_band},
                                   {"telemetry_samples", out.telemetry.size()},
                                   {"duration_ms", duration_ms}});
    if (!completed) return failed(std::string("tool_") + tool_status_name(out.result.status));
    if (!within_band) return failed("torque_out_of_band");
  }
  return {Outcome::Passed, ""};
}

StepOutcome Workcell::run_confirm(const Step& step, int attempt, const RunOptions& options) {
  std::string source;
  {
    std::unique_lock lock(mu_);
    awaiting_confirm_ = step.step_id;
    set_light_locked(LightState::Attention);
    if (options.headless) {
      confirmed_.insert(step.step_id);
      confirm_source_ = "headless";
    } else {
      auto ready = [&] { return confirmed_.count(step.step_id) > 0 || aborted_; };
      if (options.confirm_timeout.count() > 0) {
        cv_.wait_for(lock, options.confirm_timeout, ready);
      } else {
        cv_.wait(lock, ready);
      }
    }
    awaiting_confirm_.reset();
    if (!confirmed_.count(step.step_id)) return failed(aborted_ ? "aborted" : "confirm_timeout");
    source = confirm_source_;
  }
  if (options.headless) clock_.advance(kHeadlessConfirmMs);
  emit(EventKind::OperatorAction, {{"action", "confirm"},
                                   {"step_id", step.step_id},
                                   {"attempt", attempt},
                                   {"source", source}});
  return {Outcome::Passed, ""};
}

// ---------------------------------------------------------------------------
// Read-side helpers

Json Workcell::snapshot_json() const {
  std::lock_guard lock(mu_);
  Json out = {{"workcell_id", config_.workcell_id},
              {"light", to_string(light_)},
              {"has_tool", config_.has_tool},
              {"has_light", config_.has_light}};
  Json cams = Json::array();
  for (const auto& c : config_.cameras) cams.push_back(c.camera_id);
  out["cameras"] = cams;
  if (!session_) {
    out["session"] = nullptr;
    return out;
  }
  const Session& s = *session_;
  Json steps = Json::array();
  std::optional<std::string> active;
  for (const auto& st : s.states) {
    const Step* step = s.script.find(st.step_id);
    Json j = {{"step_id", st.step_id},
              {"kind", step ? kind_name(*step) : ""},
              {"status", std::string(procedure::to_string(st.status))},
              {"attempts", st.attempts}};
    if (step) {
      if (const auto* c = std::get_if<procedure::ConfirmParams>(&step->params)) {
        j["prompt"] = c->prompt;
      } else if (const auto* t = std::get_if<procedure::TightenParams>(&step->params)) {
        j["target_torque_nm"] = t->target_torque_nm;
        j["fastener_count"] = t->fastener_count;
        j["mode"] = std::string(to_string(t->mode));
      }
    }
    if (st.status == StepStatus::Active) active = st.step_id;
    steps.push_back(std::move(j));
  }
  Json session = {{"session_id", s.session_id},
                  {"product_serial", s.product_serial},
                  {"procedure_id", s.script.procedure_id},
                  {"phase", running_ ? "running" : to_string(s.phase)},
                  {"started_at_ms", s.started_at_ms},
                  {"ended_at_ms", s.ended_at_ms ? Json(*s.ended_at_ms) : Json(nullptr)},
                  {"failed_step_id", s.failed_step_id.empty() ? Json(nullptr) : Json(s.failed_step_id)},
                  {"active_step", active ? Json(*active) : Json(nullptr)},
                  {"awaiting_confirm", awaiting_confirm_ ? Json(*awaiting_confirm_) : Json(nullptr)},
                  {"events", s.events},
                  {"steps", std::move(steps)}};
  if (telemetry_) {
    const auto& t = *telemetry_;
    session["telemetry"] = {{"step_id", t.step_id},       {"fastener", t.fastener},
                            {"samples", t.samples},       {"t_ms", t.t_ms},
                            {"current_a", t.current_a},   {"torque_nm", t.torque_nm},
                            {"peak_torque_nm", t.peak_torque_nm},
                            {"angle_deg", t.angle_deg},   {"setpoint_nm", t.setpoint_nm},
                            {"band_nm", torque_model_.band_nm}};
  } else {
    session["telemetry"] = nullptr;
  }
  session["last_detection"] = last_detection_ ? *last_detection_ : Json(nullptr);
  out["session"] = std::move(session);
  out["stream_seq"] = stream_.size();
  return out;
}

procedure::StepStates replay_states(const procedure::ProcedureScript& script,
                                    const std::vector<WorkEvent>& events) {
  auto states = procedure::initial_states(script);
  for (const auto& e : events) {
    if (e.kind != EventKind::StepResult && e.kind != EventKind::StepStart) continue;
    const std::string id = e.payload.value("step_id", "");
    auto it = std::find_if(states.begin(), states.end(),
                           [&](const auto& s) { return s.step_id == id; });
    if (it == states.end()) continue;
    if (e.kind == EventKind::StepStart) {
      it->status = StepStatus::Active;
    } else {
      it->status = procedure::step_status_from_string(e.payload.value("status_after", "Pending"));
      it->attempts = e.payload.value("attempt", it->attempts + 1);
    }
  }
  return states;
}

std::string format_step_table(const Session& session, const std::vector<WorkEvent>& events) {
  std::map<std::string, std::string> detail;
  std::map<std::string, std::string> torques;
  std::map<std::string, int> torque_attempt;
  for (const auto& e : events) {
    const std::string id = e.payload.value("step_id", "");
    char buf[160];
    if (e.kind == EventKind::Detection) {
      std::snprintf(buf, sizeof buf, "%s score %.4f at (%.1f, %.1f) offset %.1f px",
                    e.payload.value("verdict", "").c_str(), e.payload.value("score", 0.0),
                    e.payload.value("center_x", 0.0), e.payload.value("center_y", 0.0),
                    e.payload.value("offset_px", 0.0));
      detail[id] = buf;
    } else if (e.kind == EventKind::TorqueResult) {
      const int attempt = e.payload.value("attempt", 0);
      if (torque_attempt[id] != attempt) {
        torque_attempt[id] = attempt;
        torques[id] = "torque Nm:";
      }
      std::snprintf(buf, sizeof buf, " %.3f", e.payload.value("final_torque_mnm", 0) / 1000.0);
      torques[id] += buf;
      detail[id] = torques[id];
    } else if (e.kind == EventKind::OperatorAction) {
      detail[id] = "confirmed (" + e.payload.value("source", std::string("operator")) + ")";
    } else if (e.kind == EventKind::StepResult && e.payload.contains("reason")) {
      detail[id] = (detail.count(id) ? detail[id] + "; " : std::string()) +
                   e.payload.value("reason", std::string());
    }
  }

  std::string out;
  char line[320];
  std::snprintf(line, sizeof line, "%-16s %-8s %-8s %-8s %s\n", "step", "kind", "status",
                "attempts", "detail");
  out += line;
  for (const auto& st : session.states) {
    const Step* step = session.script.find(st.step_id);
    std::snprintf(line, sizeof line, "%-16s %-8s %-8s %-8d %s\n", st.step_id.c_str(),
                  step ? kind_name(*step).c_str() : "?",
                  std::string(procedure::to_string(st.status)).c_str(), st.attempts,
                  detail[st.step_id].c_str());
    out += line;
  }
  out += "session " + session.session_id + " serial " + session.product_serial + ": " +
         to_string(session.phase);
  if (!session.failed_step_id.empty()) out += " at step " + session.failed_step_id;
  out += "\n";
  return out;
}

}  // namespace asmctl::workcell
