#include "asmctl/logbook/passport.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace asmctl::logbook {
namespace {

std::string str(const Json& p, const char* key, std::string fallback = {}) {
  auto it = p.find(key);
  return it != p.end() && it->is_string() ? it->get<std::string>() : fallback;
}

template <typename T>
T num(const Json& p, const char* key, T fallback = T{}) {
  auto it = p.find(key);
  return it != p.end() && it->is_number() ? it->get<T>() : fallback;
}

Json opt(const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

SessionSummary fold_session(const std::vector<WorkEvent>& events) {
  SessionSummary s;
  std::map<std::string, std::size_t> index;
  std::map<std::string, std::int64_t> open_since;

  auto step = [&](const Json& p) -> StepSummary* {
    auto it = index.find(str(p, "step_id"));
    return it == index.end() ? nullptr : &s.steps[it->second];
  };

  for (const auto& e : events) {
    const Json& p = e.payload;
    switch (e.kind) {
      case EventKind::SessionBegin:
        s.session_id = e.session_id;
        s.workcell_id = e.workcell_id;
        s.started_ms = e.timestamp_ms;
        s.procedure_id = str(p, "procedure_id");
        s.revision = str(p, "revision");
        if (auto it = p.find("steps"); it != p.end() && it->is_array()) {
          for (const auto& st : *it) {
            StepSummary summary;
            summary.step_id = str(st, "step_id");
            summary.kind = str(st, "kind");
            if (summary.step_id.empty() || index.count(summary.step_id)) continue;
            index[summary.step_id] = s.steps.size();
            s.steps.push_back(std::move(summary));
          }
        }
        break;
      case EventKind::StepStart:
        if (auto* st = step(p)) {
          st->status = "Active";
          if (!st->first_started_ms) st->first_started_ms = e.timestamp_ms;
          open_since[st->step_id] = e.timestamp_ms;
        }
        break;
      case EventKind::Detection:
        if (auto* st = step(p)) {
          DetectionRecord d;
          d.attempt = num<int>(p, "attempt");
          d.camera_id = str(p, "camera_id");
          d.template_id = str(p, "template_id");
          d.center_x = num<double>(p, "center_x");
          d.center_y = num<double>(p, "center_y");
          d.score = num<double>(p, "score");
          d.offset_px = num<double>(p, "offset_px");
          d.verdict = str(p, "verdict");
          st->detections.push_back(std::move(d));
        }
        break;
      case EventKind::TorqueResult:
        if (auto* st = step(p)) {
          TorqueRecord t;
          t.attempt = num<int>(p, "attempt");
          t.fastener = num<int>(p, "fastener");
          t.final_torque_mnm = num<std::int64_t>(p, "final_torque_mnm");
          t.mode = str(p, "mode");
          t.status = str(p, "status");
          auto wb = p.find("within_band");
          t.within_band = wb != p.end() && wb->is_boolean() && wb->get<bool>();
          st->torques.push_back(std::move(t));
        }
        break;
      case EventKind::StepResult:
        if (auto* st = step(p)) {
          st->status = str(p, "status_after", st->status);
          st->attempts = num<int>(p, "attempt", st->attempts + 1);
          st->last_finished_ms = e.timestamp_ms;
          if (auto it = open_since.find(st->step_id); it != open_since.end()) {
            st->active_ms += e.timestamp_ms - it->second;
            open_since.erase(it);
          }
          if (auto r = p.find("reason"); r != p.end() && r->is_string()) {
            st->reason = r->get<std::string>();
          } else {
            st->reason.reset();
          }
        }
        break;
      case EventKind::AlarmRaised:
        ++s.alarms;
        break;
      case EventKind::SessionEnd:
        s.ended_ms = e.timestamp_ms;
        s.outcome = str(p, "outcome", "complete");
        break;
      case EventKind::OperatorAction:
      case EventKind::AlarmAcked:
        break;
    }
  }
  return s;
}

DigitalPassport build_passport(const std::string& product_serial,
                               const std::vector<std::vector<WorkEvent>>& sessions) {
  DigitalPassport passport;
  passport.product_serial = product_serial;
  for (const auto& events : sessions) {
    if (events.empty() || events.front().kind != EventKind::SessionBegin) continue;
    if (events.front().product_serial != product_serial) continue;
    std::vector<WorkEvent> ordered = events;
    std::sort(ordered.begin(), ordered.end(),
              [](const WorkEvent& a, const WorkEvent& b) { return a.event_id < b.event_id; });
    passport.sessions.push_back(fold_session(ordered));
  }
  std::sort(passport.sessions.begin(), passport.sessions.end(),
            [](const SessionSummary& a, const SessionSummary& b) {
              if (a.started_ms != b.started_ms) return a.started_ms < b.started_ms;
              return a.session_id < b.session_id;
            });
  return passport;
}

DigitalPassport build_passport(const EventStore& store, const std::string& product_serial) {
  std::vector<std::vector<WorkEvent>> sessions;
  for (const auto& id : store.sessions_for_serial(product_serial)) {
    sessions.push_back(store.events(id));
  }
  return build_passport(product_serial, sessions);
}

Json to_json(const DigitalPassport& passport) {
  Json sessions = Json::array();
  for (const auto& s : passport.sessions) {
    Json steps = Json::array();
    for (const auto& st : s.steps) {
      Json torques = Json::array();
      for (const auto& t : st.torques) {
        torques.push_back({{"attempt", t.attempt},
                           {"fastener", t.fastener},
                           {"final_torque_mnm", t.final_torque_mnm},
                           {"mode", t.mode},
                           {"status", t.status},
                           {"within_band", t.within_band}});
      }
      Json detections = Json::array();
      for (const auto& d : st.detections) {
        detections.push_back({{"attempt", d.attempt},
                              {"camera_id", d.camera_id},
                              {"template_id", d.template_id},
                              {"center_x", d.center_x},
                              {"center_y", d.center_y},
                              {"score", d.score},
                              {"offset_px", d.offset_px},
                              {"verdict", d.verdict}});
      }
      steps.push_back({{"step_id", st.step_id},
                       {"kind", st.kind},
                       {"status", st.status},
                       {"attempts", st.attempts},
                       {"first_started_ms", opt(st.first_started_ms)},
                       {"last_finished_ms", opt(st.last_finished_ms)},
                       {"active_ms", st.active_ms},
                       {"reason", st.reason ? Json(*st.reason) : Json(nullptr)},
                       {"torques", std::move(torques)},
                       {"detections", std::move(detections)}});
    }
    sessions.push_back({{"session_id", s.session_id},
                        {"workcell_id", s.workcell_id},
                        {"procedure_id", s.procedure_id},
                        {"revision", s.revision},
                        {"started_ms", s.started_ms},
                        {"ended_ms", opt(s.ended_ms)},
                        {"outcome", s.outcome},
                        {"alarms", s.alarms},
                        {"steps", std::move(steps)}});
  }
  return {{"product_serial", passport.product_serial}, {"sessions", std::move(sessions)}};
}

std::string format_passport(const DigitalPassport& passport) {
  std::string out = "passport " + passport.product_serial + "\n";
  if (passport.sessions.empty()) return out + "  (no sessions)\n";
  char buf[256];
  for (const auto& s : passport.sessions) {
    std::snprintf(buf, sizeof buf, "session %s  workcell %s  procedure %s rev %s  %s\n",
                  s.session_id.c_str(), s.workcell_id.c_str(), s.procedure_id.c_str(),
                  s.revision.c_str(), s.outcome.c_str());
    out += buf;
    for (const auto& st : s.steps) {
      std::snprintf(buf, sizeof buf, "  %-16s %-8s %-8s attempts %d  active %lld ms\n",
                    st.step_id.c_str(), st.kind.c_str(), st.status.c_str(), st.attempts,
                    static_cast<long long>(st.active_ms));
      out += buf;
      for (const auto& d : st.detections) {
        std::snprintf(buf, sizeof buf, "    detection %s at (%.2f, %.2f) score %.4f %s\n",
                      d.template_id.c_str(), d.center_x, d.center_y, d.score,
                      d.verdict.c_str());
        out += buf;
      }
      for (const auto& t : st.torques) {
        std::snprintf(buf, sizeof buf, "    fastener %d torque %.3f Nm %s\n", t.fastener,
                      static_cast<double>(t.final_torque_mnm) / 1000.0, t.status.c_str());
        out += buf;
      }
    }
  }
  return out;
}

}  // namespace asmctl::logbook
