#include <doctest.h>

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <thread>

#include "asmctl/logbook/collector.hpp"
#include "asmctl/logbook/passport.hpp"
#include "asmctl/logbook/store.hpp"
#include "support/temp_dir.hpp"

using namespace asmctl::logbook;
using asmctl::testing::TempDir;

namespace {

// Builds the event stream of a session the way a workcell would.
class SessionWriter {
 public:
  SessionWriter(std::string session, std::string workcell, std::string serial, std::int64_t t0)
      : session_(std::move(session)), workcell_(std::move(workcell)),
        serial_(std::move(serial)), now_(t0) {}

  WorkEvent next(EventKind kind, Json payload, std::int64_t dt = 10) {
    WorkEvent e;
    e.event_id = ++id_;
    e.session_id = session_;
    e.workcell_id = workcell_;
    e.product_serial = serial_;
    e.timestamp_ms = now_ += dt;
    e.kind = kind;
    e.payload = std::move(payload);
    events_.push_back(e);
    return e;
  }

  const std::vector<WorkEvent>& events() const { return events_; }

 private:
  std::string session_, workcell_, serial_;
  std::int64_t now_;
  std::uint64_t id_ = 0;
  std::vector<WorkEvent> events_;
};

Json begin_payload(const std::vector<std::pair<std::string, std::string>>& steps) {
  Json list = Json::array();
  for (const auto& [id, kind] : steps) list.push_back({{"step_id", id}, {"kind", kind}});
  return {{"procedure_id", "P"}, {"revision", "1"}, {"product_type", "T"}, {"steps", list}};
}

// Three-step session: install, tighten x4, confirm. Returns its events.
std::vector<WorkEvent> three_step_session(const std::string& session, const std::string& cell,
                                          const std::string& serial, std::int64_t t0,
                                          const std::vector<std::int64_t>& torques) {
  SessionWriter w(session, cell, serial, t0);
  w.next(EventKind::SessionBegin,
         begin_payload({{"s1", "install"}, {"s2", "tighten"}, {"s3", "confirm"}}), 0);
  w.next(EventKind::StepStart, {{"step_id", "s1"}, {"kind", "install"}, {"attempt", 1}});
  w.next(EventKind::Detection, {{"step_id", "s1"},
                                {"attempt", 1},
                                {"camera_id", "cam0"},
                                {"template_id", "bracket"},
                                {"center_x", 100.0},
                                {"center_y", 80.5},
                                {"score", 0.97},
                                {"offset_px", 0.5},
                                {"verdict", "correct"}});
  w.next(EventKind::StepResult, {{"step_id", "s1"},
                                 {"attempt", 1},
                                 {"outcome", "passed"},
                                 {"status_after", "Passed"}},
         250);
  w.next(EventKind::StepStart, {{"step_id", "s2"}, {"kind", "tighten"}, {"attempt", 1}});
  for (std::size_t i = 0; i < torques.size(); ++i) {
    w.next(EventKind::TorqueResult, {{"step_id", "s2"},
                                     {"attempt", 1},
                                     {"fastener", static_cast<int>(i + 1)},
                                     {"final_torque_mnm", torques[i]},
                                     {"mode", "torque_limit"},
                                     {"status", "completed"},
                                     {"within_band", true}});
  }
  w.next(EventKind::StepResult, {{"step_id", "s2"},
                                 {"attempt", 1},
                                 {"outcome", "passed"},
                                 {"status_after", "Passed"}});
  w.next(EventKind::StepStart, {{"step_id", "s3"}, {"kind", "confirm"}, {"attempt", 1}});
  w.next(EventKind::OperatorAction, {{"action", "confirm"}, {"step_id", "s3"}}, 1000);
  w.next(EventKind::StepResult, {{"step_id", "s3"},
                                 {"attempt", 1},
                                 {"outcome", "passed"},
                                 {"status_after", "Passed"}});
  w.next(EventKind::SessionEnd, {{"outcome", "complete"}});
  return w.events();
}

WorkEvent simple_begin(const std::string& session = "sess-1") {
  WorkEvent e;
  e.event_id = 1;
  e.session_id = session;
  e.workcell_id = "cell-1";
  e.product_serial = "SN-1";
  e.timestamp_ms = 1000;
  e.kind = EventKind::SessionBegin;
  e.payload = begin_payload({{"s1", "inspect"}});
  return e;
}

}  // namespace

TEST_CASE("event JSON round trip and envelope validation") {
  WorkEvent e = simple_begin();
  e.media_ref = "frame-1";
  const auto line = to_json_line(e);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(parse_json_line(line) == e);

  CHECK_THROWS_AS(parse_json_line("{"), InvalidEvent);
  CHECK_THROWS_AS(parse_json_line("[]"), InvalidEvent);
  Json j = to_json(e);
  j["kind"] = "teleport";
  CHECK_THROWS_AS(event_from_json(j), InvalidEvent);
  j = to_json(e);
  j.erase("session_id");
  CHECK_THROWS_AS(event_from_json(j), InvalidEvent);
  j = to_json(e);
  j["event_id"] = -3;
  CHECK_THROWS_AS(event_from_json(j), InvalidEvent);

  WorkEvent bad = e;
  bad.timestamp_ms = -1;
  CHECK_THROWS_AS(validate_event(bad), InvalidEvent);
  bad = e;
  bad.session_id = "../etc";
  CHECK_THROWS_AS(validate_event(bad), InvalidEvent);
  bad = e;
  bad.product_serial.clear();
  CHECK_THROWS_AS(validate_event(bad), InvalidEvent);

  for (int k = 0; k <= static_cast<int>(EventKind::SessionEnd); ++k) {
    const auto kind = static_cast<EventKind>(k);
    CHECK(event_kind_from_string(to_string(kind)) == kind);
  }
}

TEST_CASE("append: ack, idempotent duplicate, gap") {
  TempDir dir;
  EventStore store(dir.path());
  auto w = three_step_session("sess-1", "cell-1", "SN-1", 1000, {2000, 2001, 1999, 2000});
  const auto& ev = w;

  CHECK(store.append(ev[0]) == AppendStatus::Stored);
  CHECK(store.append(ev[0]) == AppendStatus::Duplicate);
  CHECK(store.events("sess-1").size() == 1);

  CHECK(store.append(ev[1]) == AppendStatus::Stored);
  CHECK(store.append(ev[2]) == AppendStatus::Stored);
  try {
    store.append(ev[4]);
    FAIL("gap accepted");
  } catch (const GapDetected& g) {
    CHECK(g.expected_event_id() == 4);
    CHECK(g.received_event_id() == 5);
  }
  CHECK(store.last_event_id("sess-1") == 3);

  WorkEvent conflicting = ev[2];
  conflicting.payload["score"] = 0.1;
  CHECK_THROWS_AS(store.append(conflicting), EventConflict);

  WorkEvent orphan = ev[3];
  orphan.session_id = "unknown";
  CHECK_THROWS_AS(store.append(orphan), GapDetected);
}

TEST_CASE("append: ordering and identity invariants") {
  TempDir dir;
  EventStore store(dir.path());
  auto ev = three_step_session("sess-1", "cell-1", "SN-1", 1000, {2000});
  store.append(ev[0]);

  WorkEvent e = ev[1];
  e.timestamp_ms = ev[0].timestamp_ms - 1;
  CHECK_THROWS_AS(store.append(e), InvalidEvent);
  e = ev[1];
  e.workcell_id = "cell-2";
  CHECK_THROWS_AS(store.append(e), InvalidEvent);
  e = ev[1];
  e.product_serial = "SN-2";
  CHECK_THROWS_AS(store.append(e), InvalidEvent);
  e = ev[1];
  e.kind = EventKind::SessionBegin;
  CHECK_THROWS_AS(store.append(e), InvalidEvent);

  WorkEvent not_begin = ev[1];
  not_begin.session_id = "sess-2";
  not_begin.event_id = 1;
  CHECK_THROWS_AS(store.append(not_begin), InvalidEvent);

  for (std::size_t i = 1; i < ev.size(); ++i) REQUIRE(store.append(ev[i]) == AppendStatus::Stored);
  WorkEvent late = ev.back();
  late.event_id += 1;
  late.kind = EventKind::OperatorAction;
  CHECK_THROWS_AS(store.append(late), InvalidEvent);
}

TEST_CASE("durability: events survive reopening, torn tails are trimmed") {
  TempDir dir;
  auto ev = three_step_session("sess-1", "cell-1", "SN-1", 1000, {2000, 2010});
  {
    EventStore store(dir.path());
    for (std::size_t i = 0; i < 5; ++i) store.append(ev[i]);
  }
  {
    std::ofstream torn(dir.path() / "sessions" / "sess-1.jsonl", std::ios::app);
    torn << R"({"event_id":6,"sess)";
  }
  EventStore reopened(dir.path());
  CHECK(reopened.last_event_id("sess-1") == 5);
  const auto stored = reopened.events("sess-1");
  CHECK(stored == std::vector<WorkEvent>(ev.begin(), ev.begin() + 5));
  CHECK(reopened.append(ev[5]) == AppendStatus::Stored);
  CHECK(reopened.append(ev[2]) == AppendStatus::Duplicate);
  CHECK(reopened.sessions_for_serial("SN-1") == std::vector<std::string>{"sess-1"});
}

TEST_CASE("the serial index is rebuilt from session logs") {
  TempDir dir;
  {
    EventStore store(dir.path());
    store.append(simple_begin("a"));
    store.append(simple_begin("b"));
  }
  std::filesystem::remove(dir.path() / "index.jsonl");
  {
    EventStore store(dir.path());
    auto ids = store.sessions_for_serial("SN-1");
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<std::string>{"a", "b"});
  }
  CHECK(std::filesystem::file_size(dir.path() / "index.jsonl") > 0);
}

TEST_CASE("concurrent appends to distinct sessions; readers see a prefix") {
  TempDir dir;
  EventStore store(dir.path());
  constexpr int kSessions = 6;
  std::vector<std::vector<WorkEvent>> all;
  for (int s = 0; s < kSessions; ++s) {
    all.push_back(three_step_session("sess-" + std::to_string(s), "cell", "SN-C", 100 * s,
                                     {2000, 2000, 2000, 2000}));
  }
  std::atomic<bool> done{false};
  std::atomic<int> bad_prefix{0};
  std::thread reader([&] {
    while (!done) {
      for (int s = 0; s < kSessions; ++s) {
        const auto got = store.events("sess-" + std::to_string(s));
        for (std::size_t i = 0; i < got.size(); ++i) {
          if (!(got[i] == all[s][i])) ++bad_prefix;
        }
      }
    }
  });
  std::vector<std::thread> writers;
  for (int s = 0; s < kSessions; ++s) {
    writers.emplace_back([&, s] {
      for (const auto& e : all[s]) store.append(e);
    });
  }
  for (auto& t : writers) t.join();
  done = true;
  reader.join();
  CHECK(bad_prefix == 0);
  for (int s = 0; s < kSessions; ++s) CHECK(store.events("sess-" + std::to_string(s)) == all[s]);
}

TEST_CASE("passport: empty, single session, torques match events exactly") {
  TempDir dir;
  EventStore store(dir.path());
  CHECK(build_passport(store, "SN-X").sessions.empty());

  const std::vector<std::int64_t> torques = {2003, 1987, 2011, 1996};
  const auto ev = three_step_session("sess-1", "cell-1", "SN-1", 5000, torques);
  for (const auto& e : ev) store.append(e);
  const auto p = build_passport(store, "SN-1");
  REQUIRE(p.sessions.size() == 1);
  const auto& s = p.sessions[0];
  CHECK(s.outcome == "complete");
  CHECK(s.started_ms == 5000);
  REQUIRE(s.steps.size() == 3);
  CHECK(s.steps[0].step_id == "s1");
  CHECK(s.steps[1].step_id == "s2");
  CHECK(s.steps[2].step_id == "s3");
  for (const auto& st : s.steps) {
    CHECK(st.status == "Passed");
    CHECK(st.attempts == 1);
  }
  CHECK(s.steps[0].active_ms == 260);
  CHECK(s.steps[2].active_ms == 1010);

  std::vector<std::int64_t> from_events;
  for (const auto& e : ev) {
    if (e.kind == EventKind::TorqueResult) from_events.push_back(e.payload["final_torque_mnm"]);
  }
  std::vector<std::int64_t> in_passport;
  for (const auto& t : s.steps[1].torques) in_passport.push_back(t.final_torque_mnm);
  CHECK(in_passport == from_events);
  CHECK(in_passport == torques);
  REQUIRE(s.steps[0].detections.size() == 1);
  CHECK(s.steps[0].detections[0].score == 0.97);

  const Json j = to_json(p);
  CHECK(j["sessions"][0]["steps"][1]["torques"].size() == 4);
  CHECK(format_passport(p).find("fastener 4 torque 1.996 Nm") != std::string::npos);
}

TEST_CASE("passport: a failed step and a halted session") {
  SessionWriter w("sess-f", "cell", "SN-F", 0);
  w.next(EventKind::SessionBegin, begin_payload({{"a", "inspect"}, {"b", "confirm"}}), 0);
  for (int attempt = 1; attempt <= 4; ++attempt) {
    w.next(EventKind::StepStart, {{"step_id", "a"}, {"attempt", attempt}});
    w.next(EventKind::AlarmRaised, {{"step_id", "a"}, {"reason", "misplaced"}});
    w.next(EventKind::StepResult, {{"step_id", "a"},
                                   {"attempt", attempt},
                                   {"outcome", "failed"},
                                   {"status_after", attempt == 4 ? "Failed" : "Pending"},
                                   {"reason", "misplaced"}});
  }
  w.next(EventKind::SessionEnd, {{"outcome", "halted"}, {"failed_step_id", "a"}});
  const auto s = fold_session(w.events());
  CHECK(s.outcome == "halted");
  CHECK(s.alarms == 4);
  CHECK(s.steps[0].status == "Failed");
  CHECK(s.steps[0].attempts == 4);
  CHECK(s.steps[0].reason == std::optional<std::string>("misplaced"));
  CHECK(s.steps[1].status == "Pending");
  CHECK(s.steps[1].attempts == 0);
}

TEST_CASE("passport is independent of arrival order across sessions") {
  std::mt19937_64 rng(21);
  std::vector<std::vector<WorkEvent>> sessions;
  for (int i = 0; i < 8; ++i) {
    sessions.push_back(three_step_session("s" + std::to_string(i), "cell-" + std::to_string(i % 3),
                                          "SN-P", static_cast<std::int64_t>(rng() % 5) * 1000,
                                          {2000 + i, 1990}));
  }
  TempDir ref_dir;
  EventStore ref_store(ref_dir.path());
  for (const auto& s : sessions) {
    for (const auto& e : s) ref_store.append(e);
  }
  const auto reference = build_passport(ref_store, "SN-P");
  REQUIRE(reference.sessions.size() == 8);
  for (std::size_t i = 1; i < reference.sessions.size(); ++i) {
    const auto& a = reference.sessions[i - 1];
    const auto& b = reference.sessions[i];
    CHECK((a.started_ms < b.started_ms ||
           (a.started_ms == b.started_ms && a.session_id < b.session_id)));
  }

  for (int trial = 0; trial < 10; ++trial) {
    // Interleave sessions randomly while keeping each session in order.
    std::vector<std::size_t> cursor(sessions.size(), 0);
    TempDir dir;
    EventStore store(dir.path());
    std::size_t remaining = 0;
    for (const auto& s : sessions) remaining += s.size();
    while (remaining > 0) {
      const std::size_t k = rng() % sessions.size();
      if (cursor[k] == sessions[k].size()) continue;
      store.append(sessions[k][cursor[k]++]);
      --remaining;
    }
    CHECK(build_passport(store, "SN-P") == reference);
    CHECK(to_json(build_passport(store, "SN-P")) == to_json(reference));
  }
}

TEST_CASE("retention: examples") {
  TempDir dir;
  EventStore store(dir.path());
  for (const auto& e : three_step_session("sess-1", "cell-1", "SN-1", 0, {2000})) store.append(e);
  const std::int64_t now = 1000 * kMsPerDay;
  const std::vector<std::uint8_t> bytes(64, 7);
  store.add_media("video-old", "sess-1", MediaKind::VideoSegment, now - 200 * kMsPerDay, bytes);
  store.add_media("video-new", "sess-1", MediaKind::VideoSegment, now - 10 * kMsPerDay, bytes);
  store.add_media("frame-old", "sess-1", MediaKind::KeyFrame, now - 400 * kMsPerDay, bytes);
  CHECK(std::filesystem::exists(dir.path() / "media" / "video-old"));

  const auto events_before = store.events("sess-1");
  const auto pruned = store.retention_sweep(now);
  REQUIRE(pruned.size() == 1);
  CHECK(pruned[0].artifact_id == "video-old");
  CHECK_FALSE(std::filesystem::exists(dir.path() / "media" / "video-old"));
  CHECK(std::filesystem::exists(dir.path() / "media" / "frame-old"));
  CHECK(store.find_media("frame-old").has_value());
  CHECK(store.find_media("video-new").has_value());
  CHECK(store.retention_sweep(now).empty());
  CHECK(store.events("sess-1") == events_before);

  EventStore reopened(dir.path());
  CHECK(reopened.media().size() == 2);
  CHECK_FALSE(reopened.find_media("video-old").has_value());

  CHECK_THROWS_AS(store.retention_sweep(now, 184), std::invalid_argument);
  CHECK_THROWS_AS(store.retention_sweep(now, -1), std::invalid_argument);
  CHECK_THROWS_AS(store.add_media("../x", "sess-1", MediaKind::KeyFrame, 0, bytes), InvalidEvent);
  CHECK(store.add_media("frame-old", "sess-1", MediaKind::KeyFrame, now - 400 * kMsPerDay, bytes) ==
        *store.find_media("frame-old"));
  CHECK_THROWS_AS(store.add_media("frame-old", "sess-1", MediaKind::KeyFrame, 5, bytes),
                  EventConflict);
}

TEST_CASE("retention never touches events or keyframes (randomized ages)") {
  std::mt19937_64 rng(183);
  for (int trial = 0; trial < 20; ++trial) {
    TempDir dir;
    EventStore store(dir.path());
    const auto ev = three_step_session("s", "c", "SN", 0, {2000});
    for (const auto& e : ev) store.append(e);
    const std::int64_t now = 2000 * kMsPerDay;
    const int horizon = static_cast<int>(rng() % 184);
    std::vector<MediaArtifact> all;
    for (int i = 0; i < 30; ++i) {
      const auto kind = rng() % 2 ? MediaKind::KeyFrame : MediaKind::VideoSegment;
      const std::int64_t age = static_cast<std::int64_t>(rng() % (500 * kMsPerDay));
      all.push_back(store.add_media("m" + std::to_string(i), "s", kind, now - age, {1, 2, 3}));
    }
    const auto pruned = store.retention_sweep(now, horizon);
    const std::int64_t cutoff = now - horizon * kMsPerDay;
    for (const auto& a : all) {
      const bool expect_pruned = a.kind == MediaKind::VideoSegment && a.captured_at_ms < cutoff;
      const bool was_pruned = std::any_of(pruned.begin(), pruned.end(), [&](const auto& p) {
        return p.artifact_id == a.artifact_id;
      });
      CHECK(expect_pruned == was_pruned);
      CHECK(store.find_media(a.artifact_id).has_value() == !expect_pruned);
    }
    CHECK(store.events("s") == ev);
    CHECK(store.retention_sweep(now, horizon).empty());
  }
}

TEST_CASE("collector over HTTP") {
  TempDir dir;
  EventStore store(dir.path());
  Collector collector(store);
  const int port = collector.bind("127.0.0.1", 0);
  collector.start();
  httplib::Client client("127.0.0.1", port);

  const auto ev = three_step_session("sess-h", "cell-1", "SN-H", 100, {2000, 2000});
  auto post = [&](const WorkEvent& e) {
    return client.Post("/events", to_json_line(e), "application/json");
  };

  auto r = post(ev[0]);
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(Json::parse(r->body)["status"] == "stored");
  r = post(ev[0]);
  CHECK(r->status == 200);
  CHECK(Json::parse(r->body)["status"] == "duplicate");

  WorkEvent negative = ev[1];
  negative.timestamp_ms = -5;
  r = post(negative);
  CHECK(r->status == 400);
  r = client.Post("/events", "not json", "application/json");
  CHECK(r->status == 400);

  r = post(ev[3]);
  CHECK(r->status == 409);
  CHECK(Json::parse(r->body)["expected_event_id"] == 2);

  for (std::size_t i = 1; i < ev.size(); ++i) REQUIRE(post(ev[i])->status == 200);

  r = client.Get("/events/sess-h");
  REQUIRE(r->status == 200);
  CHECK(Json::parse(r->body).size() == ev.size());
  CHECK(client.Get("/events/nope")->status == 404);

  r = client.Get("/passport/SN-H");
  REQUIRE(r->status == 200);
  CHECK(Json::parse(r->body) == to_json(build_passport(store, "SN-H")));
  r = client.Get("/passport/SN-none");
  CHECK(Json::parse(r->body)["sessions"].empty());

  r = client.Post("/media?artifact_id=v1&session_id=sess-h&kind=video_segment&captured_at_ms=0",
                  "xyz", "application/octet-stream");
  CHECK(r->status == 200);
  CHECK(client.Post("/media?artifact_id=v2", "x", "application/octet-stream")->status == 400);
  r = client.Post("/retention/sweep?now_ms=" + std::to_string(200 * kMsPerDay), "", "text/plain");
  REQUIRE(r->status == 200);
  CHECK(Json::parse(r->body).size() == 1);

  collector.stop();
}

TEST_CASE("collector: merges sessions from two workcells chronologically") {
  TempDir dir;
  EventStore store(dir.path());
  Collector collector(store);
  const int port = collector.bind("127.0.0.1", 0);
  collector.start();

  const auto late = three_step_session("sess-b", "cell-B", "SN-M", 90'000, {1900});
  const auto early = three_step_session("sess-a", "cell-A", "SN-M", 10'000, {2100});
  std::thread cell_b([&] {
    httplib::Client c("127.0.0.1", port);
    for (const auto& e : late) c.Post("/events", to_json_line(e), "application/json");
  });
  std::thread cell_a([&] {
    httplib::Client c("127.0.0.1", port);
    for (const auto& e : early) c.Post("/events", to_json_line(e), "application/json");
  });
  cell_a.join();
  cell_b.join();

  httplib::Client client("127.0.0.1", port);
  const Json p = Json::parse(client.Get("/passport/SN-M")->body);
  REQUIRE(p["sessions"].size() == 2);
  CHECK(p["sessions"][0]["workcell_id"] == "cell-A");
  CHECK(p["sessions"][1]["workcell_id"] == "cell-B");
  collector.stop();
}

TEST_CASE("collector reports a port already in use") {
  TempDir dir;
  EventStore store(dir.path());
  Collector first(store);
  const int port = first.bind("127.0.0.1", 0);
  first.start();
  Collector second(store);
  CHECK_THROWS_AS(second.bind("127.0.0.1", port), ListenError);
  first.stop();
}
