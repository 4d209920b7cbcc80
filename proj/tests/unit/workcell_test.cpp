#include <doctest.h>

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "asmctl/logbook/store.hpp"
#include "asmctl/vision/pgm.hpp"
#include "asmctl/workcell/config.hpp"
#include "asmctl/workcell/event_sink.hpp"
#include "asmctl/workcell/operator_api.hpp"
#include "asmctl/workcell/scene_source.hpp"
#include "asmctl/workcell/tool_link.hpp"
#include "asmctl/workcell/workcell.hpp"
#include "support/temp_dir.hpp"

using namespace asmctl;
using namespace asmctl::workcell;
using asmctl::logbook::EventKind;
using asmctl::logbook::WorkEvent;
using asmctl::testing::TempDir;

namespace {

constexpr const char* kCellN1 = R"(workcell N1
tool yes
light yes
retry_cap 3
min_score 0.8
tolerance 20
camera cam0
  resolution_mp = 8
  fov_deg = 100
  focal_px = 260
  k1 = -0.04
  frame = 320x240
)";

constexpr const char* kThreeSteps = R"(procedure P-3
product panel
revision 1
step S1 install
  element = EL-1
  template = T-1
  region = 60,50,24,24
step S2 tighten
  fasteners = 4
  torque = 2.0
step S3 confirm
  prompt = Check harness routing
)";

// Blocky binary pattern; distinct per seed.
vision::Template block_template(const std::string& id, std::uint64_t seed, int size = 24) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(0.5);
  vision::GrayImage img(size, size);
  const int cells = size / 4;
  std::vector<double> level(cells * cells);
  for (auto& v : level) v = bit(rng) ? 0.9 : 0.1;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) img.set(x, y, level[(y / 4) * cells + (x / 4)]);
  }
  return vision::Template(id, std::move(img));
}

vision::TemplateLibrary library() {
  vision::TemplateLibrary lib;
  lib.add(block_template("T-1", 101));
  lib.add(block_template("T-2", 202));
  return lib;
}

wireproto::ToolProfile tool_profile(std::uint64_t seed = 5) {
  wireproto::ToolProfile p;
  p.tool.seed = seed;
  return p;
}

// A workcell with a simulated scene and tool, logging into memory.
struct Rig {
  explicit Rig(const char* config = kCellN1, std::uint64_t seed = 7)
      : scene(seed, 0.02), tool(tool_profile()),
        cell(parse_config(config), library(), scene, sink, &tool, clock) {}

  SimScene scene;
  MemorySink sink;
  SimulatedToolLink tool;
  SimClock clock;
  Workcell cell;
};

std::vector<EventKind> kinds(const std::vector<WorkEvent>& events) {
  std::vector<EventKind> out;
  for (const auto& e : events) out.push_back(e.kind);
  return out;
}

std::vector<WorkEvent> of_kind(const std::vector<WorkEvent>& events, EventKind kind) {
  std::vector<WorkEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [&](const WorkEvent& e) { return e.kind == kind; });
  return out;
}

std::vector<std::string> json_lines(const std::vector<WorkEvent>& events) {
  std::vector<std::string> out;
  for (const auto& e : events) out.push_back(logbook::to_json_line(e));
  return out;
}

template <typename Pred>
bool wait_for(Pred pred, std::chrono::milliseconds limit = std::chrono::seconds(10)) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return pred();
}

// Logbook that can be switched off.
class FlakySink : public EventSink {
 public:
  void emit(const WorkEvent& e) override {
    if (!online) throw LogbookUnreachable("offline");
    inner.emit(e);
  }
  void put_media(const MediaUpload& m) override {
    if (!online) throw LogbookUnreachable("offline");
    inner.put_media(m);
  }
  bool online = true;
  MemorySink inner;
};

std::string camera_block(const std::string& id, int fov) {
  return "camera " + id + "\n  resolution_mp = 2\n  fov_deg = " + std::to_string(fov) +
         "\n  frame = 320x240\n";
}

}  // namespace

TEST_CASE("config file round trip of fields") {
  const auto cfg = parse_config(kCellN1);
  CHECK(cfg.workcell_id == "N1");
  CHECK(cfg.has_tool);
  CHECK(cfg.has_light);
  REQUIRE(cfg.cameras.size() == 1);
  const auto& cam = cfg.cameras[0];
  CHECK(cam.fov_deg == 100.0);
  CHECK(cam.frame_width == 320);
  CHECK(cam.frame_height == 240);
  CHECK(cam.model.focal_px == 260.0);
  CHECK(cam.model.cx == doctest::Approx(159.5));
  CHECK(cam.model.cy == doctest::Approx(119.5));
  CHECK(cam.model.k1 == -0.04);
  CHECK_THROWS_AS(parse_config("tool yes\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("workcell A\nbogus 1\n"), SyntaxError);
  CHECK_THROWS_AS(parse_config("workcell A\n" + camera_block("c", 90) + camera_block("c", 90)),
                  ConfigError);
}

TEST_CASE("equipment table rows validate against matching scripts") {
  const std::string inspect_only =
      "procedure W\nproduct kit\nrevision 1\nstep I1 inspect\n  template = T-1\n"
      "  region = 10,10,24,24\n";
  const std::string with_tighten = kThreeSteps;

  const std::string warehouse = "workcell warehouse\ntool no\nlight yes\n" + camera_block("c0", 90);
  std::string three_cams;
  for (int i = 0; i < 3; ++i) three_cams += camera_block("c" + std::to_string(i), 100);
  const std::string n1 = "workcell N1\ntool yes\nlight yes\n" + three_cams;
  const std::string n2 = "workcell N2\ntool yes\nlight yes\n" + three_cams;
  const std::string n3 = "workcell N3\ntool yes\nlight yes\n" + camera_block("c0", 95);

  const auto lib = library();
  const auto warehouse_cfg = parse_config(warehouse);
  CHECK(warehouse_cfg.cameras.size() == 1);
  CHECK_FALSE(warehouse_cfg.has_tool);
  CHECK(warehouse_cfg.has_light);
  CHECK(validate_config(warehouse_cfg, procedure::parse_procedure(inspect_only), &lib).empty());
  for (const auto& text : {n1, n2, n3}) {
    const auto cfg = parse_config(text);
    CHECK(cfg.has_tool);
    CHECK(validate_config(cfg, procedure::parse_procedure(with_tighten), &lib).empty());
  }
  CHECK(parse_config(n1).cameras.size() == 3);
  CHECK(parse_config(n3).cameras.size() == 1);

  const auto bad = validate_config(warehouse_cfg, procedure::parse_procedure(with_tighten), &lib);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].code == "tighten_without_tool");
  CHECK(bad[0].step_id == "S2");

  const auto no_camera = validate_config(parse_config("workcell X\ntool yes\n"),
                                         procedure::parse_procedure(inspect_only), &lib);
  REQUIRE(no_camera.size() == 1);
  CHECK(no_camera[0].code == "vision_without_camera");
}

TEST_CASE("equipment checks on cameras and templates") {
  const auto lib = library();
  auto script = [](const std::string& body) {
    return procedure::parse_procedure("procedure P\nproduct X\nrevision 1\n" + body);
  };
  auto codes = [&](const std::string& cfg, const std::string& body) {
    std::vector<std::string> out;
    for (const auto& v : validate_config(parse_config(cfg), script(body), &lib)) {
      out.push_back(v.code);
    }
    return out;
  };
  const std::string narrow = "workcell X\n" + camera_block("c0", 60);
  CHECK(codes(narrow, "step A inspect\n  template = T-1\n  region = 0,0,24,24\n") ==
        std::vector<std::string>{"narrow_camera"});
  CHECK(codes(narrow, "step A confirm\n  prompt = ok\n").empty());

  const std::string ok = "workcell X\n" + camera_block("c0", 90);
  CHECK(codes(ok, "step A inspect\n  template = T-9\n  region = 0,0,24,24\n") ==
        std::vector<std::string>{"unknown_template"});
  CHECK(codes(ok, "step A inspect\n  template = T-1\n  region = 0,0,24,24\n  camera = c7\n") ==
        std::vector<std::string>{"unknown_camera"});
  CHECK(codes(ok, "step A inspect\n  template = T-1\n  region = 300,0,24,24\n") ==
        std::vector<std::string>{"region_outside_frame"});
  // Without a library the template checks are skipped.
  CHECK(validate_config(parse_config(ok),
                        script("step A inspect\n  template = T-9\n  region = 0,0,24,24\n"))
            .empty());
}

TEST_CASE("happy path session emits begin, step pairs and end in order") {
  Rig rig;
  const auto script = procedure::parse_procedure(kThreeSteps);
  const Session s = rig.cell.run_session(script, "SN-001");

  CHECK(s.phase == SessionPhase::Complete);
  REQUIRE(s.ended_at_ms.has_value());
  CHECK(*s.ended_at_ms >= s.started_at_ms);
  for (const auto& st : s.states) CHECK(st.status == procedure::StepStatus::Passed);

  const auto events = rig.sink.events();
  std::vector<EventKind> skeleton;
  for (auto k : kinds(events)) {
    if (k == EventKind::SessionBegin || k == EventKind::StepStart ||
        k == EventKind::StepResult || k == EventKind::SessionEnd) {
      skeleton.push_back(k);
    }
  }
  CHECK(skeleton == std::vector<EventKind>{EventKind::SessionBegin, EventKind::StepStart,
                                           EventKind::StepResult, EventKind::StepStart,
                                           EventKind::StepResult, EventKind::StepStart,
                                           EventKind::StepResult, EventKind::SessionEnd});
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(events[i].event_id == i + 1);
    CHECK(events[i].session_id == s.session_id);
    if (i > 0) CHECK(events[i].timestamp_ms >= events[i - 1].timestamp_ms);
  }
  CHECK(rig.sink.events() == rig.cell.session_events());

  const auto detections = of_kind(events, EventKind::Detection);
  REQUIRE(detections.size() == 1);
  CHECK(detections[0].payload.at("score").get<double>() >= 0.9);
  CHECK(detections[0].payload.at("verdict") == "correct");
  REQUIRE(detections[0].media_ref.has_value());
  REQUIRE(rig.sink.media().size() == 1);
  CHECK(rig.sink.media()[0].artifact_id == *detections[0].media_ref);

  const auto torques = of_kind(events, EventKind::TorqueResult);
  REQUIRE(torques.size() == 4);
  for (int i = 0; i < 4; ++i) {
    const auto& p = torques[i].payload;
    CHECK(p.at("fastener").get<int>() == i + 1);
    CHECK(p.at("status") == "completed");
    CHECK(std::abs(p.at("final_torque_mnm").get<double>() - 2000.0) <= 500.0);
    CHECK(p.at("within_band").get<bool>());
  }
  CHECK(of_kind(events, EventKind::OperatorAction).size() == 1);
  CHECK(of_kind(events, EventKind::AlarmRaised).empty());
  CHECK(rig.cell.light() == LightState::Idle);
  CHECK(replay_states(script, events) == s.states);
}

TEST_CASE("element 50 px off the region fails, raises the alarm and halts after the retries") {
  Rig rig;
  rig.scene.perturb("S1", {50.0, 0.0, false, 0});
  const auto script = procedure::parse_procedure(kThreeSteps);
  const Session s = rig.cell.run_session(script, "SN-002");

  CHECK(s.phase == SessionPhase::Halted);
  CHECK(s.failed_step_id == "S1");
  REQUIRE(s.ended_at_ms.has_value());
  CHECK(s.states[0].status == procedure::StepStatus::Failed);
  CHECK(s.states[0].attempts == 4);
  CHECK(s.states[1].status == procedure::StepStatus::Pending);
  CHECK(rig.cell.light() == LightState::Alarm);

  const auto events = rig.sink.events();
  const auto detections = of_kind(events, EventKind::Detection);
  REQUIRE(detections.size() == 4);
  for (const auto& d : detections) {
    CHECK(d.payload.at("verdict") == "misplaced");
    CHECK(d.payload.at("offset_px").get<double>() == doctest::Approx(50.0).epsilon(0.06));
  }
  const auto results = of_kind(events, EventKind::StepResult);
  REQUIRE(results.size() == 4);
  for (const auto& r : results) CHECK(r.payload.at("reason") == "misplaced");
  CHECK(of_kind(events, EventKind::AlarmRaised).size() == 4);
  CHECK(of_kind(events, EventKind::TorqueResult).empty());
  CHECK(events.back().kind == EventKind::SessionEnd);
  CHECK(events.back().payload.at("outcome") == "halted");
  CHECK(replay_states(script, events) == s.states);

  // After the session the acknowledgement clears the light without an event.
  CHECK(rig.cell.acknowledge_alarm());
  CHECK(rig.cell.light() == LightState::Idle);
  CHECK_FALSE(rig.cell.acknowledge_alarm());
  CHECK(rig.cell.session_events().size() == events.size());
}

TEST_CASE("a single misplaced attempt is retried and the session completes") {
  Rig rig;
  rig.scene.perturb("S1", {0.0, 45.0, false, 1});
  const auto script = procedure::parse_procedure(kThreeSteps);
  const Session s = rig.cell.run_session(script, "SN-003");
  CHECK(s.phase == SessionPhase::Complete);
  CHECK(s.states[0].attempts == 2);
  const auto events = rig.sink.events();
  CHECK(of_kind(events, EventKind::AlarmRaised).size() == 1);
  CHECK(replay_states(script, events) == s.states);
}

TEST_CASE("absent element is reported as not found") {
  Rig rig;
  rig.scene.perturb("S1", {0.0, 0.0, true, 0});
  const Session s = rig.cell.run_session(procedure::parse_procedure(kThreeSteps), "SN-004");
  CHECK(s.phase == SessionPhase::Halted);
  const auto results = of_kind(rig.sink.events(), EventKind::StepResult);
  REQUIRE_FALSE(results.empty());
  CHECK(results[0].payload.at("reason") == "not_found");
}

TEST_CASE("tool failures mark the tighten step failed with a reason") {
  const std::string low =
      "procedure P\nproduct X\nrevision 1\nstep T tighten\n  fasteners = 2\n  torque = 0.05\n";
  Rig rig;
  const Session s = rig.cell.run_session(procedure::parse_procedure(low), "SN-005");
  CHECK(s.phase == SessionPhase::Halted);
  const auto results = of_kind(rig.sink.events(), EventKind::StepResult);
  REQUIRE(results.size() == 4);
  CHECK(results[0].payload.at("reason") == "tool_rejected");

  SimScene scene(7, 0.02);
  MemorySink sink;
  SimClock clock;
  TcpToolLink dead("127.0.0.1", 1, std::chrono::milliseconds(200));
  Workcell cell(parse_config(kCellN1), library(), scene, sink, &dead, clock);
  const Session s2 = cell.run_session(procedure::parse_procedure(low), "SN-006");
  CHECK(s2.phase == SessionPhase::Halted);
  const auto r2 = of_kind(sink.events(), EventKind::StepResult);
  REQUIRE_FALSE(r2.empty());
  CHECK(r2[0].payload.at("reason") == "tool_unreachable");
}

TEST_CASE("preconditions reject a session before any event") {
  Rig rig;
  const auto script = procedure::parse_procedure(kThreeSteps);
  CHECK_THROWS_AS(rig.cell.run_session(script, ""), SessionRejected);
  MemorySink sink;
  SimScene scene(7, 0.02);
  SimClock clock;
  Workcell no_tool(parse_config("workcell W\ntool no\n" + camera_block("c0", 90)), library(),
                   scene, sink, nullptr, clock);
  try {
    no_tool.run_session(script, "SN");
    FAIL("expected SessionRejected");
  } catch (const SessionRejected& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].code == "tighten_without_tool");
  }
  CHECK(rig.sink.events().empty());
  CHECK(sink.events().empty());
}

TEST_CASE("identical inputs give identical event logs") {
  const auto script = procedure::parse_procedure(kThreeSteps);
  std::vector<std::string> first;
  for (int run = 0; run < 2; ++run) {
    Rig rig;
    rig.cell.run_session(script, "SN-010", RunOptions{});
    const auto lines = json_lines(rig.sink.events());
    if (run == 0) {
      first = lines;
    } else {
      CHECK(lines == first);
    }
  }
  Rig other_seed;
  RunOptions opts;
  opts.seed = 8;
  other_seed.cell.run_session(script, "SN-010", opts);
  CHECK(json_lines(other_seed.sink.events()) != first);
}

TEST_CASE("session ids are uuid shaped and depend on the identity") {
  const auto id = make_session_id(7, "N1", "SN-1");
  REQUIRE(id.size() == 36);
  CHECK(id[8] == '-');
  CHECK(id[14] == '4');
  CHECK(id == make_session_id(7, "N1", "SN-1"));
  CHECK(id != make_session_id(7, "N1", "SN-2"));
  CHECK(id != make_session_id(8, "N1", "SN-1"));
}

TEST_CASE("events spool during a logbook outage and flush afterwards") {
  TempDir dir;
  FlakySink logbook;
  logbook.online = false;
  const auto script = procedure::parse_procedure(kThreeSteps);
  std::size_t total = 0;
  {
    SpoolingSink spool(logbook, dir.path());
    SimScene scene(7, 0.02);
    SimulatedToolLink tool(tool_profile());
    SimClock clock;
    Workcell cell(parse_config(kCellN1), library(), scene, spool, &tool, clock);
    const Session s = cell.run_session(script, "SN-020");
    CHECK(s.phase == SessionPhase::Complete);
    total = cell.session_events().size();
    CHECK(spool.pending() == total);
    CHECK_FALSE(spool.flush());
  }
  // The queue survives a restart of the workcell process.
  SpoolingSink reopened(logbook, dir.path());
  CHECK(reopened.pending() == total);
  logbook.online = true;
  CHECK(reopened.flush());
  CHECK(reopened.pending() == 0);
  const auto delivered = logbook.inner.events();
  REQUIRE(delivered.size() == total);
  for (std::size_t i = 0; i < total; ++i) CHECK(delivered[i].event_id == i + 1);
}

TEST_CASE("spooled events reach a store and survive duplicates on replay") {
  TempDir dir;
  logbook::EventStore store(dir / "store");
  StoreSink store_sink(store);
  FlakySink flaky;
  SpoolingSink spool(store_sink, dir / "spool");
  Rig rig;
  rig.cell.run_session(procedure::parse_procedure(kThreeSteps), "SN-021");
  const auto events = rig.sink.events();
  // Replaying a prefix twice is harmless.
  for (std::size_t i = 0; i < 3; ++i) store_sink.emit(events[i]);
  for (const auto& e : events) spool.emit(e);
  CHECK(spool.pending() == 0);
  CHECK(store.events(events[0].session_id) == events);
}

TEST_CASE("confirm is idempotent and only accepted for the awaiting step") {
  Rig rig;
  const auto script = procedure::parse_procedure(kThreeSteps);
  CHECK(rig.cell.confirm("S3") == ConfirmStatus::NoSession);
  RunOptions opts;
  opts.headless = false;
  opts.confirm_timeout = std::chrono::seconds(20);
  std::optional<Session> result;
  std::thread runner([&] { result = rig.cell.run_session(script, "SN-030", opts); });

  REQUIRE(wait_for([&] {
    return rig.cell.snapshot_json()["session"]["awaiting_confirm"] == "S3";
  }));
  CHECK(rig.cell.light() == LightState::Attention);
  CHECK(rig.cell.confirm("S9") == ConfirmStatus::UnknownStep);
  CHECK(rig.cell.confirm("S1") == ConfirmStatus::NotActive);
  CHECK(rig.cell.confirm("S3") == ConfirmStatus::Accepted);
  CHECK(rig.cell.confirm("S3") == ConfirmStatus::AlreadyConfirmed);
  runner.join();
  REQUIRE(result.has_value());
  CHECK(result->phase == SessionPhase::Complete);
  CHECK(rig.cell.confirm("S3") == ConfirmStatus::AlreadyConfirmed);
  const auto actions = of_kind(rig.sink.events(), EventKind::OperatorAction);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].payload.at("source") == "operator");
}

TEST_CASE("with an operator present the retry waits for the alarm acknowledgement") {
  Rig rig;
  rig.scene.perturb("S1", {50.0, 0.0, false, 1});
  const auto script = procedure::parse_procedure(kThreeSteps);
  RunOptions opts;
  opts.headless = false;
  opts.confirm_timeout = std::chrono::seconds(20);
  std::thread runner([&] { rig.cell.run_session(script, "SN-031", opts); });

  REQUIRE(wait_for([&] { return rig.cell.light() == LightState::Alarm; }));
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  CHECK(of_kind(rig.cell.session_events(), EventKind::StepStart).size() == 1);
  CHECK(rig.cell.acknowledge_alarm("panel"));
  CHECK_FALSE(rig.cell.acknowledge_alarm());

  REQUIRE(wait_for([&] {
    return rig.cell.snapshot_json()["session"]["awaiting_confirm"] == "S3";
  }));
  CHECK(rig.cell.confirm("S3") == ConfirmStatus::Accepted);
  runner.join();

  const auto events = rig.cell.session_events();
  const auto acks = of_kind(events, EventKind::AlarmAcked);
  REQUIRE(acks.size() == 1);
  CHECK(acks[0].payload.at("step_id") == "S1");
  CHECK(acks[0].payload.at("source") == "panel");
  CHECK(rig.cell.session()->phase == SessionPhase::Complete);
  CHECK(replay_states(script, events) == rig.cell.session()->states);
}

TEST_CASE("abort halts a session waiting for the operator") {
  Rig rig;
  const auto script = procedure::parse_procedure(kThreeSteps);
  RunOptions opts;
  opts.headless = false;
  std::optional<Session> result;
  std::thread runner([&] { result = rig.cell.run_session(script, "SN-032", opts); });
  REQUIRE(wait_for([&] {
    return rig.cell.snapshot_json()["session"]["awaiting_confirm"] == "S3";
  }));
  rig.cell.abort();
  runner.join();
  REQUIRE(result.has_value());
  CHECK(result->phase == SessionPhase::Halted);
  CHECK(result->failed_step_id == "S3");
  CHECK(rig.sink.events().back().kind == EventKind::SessionEnd);
}

TEST_CASE("the light stream records every transition in order") {
  Rig rig;
  rig.scene.perturb("S1", {50.0, 0.0, false, 1});
  rig.cell.run_session(procedure::parse_procedure(kThreeSteps), "SN-033");
  const auto items = rig.cell.stream_since(0, std::chrono::milliseconds(0));
  std::vector<std::string> lights;
  std::size_t work_events = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    CHECK(items[i].seq == i + 1);
    if (items[i].type == "light") lights.push_back(items[i].data.at("light"));
    if (items[i].type == "work_event") ++work_events;
  }
  CHECK(work_events == rig.sink.events().size());
  REQUIRE_FALSE(lights.empty());
  CHECK(lights.front() == "alarm");
  CHECK(std::find(lights.begin(), lights.end(), "attention") != lights.end());
  CHECK(lights.back() == "idle");
}

TEST_CASE("operator api over http") {
  SimScene scene(7, 0.02);
  MemorySink sink;
  SimulatedToolLink tool(tool_profile());
  SystemClock clock;
  FrameInbox inbox(std::chrono::milliseconds(200));
  Workcell cell(parse_config(kCellN1), library(), scene, sink, &tool, clock);
  RunOptions defaults;
  defaults.headless = false;
  defaults.confirm_timeout = std::chrono::seconds(20);
  OperatorApi api(cell, &inbox, defaults);
  const int port = api.bind("127.0.0.1", 0);
  api.start();

  httplib::Client http("127.0.0.1", port);
  http.set_read_timeout(5, 0);

  auto state = http.Get("/session");
  REQUIRE(state);
  CHECK(state->status == 200);
  CHECK(state->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(logbook::Json::parse(state->body)["session"].is_null());

  CHECK(http.Post("/steps/S3/confirm")->status == 404);
  CHECK(http.Post("/alarm/ack")->status == 409);
  CHECK(http.Get("/cameras/cam0/frame.png")->status == 404);
  CHECK(http.Get("/cameras/nope/frame.png")->status == 404);

  // Frame upload and PNG conversion.
  vision::GrayImage frame(32, 16, 0.25);
  const auto pgm = vision::encode_pgm(frame);
  const std::string body(pgm.begin(), pgm.end());
  CHECK(http.Post("/cameras/cam0/frame", body, "image/x-portable-graymap")->status == 200);
  CHECK(http.Post("/cameras/cam0/frame", "junk", "image/x-portable-graymap")->status == 400);
  CHECK(http.Post("/cameras/zz/frame", body, "image/x-portable-graymap")->status == 404);
  auto png = http.Get("/cameras/cam0/frame.png");
  REQUIRE(png);
  CHECK(png->status == 200);
  CHECK(png->get_header_value("Content-Type") == "image/png");
  CHECK(png->body.substr(1, 3) == "PNG");

  // Rejected start: missing serial.
  logbook::Json start = {{"procedure_text", kThreeSteps}, {"product_serial", ""}};
  CHECK(http.Post("/session", start.dump(), "application/json")->status == 400);

  start["product_serial"] = "SN-040";
  start["seed"] = 7;
  auto started = http.Post("/session", start.dump(), "application/json");
  REQUIRE(started);
  CHECK(started->status == 202);
  const std::string session_id = logbook::Json::parse(started->body).at("session_id");
  CHECK(session_id == make_session_id(7, "N1", "SN-040"));

  REQUIRE(wait_for([&] {
    auto r = http.Get("/session");
    return r && logbook::Json::parse(r->body)["session"]["awaiting_confirm"] == "S3";
  }));
  CHECK(http.Post("/session", start.dump(), "application/json")->status == 409);
  CHECK(http.Post("/steps/S1/confirm")->status == 409);
  CHECK(http.Post("/steps/S9/confirm")->status == 404);
  auto first = http.Post("/steps/S3/confirm");
  REQUIRE(first);
  CHECK(first->status == 200);
  CHECK(logbook::Json::parse(first->body)["status"] == "accepted");
  auto second = http.Post("/steps/S3/confirm");
  CHECK(second->status == 200);
  CHECK(logbook::Json::parse(second->body)["status"] == "already_confirmed");
  api.wait_session();

  const auto snap = logbook::Json::parse(http.Get("/session")->body);
  CHECK(snap["session"]["phase"] == "complete");
  CHECK(snap["session"]["session_id"] == session_id);
  CHECK(snap["session"]["telemetry"]["band_nm"].get<double>() == 0.5);

  // The event stream replays everything from the start.
  std::string stream;
  httplib::Client sse("127.0.0.1", port);
  sse.set_read_timeout(5, 0);
  const std::size_t want = sink.events().size();
  sse.Get("/events?from=0", [&](const char* data, std::size_t n) {
    stream.append(data, n);
    std::size_t count = 0;
    for (std::size_t at = stream.find("event: work_event"); at != std::string::npos;
         at = stream.find("event: work_event", at + 1)) {
      ++count;
    }
    return count < want;
  });
  CHECK(stream.find("event: light") != std::string::npos);
  CHECK(stream.find("\"kind\":\"session_end\"") != std::string::npos);

  api.stop();
}

TEST_CASE("operator api refuses a taken port") {
  SimScene scene(7, 0.02);
  MemorySink sink;
  SimClock clock;
  Workcell cell(parse_config(kCellN1), library(), scene, sink, nullptr, clock);
  OperatorApi a(cell, nullptr, {});
  const int port = a.bind("127.0.0.1", 0);
  OperatorApi b(cell, nullptr, {});
  CHECK_THROWS_AS(b.bind("127.0.0.1", port), ApiListenError);
}

TEST_CASE("replay mode consumes submitted frames") {
  const auto lib = library();
  const auto cfg = parse_config(kCellN1);
  // Render the frame the simulator would produce, then feed it through the inbox.
  SimScene sim(3, 0.0);
  const auto script = procedure::parse_procedure(kThreeSteps);
  const auto& install = std::get<procedure::InstallParams>(script.steps[0].params);
  FrameRequest req{&cfg.cameras[0], lib.find("T-1"), install.expected_region, "S1", 1};
  const auto frame = sim.acquire(req);

  FrameInbox inbox(std::chrono::milliseconds(100));
  CHECK_THROWS_AS(inbox.acquire(req), CameraUnavailable);
  inbox.submit("cam0", frame);
  CHECK(inbox.acquire(req) == frame);
  CHECK_THROWS_AS(inbox.acquire(req), CameraUnavailable);

  TempDir dir;
  vision::write_pgm((dir / "S1.pgm").string(), frame);
  DirectoryScene files(dir.path());
  CHECK(files.acquire(req).width() == frame.width());
  req.step_id = "S7";
  CHECK_THROWS_AS(files.acquire(req), CameraUnavailable);
}
