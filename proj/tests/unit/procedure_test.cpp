#include <doctest.h>

#include <random>

#include "asmctl/procedure/procedure.hpp"
#include "asmctl/procedure/session_state.hpp"

using namespace asmctl;
using namespace asmctl::procedure;

namespace {

constexpr const char* kThreeSteps = R"(# main panel
procedure P-1
product panel
revision 2

step S1 install
  element = EL-1
  template = T-1
  region = 100,100,200,200
  tolerance = 20
step S2 tighten
  fasteners = 4
  torque = 2.0
  mode = actuation_cutoff
step S3 confirm
  prompt = Route the harness # not a comment
)";

std::string one_step(const std::string& body) {
  return "procedure P\nproduct X\nrevision 1\n" + body;
}

ProcedureScript three_step_script() { return parse_procedure(kThreeSteps); }

}  // namespace

TEST_CASE("minimal install script parses") {
  const auto s = parse_procedure(one_step(
      "step S1 install\n  element = EL-1\n  template = T-1\n"
      "  region = 100,100,200,200\n  tolerance = 20\n"));
  REQUIRE(s.steps.size() == 1);
  CHECK(s.steps[0].kind() == StepKind::InstallElement);
  const auto& p = std::get<InstallParams>(s.steps[0].params);
  CHECK(p.element_id == "EL-1");
  CHECK(p.template_id == "T-1");
  CHECK(p.expected_region == Region{100, 100, 200, 200});
  CHECK(*p.position_tolerance_px == 20.0);
  CHECK_FALSE(p.min_score.has_value());
}

TEST_CASE("full script keeps order and kind-specific fields") {
  const auto s = three_step_script();
  CHECK(s.procedure_id == "P-1");
  CHECK(s.product_type == "panel");
  CHECK(s.revision == 2);
  REQUIRE(s.steps.size() == 3);
  const auto& t = std::get<TightenParams>(s.steps[1].params);
  CHECK(t.fastener_count == 4);
  CHECK(t.target_torque_nm == 2.0);
  CHECK(t.mode == ToolMode::ActuationCutoff);
  CHECK(std::get<ConfirmParams>(s.steps[2].params).prompt ==
        "Route the harness # not a comment");
}

TEST_CASE("unknown step kind is a syntax error with its line") {
  try {
    parse_procedure(one_step("step S1 weld\n  seam = 1\n"));
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("negative torque is a validation error naming the step") {
  try {
    parse_procedure(one_step("step T1 tighten\n  fasteners = 2\n  torque = -1.5\n"));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.step_id() == "T1");
  }
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(parse_procedure("procedure P\nproduct X\nrevision 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_procedure("product X\nrevision 1\nstep A confirm\n  prompt = x\n"),
                  SyntaxError);
  CHECK_THROWS_AS(parse_procedure("  key = v\nprocedure P\n"), SyntaxError);
  CHECK_THROWS_AS(parse_procedure(one_step("step A confirm\n  prompt x\n")), SyntaxError);
  CHECK_THROWS_AS(parse_procedure(one_step("step A confirm\n")), ValidationError);
  CHECK_THROWS_AS(parse_procedure(one_step("step A confirm\n  prompt = x\n  color = red\n")),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_procedure(one_step("step A confirm\n  prompt = x\nstep A confirm\n  prompt = y\n")),
      ValidationError);
  CHECK_THROWS_AS(parse_procedure(one_step("step A tighten\n  fasteners = 0\n  torque = 1\n")),
                  ValidationError);
  CHECK_THROWS_AS(parse_procedure(one_step("step A inspect\n  template = T\n"
                                           "  region = 0,0,10,10\n  min_score = 1.5\n")),
                  ValidationError);
  CHECK_THROWS_AS(parse_procedure(one_step("step A install\n  element = E\n  template = T\n"
                                           "  region = 0,0,10\n")),
                  SyntaxError);
  CHECK_THROWS_AS(parse_procedure(one_step("step A tighten\n  fasteners = 1\n  torque = 1\n"
                                           "  mode = impact\n")),
                  SyntaxError);
  CHECK_THROWS_AS(parse_procedure("procedure P\nprocedure Q\n"), SyntaxError);
}

// Random valid scripts for the round-trip property.
ProcedureScript random_script(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto region = [&] { return Region{pick(0, 500), pick(0, 500), pick(1, 300), pick(1, 300)}; };
  ProcedureScript s;
  s.procedure_id = "P-" + std::to_string(pick(0, 999));
  s.product_type = "prod" + std::to_string(pick(0, 9));
  s.revision = pick(1, 50);
  const int n = pick(1, 8);
  for (int i = 0; i < n; ++i) {
    Step step;
    step.step_id = "S" + std::to_string(i);
    switch (pick(0, 3)) {
      case 0: {
        InstallParams p{"EL-" + std::to_string(i), "T-" + std::to_string(pick(0, 4)),
                        region(), {}, {}, {}};
        if (pick(0, 1)) p.position_tolerance_px = real(0, 50);
        if (pick(0, 1)) p.min_score = real(-1, 1);
        if (pick(0, 1)) p.camera_id = "cam" + std::to_string(pick(0, 2));
        step.params = p;
        break;
      }
      case 1:
        step.params = TightenParams{pick(1, 12), real(0.05, 20.0),
                                    pick(0, 1) ? ToolMode::TorqueLimit : ToolMode::ActuationCutoff};
        break;
      case 2: {
        InspectParams p{"T-" + std::to_string(pick(0, 4)), region(), {}, {}, {}};
        if (pick(0, 1)) p.min_score = real(-1, 1);
        if (pick(0, 1)) p.position_tolerance_px = real(0, 50);
        step.params = p;
        break;
      }
      default:
        step.params = ConfirmParams{"Check item " + std::to_string(pick(0, 100)) + " = ok"};
    }
    s.steps.push_back(step);
  }
  return s;
}

TEST_CASE("parse(serialize(script)) == script") {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_script(rng);
    const std::string text = serialize_procedure(s);
    CAPTURE(text);
    CHECK(parse_procedure(text) == s);
  }
}

TEST_CASE("next_pending") {
  const auto script = three_step_script();
  auto states = initial_states(script);
  CHECK(std::get<const Step*>(next_pending(script, states))->step_id == "S1");

  states[0].status = StepStatus::Passed;
  CHECK(std::get<const Step*>(next_pending(script, states))->step_id == "S2");

  for (auto& s : states) s.status = StepStatus::Passed;
  CHECK(std::holds_alternative<SessionComplete>(next_pending(script, states)));

  states = initial_states(script);
  states[0].status = StepStatus::Active;
  states[1].status = StepStatus::Active;
  try {
    next_pending(script, states);
    FAIL("expected InconsistentState");
  } catch (const StateError& e) {
    CHECK(e.code() == StateError::Code::InconsistentState);
  }

  states = initial_states(script);
  states.pop_back();
  CHECK_THROWS_AS(next_pending(script, states), StateError);
}

TEST_CASE("apply_result") {
  const auto script = three_step_script();
  auto states = activate(initial_states(script), "S1");

  SUBCASE("pass") {
    auto r = apply_result(states, "S1", Outcome::Passed, 3);
    CHECK(r.states[0].status == StepStatus::Passed);
    CHECK(r.states[0].attempts == 1);
    CHECK_FALSE(r.halted);
  }
  SUBCASE("fail with retries left returns to pending") {
    auto r = apply_result(states, "S1", Outcome::Failed, 3);
    CHECK(r.states[0].status == StepStatus::Pending);
    CHECK(r.states[0].attempts == 1);
    CHECK_FALSE(r.halted);
  }
  SUBCASE("fail with retries exhausted halts") {
    states[0].attempts = 3;
    auto r = apply_result(states, "S1", Outcome::Failed, 3);
    CHECK(r.states[0].status == StepStatus::Failed);
    CHECK(r.states[0].attempts == 4);
    CHECK(r.halted);
    CHECK(std::get<SessionHalted>(next_pending(script, r.states)).failed_step_id == "S1");
  }
  SUBCASE("errors") {
    try {
      apply_result(states, "nope", Outcome::Passed);
      FAIL("expected UnknownStep");
    } catch (const StateError& e) {
      CHECK(e.code() == StateError::Code::UnknownStep);
    }
    try {
      apply_result(states, "S2", Outcome::Passed);
      FAIL("expected NotActive");
    } catch (const StateError& e) {
      CHECK(e.code() == StateError::Code::NotActive);
    }
    CHECK_THROWS_AS(activate(states, "S2"), StateError);
  }
}

TEST_CASE("random sessions: progress is monotone and completion is exact") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto script = random_script(rng);
    const int cap = std::uniform_int_distribution<int>(0, 3)(rng);
    auto states = initial_states(script);
    auto settled = [](const StepStates& st) {
      return std::count_if(st.begin(), st.end(), [](const StepState& s) {
        return s.status == StepStatus::Passed || s.status == StepStatus::Failed ||
               s.status == StepStatus::Skipped;
      });
    };
    long last = 0;
    bool halted = false;
    for (int guard = 0; guard < 1000; ++guard) {
      const auto next = next_pending(script, states);
      CHECK(next.index() == next_pending(script, states).index());
      if (std::holds_alternative<SessionComplete>(next)) {
        CHECK(is_complete(states));
        break;
      }
      if (std::holds_alternative<SessionHalted>(next)) {
        CHECK(halted);
        CHECK_FALSE(is_complete(states));
        break;
      }
      const Step* step = std::get<const Step*>(next);
      if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
        states = skip(states, step->step_id);
      } else {
        states = activate(states, step->step_id);
        CHECK(std::count_if(states.begin(), states.end(), [](const StepState& s) {
                return s.status == StepStatus::Active;
              }) == 1);
        const auto outcome =
            std::uniform_int_distribution<int>(0, 2)(rng) == 0 ? Outcome::Failed : Outcome::Passed;
        auto r = apply_result(states, step->step_id, outcome, cap);
        states = r.states;
        halted = r.halted;
      }
      CHECK(settled(states) >= last);
      last = settled(states);
    }
  }
}
