#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "asmctl/common.hpp"
#include "asmctl/tooling/torque_model.hpp"

namespace asmctl::tooling {

// Piecewise-linear threaded joint: constant run-down friction until the
// head seats, then a linear torque ramp.
struct JointModel {
  double run_down_torque_nm = 0.1;
  double seat_angle_rad = 1.0;
  double stiffness_nm_per_rad = 50.0;
};

double joint_torque(const JointModel& joint, double angle_rad);

struct ToolConfig {
  ToolMode mode = ToolMode::TorqueLimit;
  double setpoint_nm = 2.0;
  double speed_rad_per_s = 2.0;
  double tick_s = 0.001;
  // Standard deviation of the additive Gaussian on sampled current, A.
  double current_noise_a = 0.05;
  std::uint64_t seed = 0;
  double max_duration_s = 30.0;
};

inline constexpr double kMaxTickS = 0.01;

struct TighteningSample {
  double t_s = 0.0;
  double current_a = 0.0;
  double angle_rad = 0.0;
};

enum class TighteningStatus : std::uint8_t { Completed = 0, Stalled = 1, Aborted = 2 };

std::string_view to_string(TighteningStatus status);

struct TighteningResult {
  double final_torque_nm = 0.0;
  std::vector<TighteningSample> samples;
  TighteningStatus status = TighteningStatus::Aborted;
};

class InvalidToolConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const JointModel& joint, const ToolConfig& cfg,
              const TorqueModel& model);

// One fastening run advanced a control tick at a time, so a tool endpoint
// can stream telemetry between ticks. Single owner; not thread-safe.
//
// TorqueLimit: the motor current is clamped at current_for_torque(setpoint),
// so the joint stalls exactly where its torque reaches the setpoint.
// ActuationCutoff: rotation stops on the first tick whose sampled current
// implies a torque at or above the setpoint.
class TighteningSimulation {
 public:
  TighteningSimulation(const JointModel& joint, const ToolConfig& cfg,
                       const TorqueModel& model);

  bool finished() const { return finished_; }

  // Advances one tick and returns the sample taken on it. Must not be called
  // once finished().
  const TighteningSample& step();

  // Stops a running fastening; the result becomes Aborted.
  void abort();

  double elapsed_s() const { return elapsed_s_; }
  const TighteningResult& result() const { return result_; }
  TighteningResult take_result() { return std::move(result_); }

 private:
  void finish(TighteningStatus status, double sampled_current_a);

  JointModel joint_;
  ToolConfig cfg_;
  TorqueModel model_;
  double clamp_current_a_ = 0.0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_;
  std::uint64_t ticks_ = 0;
  double elapsed_s_ = 0.0;
  double angle_rad_ = 0.0;
  bool finished_ = false;
  TighteningResult result_;
};

TighteningResult simulate_tightening(const JointModel& joint, const ToolConfig& cfg,
                                     const TorqueModel& model);

}  // namespace asmctl::tooling
