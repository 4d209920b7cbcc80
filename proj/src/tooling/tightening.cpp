#include "asmctl/tooling/tightening.hpp"

#include <algorithm>
#include <cmath>

namespace asmctl::tooling {

namespace {

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

// Motor current that produces `torque` under the model, floored at zero for
// torques below the model offset.
double ideal_current(double torque_nm, const TorqueModel& model) {
  return std::max(0.0, (torque_nm - model.offset_nm) / model.k_nm_per_a);
}

}  // namespace

std::string_view to_string(TighteningStatus status) {
  switch (status) {
    case TighteningStatus::Completed:
      return "Completed";
    case TighteningStatus::Stalled:
      return "Stalled";
    case TighteningStatus::Aborted:
      return "Aborted";
  }
  return "Unknown";
}

double joint_torque(const JointModel& joint, double angle_rad) {
  if (angle_rad < joint.seat_angle_rad) return joint.run_down_torque_nm;
  return joint.run_down_torque_nm +
         joint.stiffness_nm_per_rad * (angle_rad - joint.seat_angle_rad);
}

void validate(const JointModel& joint, const ToolConfig& cfg,
              const TorqueModel& model) {
  validate(model);
  if (!positive(joint.run_down_torque_nm) || !positive(joint.seat_angle_rad) ||
      !positive(joint.stiffness_nm_per_rad)) {
    throw InvalidToolConfig("joint parameters must be positive");
  }
  if (!positive(cfg.setpoint_nm)) throw InvalidToolConfig("setpoint must be positive");
  if (!(cfg.setpoint_nm > joint.run_down_torque_nm)) {
    throw InvalidToolConfig("setpoint must exceed the joint run-down torque");
  }
  if (!(cfg.setpoint_nm > model.offset_nm)) {
    throw InvalidToolConfig("setpoint must exceed the torque model offset");
  }
  if (!positive(cfg.speed_rad_per_s)) throw InvalidToolConfig("speed must be positive");
  if (!positive(cfg.tick_s) || cfg.tick_s > kMaxTickS) {
    throw InvalidToolConfig("tick must lie in (0, 0.01] s");
  }
  if (!(cfg.current_noise_a >= 0.0) || !std::isfinite(cfg.current_noise_a)) {
    throw InvalidToolConfig("current noise must be non-negative");
  }
  if (!positive(cfg.max_duration_s)) {
    throw InvalidToolConfig("max duration must be positive");
  }
}

TighteningSimulation::TighteningSimulation(const JointModel& joint,
                                           const ToolConfig& cfg,
                                           const TorqueModel& model)
    : joint_(joint), cfg_(cfg), model_(model), rng_(cfg.seed) {
  validate(joint_, cfg_, model_);
  clamp_current_a_ = current_for_torque(cfg_.setpoint_nm, model_);
  if (cfg_.current_noise_a > 0.0) {
    noise_ = std::normal_distribution<double>(0.0, cfg_.current_noise_a);
  }
}

const TighteningSample& TighteningSimulation::step() {
  if (finished_) throw std::logic_error("tightening already finished");
  ++ticks_;
  elapsed_s_ = static_cast<double>(ticks_) * cfg_.tick_s;
  const double proposed = angle_rad_ + cfg_.speed_rad_per_s * cfg_.tick_s;
  const double noise = cfg_.current_noise_a > 0.0 ? noise_(rng_) : 0.0;

  bool done = false;
  double current = 0.0;
  if (cfg_.mode == ToolMode::TorqueLimit) {
    double torque;
    if (joint_torque(joint_, proposed) >= cfg_.setpoint_nm) {
      // The clamped motor cannot push past the angle where the joint torque
      // equals the setpoint.
      const double stall_angle =
          joint_.seat_angle_rad +
          (cfg_.setpoint_nm - joint_.run_down_torque_nm) / joint_.stiffness_nm_per_rad;
      angle_rad_ = std::max(angle_rad_, stall_angle);
      torque = cfg_.setpoint_nm;
      done = true;
    } else {
      angle_rad_ = proposed;
      torque = joint_torque(joint_, angle_rad_);
    }
    const double ideal = done ? clamp_current_a_ : ideal_current(torque, model_);
    current = std::clamp(ideal + noise, 0.0, clamp_current_a_);
  } else {
    angle_rad_ = proposed;
    const double torque = joint_torque(joint_, angle_rad_);
    current = std::max(0.0, ideal_current(torque, model_) + noise);
    done = torque_from_current(current, model_) >= cfg_.setpoint_nm;
  }

  result_.samples.push_back({elapsed_s_, current, angle_rad_});
  if (done) {
    finish(TighteningStatus::Completed, current);
  } else if (elapsed_s_ >= cfg_.max_duration_s) {
    finish(TighteningStatus::Stalled, current);
  }
  return result_.samples.back();
}

void TighteningSimulation::abort() {
  if (finished_) return;
  const double last = result_.samples.empty() ? 0.0 : result_.samples.back().current_a;
  finish(TighteningStatus::Aborted, last);
}

void TighteningSimulation::finish(TighteningStatus status, double sampled_current_a) {
  finished_ = true;
  result_.status = status;
  result_.final_torque_nm = torque_from_current(sampled_current_a, model_);
}

TighteningResult simulate_tightening(const JointModel& joint, const ToolConfig& cfg,
                                     const TorqueModel& model) {
  TighteningSimulation sim(joint, cfg, model);
  while (!sim.finished()) sim.step();
  return sim.take_result();
}

}  // namespace asmctl::tooling
