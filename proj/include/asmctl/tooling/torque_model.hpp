#pragma once

#include <stdexcept>
#include <string>

namespace asmctl::tooling {

// Motor torque constant of the fastening tool, Nm per A of motor current.
inline constexpr double kMotorTorqueConstant = 0.3;
// Accepted deviation of the delivered torque from the linear law, Nm.
inline constexpr double kTorqueBandNm = 0.5;

// Linear current-to-torque law: torque = k * current + offset.
// band_nm is the largest deviation of measured torque from that line.
struct TorqueModel {
  double k_nm_per_a = kMotorTorqueConstant;
  double offset_nm = 0.0;
  double band_nm = kTorqueBandNm;

  bool operator==(const TorqueModel&) const = default;
};

class TorqueModelError : public std::domain_error {
 public:
  enum class Code { NegativeCurrent, BelowOffset, InvalidModel };

  TorqueModelError(Code code, const std::string& message)
      : std::domain_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

void validate(const TorqueModel& model);

double torque_from_current(double current_a, const TorqueModel& model);

// Inverse of torque_from_current; the torque must exceed the model offset.
double current_for_torque(double torque_nm, const TorqueModel& model);

}  // namespace asmctl::tooling
