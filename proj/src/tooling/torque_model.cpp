#include "asmctl/tooling/torque_model.hpp"

#include <cmath>

namespace asmctl::tooling {

void validate(const TorqueModel& model) {
  if (!(model.k_nm_per_a > 0.0) || !std::isfinite(model.k_nm_per_a)) {
    throw TorqueModelError(TorqueModelError::Code::InvalidModel,
                           "torque constant must be positive");
  }
  if (!std::isfinite(model.offset_nm)) {
    throw TorqueModelError(TorqueModelError::Code::InvalidModel,
                           "torque offset must be finite");
  }
  if (!(model.band_nm >= 0.0)) {
    throw TorqueModelError(TorqueModelError::Code::InvalidModel,
                           "torque band must be non-negative");
  }
}

double torque_from_current(double current_a, const TorqueModel& model) {
  validate(model);
  if (!(current_a >= 0.0)) {
    throw TorqueModelError(TorqueModelError::Code::NegativeCurrent,
                           "motor current must be non-negative");
  }
  return model.k_nm_per_a * current_a + model.offset_nm;
}

double current_for_torque(double torque_nm, const TorqueModel& model) {
  validate(model);
  if (!(torque_nm > model.offset_nm)) {
    throw TorqueModelError(TorqueModelError::Code::BelowOffset,
                           "torque must exceed the model offset");
  }
  return (torque_nm - model.offset_nm) / model.k_nm_per_a;
}

}  // namespace asmctl::tooling
