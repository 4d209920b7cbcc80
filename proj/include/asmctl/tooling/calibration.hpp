#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "asmctl/tooling/torque_model.hpp"

namespace asmctl::tooling {

struct CalibrationSample {
  double current_a = 0.0;
  double torque_nm = 0.0;
};

class DegenerateSamples : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Least-squares line through the samples, or through the origin when
// fit_offset is false. band_nm is set to the largest absolute residual.
TorqueModel fit_calibration(std::span<const CalibrationSample> samples,
                            bool fit_offset);

// Bench data for a tool with constant k: true currents evenly spaced over
// [1, 10] A, torque = k * current, and the recorded current perturbed by
// Gaussian noise of noise_a (A).
std::vector<CalibrationSample> generate_calibration_samples(int count, double k,
                                                            double noise_a,
                                                            std::uint64_t seed);

// Sample file: one `current torque` pair per line (space or comma
// separated), `#` comments.
std::vector<CalibrationSample> parse_calibration_samples(std::string_view text);

// Fixed-format report:
//   # current_a torque_nm residual_nm
//   <rows, 6 decimals>
//   k_nm_per_a <v>
//   offset_nm <v>
//   band_nm <v>
//   samples <n>
std::string format_calibration_report(std::span<const CalibrationSample> samples,
                                      const TorqueModel& model);

}  // namespace asmctl::tooling
