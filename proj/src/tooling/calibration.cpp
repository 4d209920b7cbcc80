#include "asmctl/tooling/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "asmctl/text_format.hpp"

namespace asmctl::tooling {

namespace {

// Keeps values that round to zero from printing as "-0.000000".
double printable(double v) { return std::abs(v) < 5e-7 ? 0.0 : v; }

}  // namespace

TorqueModel fit_calibration(std::span<const CalibrationSample> samples,
                            bool fit_offset) {
  if (samples.size() < 2) {
    throw DegenerateSamples("calibration needs at least two samples");
  }
  const double first = samples.front().current_a;
  if (std::all_of(samples.begin(), samples.end(),
                  [&](const CalibrationSample& s) { return s.current_a == first; })) {
    throw DegenerateSamples("all calibration samples share one current");
  }
  for (const auto& s : samples) {
    if (!std::isfinite(s.current_a) || !std::isfinite(s.torque_nm)) {
      throw DegenerateSamples("calibration sample is not finite");
    }
  }

  TorqueModel model;
  if (fit_offset) {
    const double n = static_cast<double>(samples.size());
    double mx = 0.0, my = 0.0;
    for (const auto& s : samples) {
      mx += s.current_a;
      my += s.torque_nm;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : samples) {
      sxx += (s.current_a - mx) * (s.current_a - mx);
      sxy += (s.current_a - mx) * (s.torque_nm - my);
    }
    model.k_nm_per_a = sxy / sxx;
    model.offset_nm = my - model.k_nm_per_a * mx;
  } else {
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : samples) {
      sxx += s.current_a * s.current_a;
      sxy += s.current_a * s.torque_nm;
    }
    model.k_nm_per_a = sxy / sxx;
    model.offset_nm = 0.0;
  }
  if (!(model.k_nm_per_a > 0.0)) {
    throw DegenerateSamples("fitted torque constant is not positive");
  }

  double band = 0.0;
  for (const auto& s : samples) {
    const double fitted = model.k_nm_per_a * s.current_a + model.offset_nm;
    band = std::max(band, std::abs(s.torque_nm - fitted));
  }
  model.band_nm = band;
  return model;
}

std::vector<CalibrationSample> generate_calibration_samples(int count, double k,
                                                            double noise_a,
                                                            std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  if (!(noise_a >= 0.0)) throw std::invalid_argument("noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_a > 0.0 ? noise_a : 1.0);
  std::vector<CalibrationSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double current =
        count == 1 ? 1.0 : 1.0 + 9.0 * static_cast<double>(i) / (count - 1);
    const double measured = noise_a > 0.0 ? current + noise(rng) : current;
    out.push_back({measured, k * current});
  }
  return out;
}

std::vector<CalibrationSample> parse_calibration_samples(std::string_view text) {
  std::vector<CalibrationSample> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::replace(line.begin(), line.end(), '\t', ' ');
    const auto first = line.find_first_not_of(" \r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto sep = line.find(' ', first);
    if (sep == std::string::npos) {
      throw SyntaxError(line_no, "expected '<current_a> <torque_nm>'");
    }
    out.push_back({text::to_double(line.substr(first, sep - first), line_no),
                   text::to_double(line.substr(sep + 1), line_no)});
  }
  return out;
}

std::string format_calibration_report(std::span<const CalibrationSample> samples,
                                      const TorqueModel& model) {
  std::string out = "# current_a torque_nm residual_nm\n";
  char buf[128];
  for (const auto& s : samples) {
    const double residual =
        s.torque_nm - (model.k_nm_per_a * s.current_a + model.offset_nm);
    std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f\n", s.current_a, s.torque_nm,
                  printable(residual));
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "k_nm_per_a %.6f\noffset_nm %.6f\nband_nm %.6f\nsamples %zu\n",
                model.k_nm_per_a, printable(model.offset_nm),
                printable(model.band_nm), samples.size());
  out += buf;
  return out;
}

}  // namespace asmctl::tooling
