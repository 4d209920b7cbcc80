#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace asmctl {

// Axis-aligned pixel rectangle. Pixel (x, y) covers the unit square whose
// center sits at integer coordinates, so a rectangle spanning w pixels has
// its center at x + (w - 1) / 2.
struct Region {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  double center_x() const { return x + (w - 1) / 2.0; }
  double center_y() const { return y + (h - 1) / 2.0; }

  bool operator==(const Region&) const = default;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ToolMode : std::uint8_t { TorqueLimit = 0, ActuationCutoff = 1 };

std::string_view to_string(ToolMode mode);

}  // namespace asmctl
