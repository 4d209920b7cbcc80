#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "asmctl/vision/image.hpp"

namespace asmctl::vision {

struct Detection {
  std::string template_id;
  // Window center in search-image pixel coordinates.
  double center_x = 0.0;
  double center_y = 0.0;
  // Top-left corner of the best window.
  int origin_x = 0;
  int origin_y = 0;
  double score = 0.0;
};

class TemplateTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Instruction-set variants of the correlation kernel. Scalar is the
// reference; the others must agree with it to rounding.
enum class SimdLevel { Scalar, Avx2, Neon };

std::string_view to_string(SimdLevel level);
bool simd_supported(SimdLevel level);
// Widest variant usable on this CPU.
SimdLevel best_simd_level();

// Zero-mean normalized cross-correlation for every window position;
// (search.width - tpl.width + 1) x (search.height - tpl.height + 1),
// row-major. Windows with no luminance variation score 0.
struct ScoreMap {
  int width = 0;
  int height = 0;
  std::vector<double> scores;

  double at(int u, int v) const {
    return scores[static_cast<std::size_t>(v) * width + u];
  }
};

ScoreMap ncc_score_map(const GrayImage& search, const Template& tpl,
                       SimdLevel level);

// Best NCC window; ties resolve to the smallest row, then column. The
// template must be strictly smaller than the search image in both axes.
Detection match_template(const GrayImage& search, const Template& tpl);
Detection match_template(const GrayImage& search, const Template& tpl,
                         SimdLevel level);

}  // namespace asmctl::vision
