#include "kernels.hpp"

namespace asmctl::vision::kernels {

void correlate_row_scalar(const double* row, const double* tpl, int tpl_width,
                          double* out, int out_count) {
  for (int u = 0; u < out_count; ++u) {
    double acc = out[u];
    const double* s = row + u;
    for (int i = 0; i < tpl_width; ++i) acc += s[i] * tpl[i];
    out[u] = acc;
  }
}

}  // namespace asmctl::vision::kernels
