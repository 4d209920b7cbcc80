#include <arm_neon.h>

#include "kernels.hpp"

namespace asmctl::vision::kernels {

void correlate_row_neon(const double* row, const double* tpl, int tpl_width,
                        double* out, int out_count) {
  int u = 0;
  for (; u + 8 <= out_count; u += 8) {
    float64x2_t a0 = vld1q_f64(out + u);
    float64x2_t a1 = vld1q_f64(out + u + 2);
    float64x2_t a2 = vld1q_f64(out + u + 4);
    float64x2_t a3 = vld1q_f64(out + u + 6);
    const double* s = row + u;
    for (int i = 0; i < tpl_width; ++i) {
      const float64x2_t t = vdupq_n_f64(tpl[i]);
      a0 = vfmaq_f64(a0, vld1q_f64(s + i), t);
      a1 = vfmaq_f64(a1, vld1q_f64(s + i + 2), t);
      a2 = vfmaq_f64(a2, vld1q_f64(s + i + 4), t);
      a3 = vfmaq_f64(a3, vld1q_f64(s + i + 6), t);
    }
    vst1q_f64(out + u, a0);
    vst1q_f64(out + u + 2, a1);
    vst1q_f64(out + u + 4, a2);
    vst1q_f64(out + u + 6, a3);
  }
  if (u < out_count) {
    correlate_row_scalar(row + u, tpl, tpl_width, out + u, out_count - u);
  }
}

}  // namespace asmctl::vision::kernels
