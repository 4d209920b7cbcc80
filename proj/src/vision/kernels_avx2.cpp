#include <immintrin.h>

#include "kernels.hpp"

namespace asmctl::vision::kernels {

// 16 output positions per block in four accumulators; the template tap is
// broadcast and each accumulator takes an unaligned load of the search row.
void correlate_row_avx2(const double* row, const double* tpl, int tpl_width,
                        double* out, int out_count) {
  int u = 0;
  for (; u + 16 <= out_count; u += 16) {
    __m256d a0 = _mm256_loadu_pd(out + u);
    __m256d a1 = _mm256_loadu_pd(out + u + 4);
    __m256d a2 = _mm256_loadu_pd(out + u + 8);
    __m256d a3 = _mm256_loadu_pd(out + u + 12);
    const double* s = row + u;
    for (int i = 0; i < tpl_width; ++i) {
      const __m256d t = _mm256_broadcast_sd(tpl + i);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(s + i), t, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(s + i + 4), t, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(s + i + 8), t, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(s + i + 12), t, a3);
    }
    _mm256_storeu_pd(out + u, a0);
    _mm256_storeu_pd(out + u + 4, a1);
    _mm256_storeu_pd(out + u + 8, a2);
    _mm256_storeu_pd(out + u + 12, a3);
  }
  for (; u + 4 <= out_count; u += 4) {
    __m256d a = _mm256_loadu_pd(out + u);
    const double* s = row + u;
    for (int i = 0; i < tpl_width; ++i) {
      a = _mm256_fmadd_pd(_mm256_loadu_pd(s + i), _mm256_broadcast_sd(tpl + i), a);
    }
    _mm256_storeu_pd(out + u, a);
  }
  if (u < out_count) {
    correlate_row_scalar(row + u, tpl, tpl_width, out + u, out_count - u);
  }
}

}  // namespace asmctl::vision::kernels
