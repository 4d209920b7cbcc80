#pragma once

// Correlation inner loop: out[u] += sum_i row[u + i] * tpl[i] for
// u in [0, out_count). Each variant keeps the per-u summation order of the
// scalar reference.

namespace asmctl::vision::kernels {

using CorrelateRowFn = void (*)(const double* row, const double* tpl,
                                int tpl_width, double* out, int out_count);

void correlate_row_scalar(const double* row, const double* tpl, int tpl_width,
                          double* out, int out_count);

#if defined(ASMCTL_HAVE_AVX2)
void correlate_row_avx2(const double* row, const double* tpl, int tpl_width,
                        double* out, int out_count);
#endif

#if defined(ASMCTL_HAVE_NEON)
void correlate_row_neon(const double* row, const double* tpl, int tpl_width,
                        double* out, int out_count);
#endif

}  // namespace asmctl::vision::kernels
