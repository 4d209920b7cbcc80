#include "asmctl/vision/template_match.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"

namespace asmctl::vision {

namespace {

kernels::CorrelateRowFn kernel_for(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar:
      return &kernels::correlate_row_scalar;
    case SimdLevel::Avx2:
#if defined(ASMCTL_HAVE_AVX2)
      return &kernels::correlate_row_avx2;
#else
      break;
#endif
    case SimdLevel::Neon:
#if defined(ASMCTL_HAVE_NEON)
      return &kernels::correlate_row_neon;
#else
      break;
#endif
  }
  return nullptr;
}

void check_sizes(const GrayImage& search, const Template& tpl) {
  if (tpl.width() >= search.width() || tpl.height() >= search.height()) {
    throw TemplateTooLarge("template '" + tpl.id() + "' (" +
                           std::to_string(tpl.width()) + "x" +
                           std::to_string(tpl.height()) +
                           ") does not fit strictly inside the search image (" +
                           std::to_string(search.width()) + "x" +
                           std::to_string(search.height()) + ")");
  }
}

}  // namespace

std::string_view to_string(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar:
      return "scalar";
    case SimdLevel::Avx2:
      return "avx2";
    case SimdLevel::Neon:
      return "neon";
  }
  return "unknown";
}

bool simd_supported(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar:
      return true;
    case SimdLevel::Avx2:
#if defined(ASMCTL_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case SimdLevel::Neon:
#if defined(ASMCTL_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

SimdLevel best_simd_level() {
  static const SimdLevel level = [] {
    if (simd_supported(SimdLevel::Avx2)) return SimdLevel::Avx2;
    if (simd_supported(SimdLevel::Neon)) return SimdLevel::Neon;
    return SimdLevel::Scalar;
  }();
  return level;
}

ScoreMap ncc_score_map(const GrayImage& search, const Template& tpl,
                       SimdLevel level) {
  check_sizes(search, tpl);
  if (!simd_supported(level)) {
    throw std::invalid_argument("SIMD level '" + std::string(to_string(level)) +
                                "' is not available on this CPU");
  }
  const auto correlate = kernel_for(level);

  const int tw = tpl.width();
  const int th = tpl.height();
  const int sw = search.width();
  const int n_u = sw - tw + 1;
  const int n_v = search.height() - th + 1;
  const double n = static_cast<double>(tw) * th;

  // Zero-mean template: the numerator then reduces to a plain correlation
  // because sum(T - mean_T) = 0 cancels the window-mean term.
  const auto tpx = tpl.image().pixels();
  double t_mean = 0.0;
  for (double v : tpx) t_mean += v;
  t_mean /= n;
  std::vector<double> centered(tpx.size());
  double t_ss = 0.0;
  for (std::size_t i = 0; i < tpx.size(); ++i) {
    centered[i] = tpx[i] - t_mean;
    t_ss += centered[i] * centered[i];
  }

  ScoreMap map;
  map.width = n_u;
  map.height = n_v;
  map.scores.assign(static_cast<std::size_t>(n_u) * n_v, 0.0);

  std::vector<double> numer(n_u);
  std::vector<double> col_sum(sw);
  std::vector<double> col_sq(sw);
  const double flat = kFlatVariancePerPixel * n;

  for (int v = 0; v < n_v; ++v) {
    std::fill(numer.begin(), numer.end(), 0.0);
    std::fill(col_sum.begin(), col_sum.end(), 0.0);
    std::fill(col_sq.begin(), col_sq.end(), 0.0);
    for (int j = 0; j < th; ++j) {
      const auto row = search.row(v + j);
      correlate(row.data(), centered.data() + static_cast<std::size_t>(j) * tw,
                tw, numer.data(), n_u);
      for (int x = 0; x < sw; ++x) {
        col_sum[x] += row[x];
        col_sq[x] += row[x] * row[x];
      }
    }
    // Separable box sums of S and S^2 give the window variance. Horizontal
    // sums are taken directly rather than slid so rounding cannot drift
    // across a wide row.
    double* out = map.scores.data() + static_cast<std::size_t>(v) * n_u;
    for (int u = 0; u < n_u; ++u) {
      double sum = 0.0, sq = 0.0;
      for (int i = 0; i < tw; ++i) {
        sum += col_sum[u + i];
        sq += col_sq[u + i];
      }
      const double s_ss = sq - sum * sum / n;
      if (s_ss <= flat) {
        out[u] = 0.0;
        continue;
      }
      const double score = numer[u] / std::sqrt(s_ss * t_ss);
      out[u] = std::clamp(score, -1.0, 1.0);
    }
  }
  return map;
}

Detection match_template(const GrayImage& search, const Template& tpl,
                         SimdLevel level) {
  const ScoreMap map = ncc_score_map(search, tpl, level);
  int best_u = 0, best_v = 0;
  double best = map.at(0, 0);
  for (int v = 0; v < map.height; ++v) {
    for (int u = 0; u < map.width; ++u) {
      if (map.at(u, v) > best) {
        best = map.at(u, v);
        best_u = u;
        best_v = v;
      }
    }
  }
  Detection d;
  d.template_id = tpl.id();
  d.origin_x = best_u;
  d.origin_y = best_v;
  d.center_x = best_u + (tpl.width() - 1) / 2.0;
  d.center_y = best_v + (tpl.height() - 1) / 2.0;
  d.score = best;
  return d;
}

Detection match_template(const GrayImage& search, const Template& tpl) {
  return match_template(search, tpl, best_simd_level());
}

}  // namespace asmctl::vision
