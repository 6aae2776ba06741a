#include "wkam/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#include <cmath>
#include <limits>

namespace wkam::simd::detail {

namespace {

#define WKAM_AVX2 __attribute__((target("avx2")))

// _mm256_min_pd(a, b) returns b when a is not less than b, matching the
// scalar "replace only if strictly smaller" on non-NaN input.
WKAM_AVX2 void minplus_avx2(double* best, const double* u, const double* k, std::size_t len) {
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d c = _mm256_add_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(k + i));
    _mm256_storeu_pd(best + i, _mm256_min_pd(c, _mm256_loadu_pd(best + i)));
  }
  for (; i < len; ++i) {
    const double c = u[i] + k[i];
    if (c < best[i]) best[i] = c;
  }
}

WKAM_AVX2 void maxminus_avx2(double* best, const double* u, const double* k, std::size_t len) {
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d c = _mm256_sub_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(k + i));
    _mm256_storeu_pd(best + i, _mm256_max_pd(c, _mm256_loadu_pd(best + i)));
  }
  for (; i < len; ++i) {
    const double c = u[i] - k[i];
    if (c > best[i]) best[i] = c;
  }
}

WKAM_AVX2 double min_avx2(const double* a, std::size_t len) {
  std::size_t i = 0;
  if (len == 0) return std::numeric_limits<double>::infinity();
  double m = a[0];
  if (len >= 4) {
    __m256d acc = _mm256_loadu_pd(a);
    for (i = 4; i + 4 <= len; i += 4) acc = _mm256_min_pd(_mm256_loadu_pd(a + i), acc);
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    m = lane[0];
    for (int j = 1; j < 4; ++j)
      if (lane[j] < m) m = lane[j];
  }
  for (; i < len; ++i)
    if (a[i] < m) m = a[i];
  return m;
}

WKAM_AVX2 double max_abs_diff_avx2(const double* a, const double* b, std::size_t len) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc = _mm256_max_pd(d, acc);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double m = 0.0;
  for (int j = 0; j < 4; ++j)
    if (lane[j] > m) m = lane[j];
  for (; i < len; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

#undef WKAM_AVX2

const KernelTable kAvx2Table{Isa::avx2, minplus_avx2, maxminus_avx2, min_avx2, max_abs_diff_avx2};

}  // namespace

const KernelTable* avx2_table() { return __builtin_cpu_supports("avx2") ? &kAvx2Table : nullptr; }

}  // namespace wkam::simd::detail

#else

namespace wkam::simd::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace wkam::simd::detail

#endif
