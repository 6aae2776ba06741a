#include "wkam/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <cmath>
#include <limits>

namespace wkam::simd::detail {

namespace {

// vminq_f64 propagates NaN unlike the scalar compare; inputs are finite.
void minplus_neon(double* best, const double* u, const double* k, std::size_t len) {
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const float64x2_t c = vaddq_f64(vld1q_f64(u + i), vld1q_f64(k + i));
    vst1q_f64(best + i, vminq_f64(c, vld1q_f64(best + i)));
  }
  for (; i < len; ++i) {
    const double c = u[i] + k[i];
    if (c < best[i]) best[i] = c;
  }
}

void maxminus_neon(double* best, const double* u, const double* k, std::size_t len) {
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const float64x2_t c = vsubq_f64(vld1q_f64(u + i), vld1q_f64(k + i));
    vst1q_f64(best + i, vmaxq_f64(c, vld1q_f64(best + i)));
  }
  for (; i < len; ++i) {
    const double c = u[i] - k[i];
    if (c > best[i]) best[i] = c;
  }
}

double min_neon(const double* a, std::size_t len) {
  std::size_t i = 0;
  if (len == 0) return std::numeric_limits<double>::infinity();
  double m = a[0];
  if (len >= 2) {
    float64x2_t acc = vld1q_f64(a);
    for (i = 2; i + 2 <= len; i += 2) acc = vminq_f64(vld1q_f64(a + i), acc);
    m = vminvq_f64(acc);
  }
  for (; i < len; ++i)
    if (a[i] < m) m = a[i];
  return m;
}

double max_abs_diff_neon(const double* a, const double* b, std::size_t len) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) acc = vmaxq_f64(vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)), acc);
  double m = vmaxvq_f64(acc);
  for (; i < len; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

const KernelTable kNeonTable{Isa::neon, minplus_neon, maxminus_neon, min_neon, max_abs_diff_neon};

}  // namespace

const KernelTable* neon_table() { return &kNeonTable; }

}  // namespace wkam::simd::detail

#else

namespace wkam::simd::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace wkam::simd::detail

#endif
