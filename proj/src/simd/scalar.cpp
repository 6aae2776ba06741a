#include "wkam/simd/kernels.hpp"

#include <cmath>
#include <limits>

namespace wkam::simd::detail {

namespace {

void minplus_scalar(double* best, const double* u, const double* k, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    const double c = u[i] + k[i];
    if (c < best[i]) best[i] = c;
  }
}

void maxminus_scalar(double* best, const double* u, const double* k, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    const double c = u[i] - k[i];
    if (c > best[i]) best[i] = c;
  }
}

double min_scalar(const double* a, std::size_t len) {
  if (len == 0) return std::numeric_limits<double>::infinity();
  double m = a[0];
  for (std::size_t i = 1; i < len; ++i)
    if (a[i] < m) m = a[i];
  return m;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t len) {
  double m = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

}  // namespace

const KernelTable kScalarTable{Isa::scalar, minplus_scalar, maxminus_scalar, min_scalar, max_abs_diff_scalar};

}  // namespace wkam::simd::detail
