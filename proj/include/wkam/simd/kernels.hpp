#pragma once

#include <cstddef>
#include <string>

namespace wkam::simd {

enum class Isa { scalar, avx2, neon };

// Row kernels used by the Lax-Oleinik sweeps. Every variant returns results
// bit-identical to the scalar one: each lane does one add or subtract and one
// min or max, with no reassociation.
struct KernelTable {
  Isa isa;
  // best[i] = min(best[i], u[i] + k[i])
  void (*minplus_accumulate)(double* best, const double* u, const double* k, std::size_t len);
  // best[i] = max(best[i], u[i] - k[i])
  void (*maxminus_accumulate)(double* best, const double* u, const double* k, std::size_t len);
  double (*min_value)(const double* a, std::size_t len);  // +inf when len == 0
  // max |a[i] - b[i]|
  double (*max_abs_diff)(const double* a, const double* b, std::size_t len);
};

bool available(Isa isa);
const KernelTable& table(Isa isa);  // throws std::invalid_argument if unavailable
// Best available variant, unless overridden by select().
const KernelTable& active();
void select(Isa isa);
void reset_selection();
std::string to_string(Isa isa);

namespace detail {
extern const KernelTable kScalarTable;
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();
}  // namespace detail

}  // namespace wkam::simd
