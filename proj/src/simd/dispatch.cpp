#include "wkam/simd/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace wkam::simd {

namespace {

const KernelTable* lookup(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::kScalarTable;
    case Isa::avx2:
      return detail::avx2_table();
    case Isa::neon:
      return detail::neon_table();
  }
  return nullptr;
}

const KernelTable* best_available() {
  if (const auto* t = detail::avx2_table()) return t;
  if (const auto* t = detail::neon_table()) return t;
  return &detail::kScalarTable;
}

std::atomic<const KernelTable*> g_selected{nullptr};

}  // namespace

bool available(Isa isa) { return lookup(isa) != nullptr; }

const KernelTable& table(Isa isa) {
  const auto* t = lookup(isa);
  if (!t) throw std::invalid_argument("SIMD variant not available: " + to_string(isa));
  return *t;
}

const KernelTable& active() {
  const auto* t = g_selected.load(std::memory_order_acquire);
  if (!t) {
    t = best_available();
    g_selected.store(t, std::memory_order_release);
  }
  return *t;
}

void select(Isa isa) { g_selected.store(&table(isa), std::memory_order_release); }

void reset_selection() { g_selected.store(best_available(), std::memory_order_release); }

std::string to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace wkam::simd
