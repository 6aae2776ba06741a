#pragma once

#include "wkam/weakkam.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wkam {

struct BarrierOptions {
  std::vector<double> horizons{5.0, 10.0, 20.0, 40.0};
  double tol = 1e-3;  // stability threshold is 5·tol
};

struct BarrierSlice {
  std::size_t base = 0;
  ValueFunction h;  // h(base, ·)
  std::vector<double> horizons;
  double max_change = 0.0;  // between the last two horizon minima
  bool stable = false;
  double suggested_horizon = 0.0;  // set when unstable
};

// h(x, y) = min over the horizon ladder of A_t(x, y) + c·t, one DP run per base.
BarrierSlice peierls_barrier(const ActionKernel& kernel, double c, std::size_t x, const BarrierOptions& opts = {});
std::vector<BarrierSlice> peierls_barriers(const ActionKernel& kernel, double c, const std::vector<std::size_t>& bases,
                                           const BarrierOptions& opts = {});

struct AubryReport {
  std::vector<std::size_t> sampled;
  std::vector<double> diagonal;  // h(x, x) per sampled node
  std::vector<std::size_t> nodes;
  double tol_A = 0.0;
  bool unstable = false;
};

// Nodes on a stride lattice (every stride-th index per axis).
std::vector<std::size_t> lattice_sample(const Grid& grid, int stride);

// Throws DomainError when no sampled node qualifies.
AubryReport aubry_set(const ActionKernel& kernel, double c, const std::vector<std::size_t>& sample, double tol_A,
                      const BarrierOptions& opts = {});

struct QuotientComponents {
  double tol = 0.0;
  std::size_t count = 0;
  std::vector<std::size_t> representatives;  // smallest node per component
  std::vector<std::size_t> label;            // component of each node
};

struct MatherQuotientReport {
  std::vector<std::size_t> nodes;
  std::vector<double> delta;  // row-major |nodes|², symmetric
  double min_delta = 0.0;
  double max_self = 0.0;
  double triangle_excess = 0.0;  // max of h(x,y) − h(x,z) − h(z,y)
  double tol_Q = 0.0;
  QuotientComponents at_tol;
  QuotientComponents at_double_tol;
};

QuotientComponents quotient_components(const std::vector<std::size_t>& nodes, const std::vector<double>& delta,
                                       double tol);
MatherQuotientReport mather_quotient(const ActionKernel& kernel, double c, const std::vector<std::size_t>& nodes,
                                     double tol_Q, const BarrierOptions& opts = {});

struct ProbeOptions {
  int m = 3;           // stencil half-width in spacings
  int span_cells = 0;  // spacing in cells; 0 selects t_steps
};

struct SupportFunctionProbe {
  std::size_t base = 0;
  std::size_t foot = 0;  // ρ(−t)
  int t_steps = 0;
  double t = 0.0;
  int span = 0;
  std::vector<std::size_t> stencil;  // (2m+1)^n nodes
  std::vector<double> phi;
  double touching = 0.0;     // phi(x) − u(x)
  double from_above = 0.0;   // min over stencil of phi − u
  double laplacian = 0.0;
  CalibratedCurve curve;
};

// phi = u(ρ(−t)) + A_t(ρ(−t), ·) + c·t on a stencil around x.
SupportFunctionProbe support_function_probe(const LagrangianSpec& spec, const ActionKernel& kernel,
                                            const ValueFunction& u, double c, std::size_t x, int t_steps,
                                            const ProbeOptions& opts = {});

// Conservative metric Laplacian of grid values at x with spacing span·dx.
double grid_laplacian(const MetricField& metric, const Grid& grid, const std::vector<double>& values, std::size_t x,
                      int span);

struct LaplacianEstimate {
  double estimate = 0.0;  // min over probes
  std::vector<SupportFunctionProbe> probes;
};

LaplacianEstimate barrier_laplacian_estimate(const LagrangianSpec& spec, const ActionKernel& kernel,
                                             const ValueFunction& u, double c, std::size_t x,
                                             const std::vector<int>& t_steps_list, const ProbeOptions& opts = {});

struct HypothesisOptions {
  int samples = 32;
  double T = 20.0;
  double flow_dt = 1e-2;
  std::uint64_t seed = 1;
  // Evaluate Δf with f = +½g(ω♯, ω♯) in place of the spec potential.
  bool mane_potential = false;
};

struct HypothesisReport {
  double min_value = 1e300;  // min of Ric(ρ̇) + Δf along the samples
  int used = 0;
  int rejected = 0;  // no fiber root at the sampled point
  std::vector<std::string> diagnostics;
};

// Samples (x, v) with H(x, L_v) = c, flows backward over [−T, 0].
HypothesisReport hypothesis_check_energy_surface(const LagrangianSpec& spec, double c,
                                                 const HypothesisOptions& opts = {});

void dump_barrier_csv(const BarrierSlice& slice, std::ostream& os);

}  // namespace wkam
