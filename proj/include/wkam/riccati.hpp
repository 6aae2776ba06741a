#pragma once

#include "wkam/variation.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace wkam {

// S_{n,k}(s): sine, identity or sinh branch by the sign of k.
double comparison_function(int n, double k, double s);
double comparison_derivative(int n, double k, double s);
// n·S'/S; k = 0 gives n/s, k < 0 gives √(−nk)·coth(√(−k/n)s).
double riccati_bound(int n, double k, double s);

struct ComparisonOptions {
  double s0 = 1e-4;
  double alpha0 = 0.0;  // 0 selects n/s0
  double horizon = 20.0;
  std::function<double(double)> slack;  // defaults to 0
  double det_floor = 1e-12;
  double tol = 1e-6;
};

struct ComparisonReport {
  std::vector<double> s, alpha, bound;
  double max_excess = -1e300;  // max of α − bound
  bool ok = false;
  std::string diagnostic;
};

// Integrates α̇ = −α²/n − k − slack(s) with RK4 on a geometric mesh.
ComparisonReport verify_comparison(int n, double k, const ComparisonOptions& opts = {});

struct RiccatiTrace {
  std::vector<double> s;
  std::vector<double> theta;
  std::vector<double> ric_plus_hessf;  // Ric(ρ̇) + Δf
  std::vector<double> residual;        // Θ̇ + Θ²/n + Ric + Δf
  std::vector<double> div_correction;  // div ω♯(ρ(s))
  std::vector<double> bound;           // comparison bound for k = min(0, min Ric + Δf)
  double k = 0.0;
  double max_residual = -1e300;  // over interior samples; ≤ 0 by the trace inequality
  bool truncated = false;
  std::string diagnostic;
};

// Θ = tr(A⁻¹Ȧ) on frame samples with det A > det_floor, stopping at the first
// sample that fails it.
RiccatiTrace theta_along(const JacobiFrame& frame, double det_floor = 1e-12);

struct MatrixRiccatiReport {
  std::vector<double> s;
  std::vector<double> residual;  // ‖Λ̇ + Λ² + R + ∇²f‖_F
  double max_residual = 0.0;
  double min_trace_gap = 1e300;  // min of tr(Λ²) − tr²(Λ)/n, scaled
};

// Λ̇ by five-point differences of the sampled Λ, over s ≥ s_min.
MatrixRiccatiReport matrix_riccati_residual(const JacobiFrame& frame, double s_min = 0.25,
                                            double det_floor = 1e-12);

void dump_trace_csv(const RiccatiTrace& trace, std::ostream& os);

}  // namespace wkam
