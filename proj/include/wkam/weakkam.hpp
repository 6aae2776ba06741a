#pragma once

#include "wkam/dynamics.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wkam {

// Uniform periodic grid with N nodes per axis; the last axis varies fastest.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, int N);

  int dim() const { return dim_; }
  int N() const { return N_; }
  double dx() const { return 1.0 / N_; }
  std::size_t size() const { return size_; }

  std::vector<int> coords(std::size_t node) const;
  std::size_t index(const std::vector<int>& coords) const;  // wraps periodically
  Vec point(std::size_t node) const;
  std::size_t nearest(const Vec& x) const;
  // node shifted by an integer offset, periodically
  std::size_t shifted(std::size_t node, const std::vector<int>& offset) const;

  bool operator==(const Grid& o) const { return dim_ == o.dim_ && N_ == o.N_; }

 private:
  int dim_ = 0;
  int N_ = 0;
  std::size_t size_ = 0;
};

struct ValueFunction {
  Grid grid;
  std::vector<double> values;

  double operator[](std::size_t i) const { return values[i]; }
  double oscillation() const;  // sup − inf
  void normalize();            // subtract the anchor value at node 0
};

// One-step action A_dt(y → x) for y = x − d_j over the box stencil |d_j|∞ ≤ r.
// Offsets are in lexicographic order; the tie-break picks the first.
struct ActionKernel {
  Grid grid;
  double dt = 0.0;
  int r = 0;
  std::vector<std::vector<int>> offsets;
  std::vector<std::vector<double>> cost;  // cost[j][x] = A_dt(x − d_j → x)
  std::vector<std::string> warnings;
  // Source row of each destination row for T⁻ (shift −d_j) and T⁺ (shift +d_j).
  std::vector<std::vector<std::uint32_t>> row_src_minus, row_src_plus;

  std::size_t stencil_size() const { return offsets.size(); }
  // A_dt(y → x) for an explicit offset index
  double step_cost(std::size_t j, std::size_t x) const { return cost[j][x]; }
};

struct KernelOptions {
  double v_max = 10.0;
};

ActionKernel build_kernel(const LagrangianSpec& spec, const Grid& grid, double dt, int r,
                          const KernelOptions& opts = {});

// T⁻u(x) = min_y {u(y) + A(y → x)}
ValueFunction lax_oleinik_minus(const ActionKernel& kernel, const ValueFunction& u);
// T⁺u(x) = max_y {u(y) − A(x → y)}
ValueFunction lax_oleinik_plus(const ActionKernel& kernel, const ValueFunction& u);

// T⁻ with the minimizing offset index per node (first offset on ties).
ValueFunction lax_oleinik_minus_argmin(const ActionKernel& kernel, const ValueFunction& u,
                                       std::vector<std::uint32_t>& argmin);

struct CriticalValueEstimate {
  double c = 0.0;
  double residual = 0.0;  // ‖T⁻u + c·dt − u‖∞
  int iterations = 0;
  bool converged = false;
  std::vector<double> shifts;   // per-iteration min-shift
  std::vector<double> changes;  // per-iteration ‖u_{k+1} − u_k‖∞
};

struct CriticalValueResult {
  CriticalValueEstimate estimate;
  ValueFunction u;
};

CriticalValueResult estimate_critical_value(const ActionKernel& kernel, double tol, int max_iters);
CriticalValueResult estimate_critical_value(const ActionKernel& kernel, double tol, int max_iters,
                                            const ValueFunction& u0);

// ‖T⁻u + c·dt − u‖∞
double fixed_point_residual(const ActionKernel& kernel, const ValueFunction& u, double c);

inline constexpr double kBig = 1e9;

// v_0 = 0 at x, kBig elsewhere; v_{k+1} = min(T⁻v_k, kBig).
ValueFunction dp_action(const ActionKernel& kernel, std::size_t x, int t_steps);
// All iterates v_1..v_{t_steps} are passed to the visitor, which avoids
// recomputation for horizon ladders.
template <class Visitor>
void dp_action_visit(const ActionKernel& kernel, std::size_t x, int t_steps, Visitor&& visit);

struct CalibratedCurve {
  std::vector<std::size_t> nodes;   // nodes[k] = ρ(−k·dt)
  std::vector<Vec> lifted;          // unwrapped positions, lifted[0] = point(x)
  std::vector<std::size_t> offset;  // offset index of the step nodes[k+1] → nodes[k]
  std::vector<double> defects;      // |u(ρ_k) − u(ρ_{k+1}) − A − c·dt|
  double max_defect = 0.0;

  // Forward-time velocity of the step from nodes[k+1] to nodes[k].
  Vec velocity(const ActionKernel& kernel, std::size_t k) const;
};

CalibratedCurve backward_calibrated_curve(const ActionKernel& kernel, const ValueFunction& u, double c,
                                          std::size_t x, int steps);

struct GridPath {
  std::vector<std::size_t> nodes;         // in forward time
  std::vector<std::size_t> offsets;       // offset index of each step
};

struct DominationReport {
  int curves = 0;
  double min_slack = 1e300;
  double calibrated_slack = 0.0;  // slack along a calibrated curve
  std::vector<GridPath> violations;
  bool ok = false;
};

// slack = Σ A + c·dt·steps − (u(end) − u(start)) along random grid paths.
DominationReport verify_domination(const ActionKernel& kernel, const ValueFunction& u, double c, double tol,
                                   int curves, int steps, std::uint64_t seed);
double path_slack(const ActionKernel& kernel, const ValueFunction& u, double c, const GridPath& path);

struct GradientCheckReport {
  bool skipped = false;
  std::string diagnostic;
  Vec fd_grad_y, lv_end;      // d_y A_t vs L_v(ρ(t), ρ̇(t))
  Vec fd_grad_x, lv_start;    // d_x A_t vs −L_v(ρ(0), ρ̇(0))
  double dp_value = 0.0;
  double shooting_action = 0.0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool ok = false;
};

struct GradientCheckOptions {
  int span_cells = 0;      // 0 selects t_steps cells
  double match_tol = 5e-2;  // shooting action vs DP value
  double distinct_tol = 1e-3;
  int starts = 16;
  std::uint64_t seed = 1;
  double flow_dt = 1e-3;
};

// Central differences of the DP action against the Legendre momenta of the
// shooting minimizer from node x to node y.
GradientCheckReport prop21_gradient_check(const LagrangianSpec& spec, const ActionKernel& kernel, std::size_t x,
                                          std::size_t y, int t_steps, const GradientCheckOptions& opts = {});

void dump_value_csv(const ValueFunction& u, std::ostream& os);

template <class Visitor>
void dp_action_visit(const ActionKernel& kernel, std::size_t x, int t_steps, Visitor&& visit) {
  ValueFunction v{kernel.grid, std::vector<double>(kernel.grid.size(), kBig)};
  v.values[x] = 0.0;
  for (int k = 1; k <= t_steps; ++k) {
    v = lax_oleinik_minus(kernel, v);
    for (double& e : v.values)
      if (e > kBig) e = kBig;
    visit(k, static_cast<const ValueFunction&>(v));
  }
}

}  // namespace wkam
