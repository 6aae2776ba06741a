#pragma once

#include "wkam/fields.hpp"
#include "wkam/geometry.hpp"

#include <iosfwd>
#include <vector>

namespace wkam {

// L(x,v) = ½ g_x(v,v) − f(x) − ω_x(v) + c
struct LagrangianSpec {
  MetricField metric;
  ScalarField f;
  ClosedOneForm omega;
  double c = 0.0;

  int dim() const { return metric.dim(); }
  // L̆(x,v) = L(x,−v): same metric and potential, ω ↦ −ω.
  LagrangianSpec reversed() const { return {metric, f, omega.negated(), c}; }
};

// Mañé Lagrangian ½ g(v − X, v − X) with X = ω♯, written in the toolkit
// convention (potential −½ g(ω♯, ω♯), constant 0).
LagrangianSpec mane_lagrangian(const MetricField& metric, const ClosedOneForm& omega);

struct PhaseState {
  Vec x;  // lifted chart coordinates
  Vec v;
};

struct CotangentState {
  Vec x;
  Vec p;
};

double lagrangian(const LagrangianSpec& spec, const Vec& x, const Vec& v);
CotangentState legendre(const LagrangianSpec& spec, const PhaseState& s);
PhaseState inverse_legendre(const LagrangianSpec& spec, const CotangentState& s);
double hamiltonian(const LagrangianSpec& spec, const CotangentState& s);
// H(x, L_v(x,v)) = ½ g(v,v) + f(x) − c
double energy(const LagrangianSpec& spec, const PhaseState& s);

// ẍ^k = −Γ^k_ij ẋ^i ẋ^j − g^{km} ∂_m f
Vec el_acceleration(const LagrangianSpec& spec, const Vec& x, const Vec& v);
PhaseState el_step(const LagrangianSpec& spec, const PhaseState& s, double dt);

struct FlowOptions {
  double dt = 1e-3;
  double v_max = 10.0;
};

// Samples at multiples of dt with strictly increasing t. A backward flow
// (T < 0) stores t in [T, 0]; its initial state is the last sample.
struct Trajectory {
  double dt = 0.0;
  bool backward = false;
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;

  std::size_t size() const { return t.size(); }
  PhaseState state(std::size_t i) const { return {x[i], v[i]}; }
  PhaseState initial() const { return backward ? state(size() - 1) : state(0); }
  PhaseState terminal() const { return backward ? state(0) : state(size() - 1); }
  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }
  // Cubic Hermite interpolant of x and its exact derivative.
  PhaseState eval(double s) const;
};

// Throws NumericalError when |v| exceeds v_max.
Trajectory integrate_flow(const LagrangianSpec& spec, const PhaseState& s0, double T,
                          const FlowOptions& opts = {});

// Composite Simpson for ∫(½g − f + c) plus the exact unwrapped ω integral.
double action(const LagrangianSpec& spec, const Trajectory& traj);

// Canonical equations ẋ = H_p, ṗ = −H_x, integrated with RK4.
CotangentState hamiltonian_step(const LagrangianSpec& spec, const CotangentState& s, double dt);
std::vector<CotangentState> integrate_hamiltonian(const LagrangianSpec& spec, const CotangentState& s0,
                                                  double T, double dt);

void dump_trajectory_csv(const Trajectory& traj, std::ostream& os);

}  // namespace wkam
