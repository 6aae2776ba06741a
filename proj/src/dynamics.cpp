#include "wkam/dynamics.hpp"

#include "wkam/io.hpp"

#include <cmath>
#include <ostream>
#include <algorithm>
#include <string>

namespace wkam {

LagrangianSpec mane_lagrangian(const MetricField& metric, const ClosedOneForm& omega) {
  return {metric, half_norm_squared(metric, omega).scaled(-1.0), omega, 0.0};
}

double lagrangian(const LagrangianSpec& spec, const Vec& x, const Vec& v) {
  return 0.5 * v.dot(spec.metric.g(x) * v) - spec.f(x) - spec.omega.value(x).dot(v) + spec.c;
}

CotangentState legendre(const LagrangianSpec& spec, const PhaseState& s) {
  return {s.x, spec.metric.g(s.x) * s.v - spec.omega.value(s.x)};
}

PhaseState inverse_legendre(const LagrangianSpec& spec, const CotangentState& s) {
  return {s.x, spec.metric.inverse(s.x) * (s.p + spec.omega.value(s.x))};
}

double hamiltonian(const LagrangianSpec& spec, const CotangentState& s) {
  const Vec q = s.p + spec.omega.value(s.x);
  return 0.5 * q.dot(spec.metric.inverse(s.x) * q) + spec.f(s.x) - spec.c;
}

double energy(const LagrangianSpec& spec, const PhaseState& s) {
  return 0.5 * s.v.dot(spec.metric.g(s.x) * s.v) + spec.f(s.x) - spec.c;
}

Vec el_acceleration(const LagrangianSpec& spec, const Vec& x, const Vec& v) {
  Vec a = Vec::Zero(x.size());
  if (!spec.metric.is_constant()) {
    const auto G = christoffel_at(spec.metric, x);
    for (Eigen::Index k = 0; k < x.size(); ++k) a[k] = -v.dot(G[k] * v);
  }
  if (!spec.f.is_zero()) a -= spec.metric.inverse(x) * spec.f.grad(x);
  return a;
}

PhaseState el_step(const LagrangianSpec& spec, const PhaseState& s, double dt) {
  const Vec& x = s.x;
  const Vec& v = s.v;
  const Vec k1x = v, k1v = el_acceleration(spec, x, v);
  const Vec x2 = x + 0.5 * dt * k1x, v2 = v + 0.5 * dt * k1v;
  const Vec k2x = v2, k2v = el_acceleration(spec, x2, v2);
  const Vec x3 = x + 0.5 * dt * k2x, v3 = v + 0.5 * dt * k2v;
  const Vec k3x = v3, k3v = el_acceleration(spec, x3, v3);
  const Vec x4 = x + dt * k3x, v4 = v + dt * k3v;
  const Vec k4x = v4, k4v = el_acceleration(spec, x4, v4);
  return {x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
          v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

Trajectory integrate_flow(const LagrangianSpec& spec, const PhaseState& s0, double T, const FlowOptions& opts) {
  if (!(opts.dt > 0.0)) throw ConfigError("flow step dt must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(std::abs(T) / opts.dt));
  const double h = T < 0.0 ? -opts.dt : opts.dt;
  Trajectory tr;
  tr.dt = opts.dt;
  tr.backward = T < 0.0;
  tr.t.reserve(steps + 1);
  tr.x.reserve(steps + 1);
  tr.v.reserve(steps + 1);
  PhaseState s = s0;
  tr.t.push_back(0.0);
  tr.x.push_back(s.x);
  tr.v.push_back(s.v);
  for (std::size_t i = 1; i <= steps; ++i) {
    s = el_step(spec, s, h);
    const double speed = s.v.norm();
    if (!std::isfinite(speed) || speed > opts.v_max)
      throw NumericalError("velocity cap exceeded at t = " + std::to_string(h * static_cast<double>(i)) +
                           " (|v| = " + std::to_string(speed) + ")");
    tr.t.push_back(h * static_cast<double>(i));
    tr.x.push_back(s.x);
    tr.v.push_back(s.v);
  }
  if (tr.backward) {
    std::reverse(tr.t.begin(), tr.t.end());
    std::reverse(tr.x.begin(), tr.x.end());
    std::reverse(tr.v.begin(), tr.v.end());
  }
  return tr;
}

PhaseState Trajectory::eval(double s) const {
  if (size() == 1) return state(0);
  if (s <= t.front()) return state(0);
  if (s >= t.back()) return state(size() - 1);
  auto i = static_cast<std::size_t>((s - t.front()) / dt);
  if (i >= size() - 1) i = size() - 2;
  const double h = t[i + 1] - t[i];
  const double u = (s - t[i]) / h;
  const double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
  const double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
  const double d00 = 6 * u * u - 6 * u, d10 = 3 * u * u - 4 * u + 1;
  const double d01 = -6 * u * u + 6 * u, d11 = 3 * u * u - 2 * u;
  Vec xs = h00 * x[i] + h10 * h * v[i] + h01 * x[i + 1] + h11 * h * v[i + 1];
  Vec vs = (d00 * x[i] + d01 * x[i + 1]) / h + d10 * v[i] + d11 * v[i + 1];
  return {xs, vs};
}

double action(const LagrangianSpec& spec, const Trajectory& traj) {
  const std::size_t m = traj.size();
  if (m == 0) throw DomainError("action of an empty trajectory");
  if (m == 1) return 0.0;
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec& x = traj.x[i];
    const Vec& v = traj.v[i];
    y[i] = 0.5 * v.dot(spec.metric.g(x) * v) - spec.f(x) + spec.c;
  }
  const std::size_t intervals = m - 1;
  const double h = traj.dt;
  double s = 0.0;
  std::size_t simpson_end = intervals;
  if (intervals == 1) {
    s = 0.5 * h * (y[0] + y[1]);
    simpson_end = 0;
  } else if (intervals % 2 == 1) {
    // Simpson 3/8 on the last three intervals.
    simpson_end = intervals - 3;
    s += 3.0 * h / 8.0 * (y[m - 4] + 3.0 * y[m - 3] + 3.0 * y[m - 2] + y[m - 1]);
  }
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) s += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
  return s - spec.omega.line_integral(traj.x.front(), traj.x.back());
}

namespace {

Vec hamiltonian_dp(const LagrangianSpec& spec, const Vec& x, const Vec& p) {
  return spec.metric.inverse(x) * (p + spec.omega.value(x));
}

Vec hamiltonian_dx(const LagrangianSpec& spec, const Vec& x, const Vec& p) {
  const int n = spec.dim();
  const Mat ginv = spec.metric.inverse(x);
  const Vec q = p + spec.omega.value(x);
  const Vec X = ginv * q;
  Vec r = spec.omega.derivative(x) * X + spec.f.grad(x);
  if (!spec.metric.is_constant()) {
    const auto dg = spec.metric.dg(x);
    for (int k = 0; k < n; ++k) r[k] -= 0.5 * X.dot(dg[k] * X);
  }
  return r;
}

}  // namespace

CotangentState hamiltonian_step(const LagrangianSpec& spec, const CotangentState& s, double dt) {
  const Vec& x = s.x;
  const Vec& p = s.p;
  const Vec k1x = hamiltonian_dp(spec, x, p), k1p = -hamiltonian_dx(spec, x, p);
  const Vec x2 = x + 0.5 * dt * k1x, p2 = p + 0.5 * dt * k1p;
  const Vec k2x = hamiltonian_dp(spec, x2, p2), k2p = -hamiltonian_dx(spec, x2, p2);
  const Vec x3 = x + 0.5 * dt * k2x, p3 = p + 0.5 * dt * k2p;
  const Vec k3x = hamiltonian_dp(spec, x3, p3), k3p = -hamiltonian_dx(spec, x3, p3);
  const Vec x4 = x + dt * k3x, p4 = p + dt * k3p;
  const Vec k4x = hamiltonian_dp(spec, x4, p4), k4p = -hamiltonian_dx(spec, x4, p4);
  return {x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x), p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)};
}

std::vector<CotangentState> integrate_hamiltonian(const LagrangianSpec& spec, const CotangentState& s0, double T,
                                                  double dt) {
  const auto steps = static_cast<std::size_t>(std::llround(std::abs(T) / dt));
  const double h = T < 0.0 ? -dt : dt;
  std::vector<CotangentState> out{s0};
  out.reserve(steps + 1);
  for (std::size_t i = 0; i < steps; ++i) out.push_back(hamiltonian_step(spec, out.back(), h));
  return out;
}

void dump_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  const int n = traj.size() ? static_cast<int>(traj.x[0].size()) : 0;
  CsvWriter w(os);
  std::vector<std::string> header{"t"};
  for (int i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
  for (int i = 1; i <= n; ++i) header.push_back("v" + std::to_string(i));
  w.header(header);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<double> row{traj.t[k]};
    for (int i = 0; i < n; ++i) row.push_back(wrap01(traj.x[k][i]));
    for (int i = 0; i < n; ++i) row.push_back(traj.v[k][i]);
    w.row(row);
  }
}

}  // namespace wkam
