#include "wkam/barrier.hpp"

#include "wkam/io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace wkam {

BarrierSlice peierls_barrier(const ActionKernel& kernel, double c, std::size_t x, const BarrierOptions& opts) {
  if (opts.horizons.empty()) throw ConfigError("barrier needs at least one horizon");
  std::vector<int> steps;
  for (double t : opts.horizons) {
    const int k = static_cast<int>(std::lround(t / kernel.dt));
    if (k < 1) throw ConfigError("horizon shorter than one kernel step");
    steps.push_back(k);
  }
  std::sort(steps.begin(), steps.end());
  BarrierSlice sl;
  sl.base = x;
  for (int k : steps) sl.horizons.push_back(k * kernel.dt);
  const Grid& g = kernel.grid;
  std::vector<double> run(g.size(), 1e300), prev;
  std::size_t next = 0;
  dp_action_visit(kernel, x, steps.back(), [&](int k, const ValueFunction& v) {
    if (next >= steps.size() || k != steps[next]) return;
    if (next + 1 == steps.size()) prev = run;
    const double ct = c * k * kernel.dt;
    for (std::size_t i = 0; i < run.size(); ++i) run[i] = std::min(run[i], v.values[i] + ct);
    ++next;
  });
  sl.h = ValueFunction{g, run};
  if (steps.size() >= 2) {
    for (std::size_t i = 0; i < run.size(); ++i) sl.max_change = std::max(sl.max_change, std::abs(run[i] - prev[i]));
    sl.stable = sl.max_change <= 5.0 * opts.tol;
  } else {
    sl.stable = false;
  }
  if (!sl.stable) sl.suggested_horizon = 2.0 * sl.horizons.back();
  return sl;
}

std::vector<BarrierSlice> peierls_barriers(const ActionKernel& kernel, double c, const std::vector<std::size_t>& bases,
                                           const BarrierOptions& opts) {
  std::vector<BarrierSlice> out;
  out.reserve(bases.size());
  for (std::size_t b : bases) out.push_back(peierls_barrier(kernel, c, b, opts));
  return out;
}

std::vector<std::size_t> lattice_sample(const Grid& grid, int stride) {
  if (stride < 1) throw ConfigError("stride must be at least 1");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto c = grid.coords(i);
    if (std::all_of(c.begin(), c.end(), [&](int v) { return v % stride == 0; })) out.push_back(i);
  }
  return out;
}

AubryReport aubry_set(const ActionKernel& kernel, double c, const std::vector<std::size_t>& sample, double tol_A,
                      const BarrierOptions& opts) {
  AubryReport rep;
  rep.tol_A = tol_A;
  rep.sampled = sample;
  for (std::size_t x : sample) {
    const BarrierSlice sl = peierls_barrier(kernel, c, x, opts);
    const double hxx = sl.h[x];
    rep.diagonal.push_back(hxx);
    if (!sl.stable) rep.unstable = true;
    if (hxx <= tol_A) rep.nodes.push_back(x);
  }
  if (rep.nodes.empty()) throw DomainError("empty Aubry set at tol_A = " + std::to_string(tol_A));
  return rep;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

}  // namespace

QuotientComponents quotient_components(const std::vector<std::size_t>& nodes, const std::vector<double>& delta,
                                       double tol) {
  const std::size_t m = nodes.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (delta[i * m + j] <= tol) {
        const std::size_t a = find_root(parent, i), b = find_root(parent, j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  QuotientComponents q;
  q.tol = tol;
  q.label.resize(m);
  std::vector<std::size_t> root_id(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = find_root(parent, i);
    if (root_id[r] == m) {
      root_id[r] = q.count++;
      q.representatives.push_back(nodes[i]);
    } else {
      q.representatives[root_id[r]] = std::min(q.representatives[root_id[r]], nodes[i]);
    }
    q.label[i] = root_id[r];
  }
  return q;
}

MatherQuotientReport mather_quotient(const ActionKernel& kernel, double c, const std::vector<std::size_t>& nodes,
                                     double tol_Q, const BarrierOptions& opts) {
  MatherQuotientReport rep;
  rep.nodes = nodes;
  rep.tol_Q = tol_Q;
  const std::size_t m = nodes.size();
  const auto slices = peierls_barriers(kernel, c, nodes, opts);
  std::vector<double> h(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) h[i * m + j] = slices[i].h[nodes[j]];
  rep.delta.assign(m * m, 0.0);
  rep.min_delta = 1e300;
  rep.max_self = -1e300;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double d = h[i * m + j] + h[j * m + i];
      rep.delta[i * m + j] = d;
      rep.min_delta = std::min(rep.min_delta, d);
      if (i == j) rep.max_self = std::max(rep.max_self, d);
    }
  rep.triangle_excess = -1e300;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k)
        rep.triangle_excess = std::max(rep.triangle_excess, h[i * m + j] - h[i * m + k] - h[k * m + j]);
  rep.at_tol = quotient_components(nodes, rep.delta, tol_Q);
  rep.at_double_tol = quotient_components(nodes, rep.delta, 2.0 * tol_Q);
  return rep;
}

double grid_laplacian(const MetricField& metric, const Grid& grid, const std::vector<double>& values, std::size_t x,
                      int span) {
  const int n = grid.dim();
  const double h = span * grid.dx();
  const Vec p = grid.point(x);
  auto W = [&](const Vec& q) { return Mat(metric.sqrt_det(q) * metric.inverse(q)); };
  auto at = [&](const std::vector<int>& off) {
    std::vector<int> o(off);
    for (int& e : o) e *= span;
    return values[grid.shifted(x, o)];
  };
  std::vector<int> zero(static_cast<std::size_t>(n), 0);
  const double u0 = values[x];
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    Vec ea = Vec::Zero(n);
    ea[a] = h;
    std::vector<int> pa(zero), ma(zero);
    pa[static_cast<std::size_t>(a)] = 1;
    ma[static_cast<std::size_t>(a)] = -1;
    sum += (W(p + 0.5 * ea)(a, a) * (at(pa) - u0) - W(p - 0.5 * ea)(a, a) * (u0 - at(ma))) / (h * h);
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      std::vector<int> pp(pa), pm(pa), mp(ma), mm(ma);
      pp[static_cast<std::size_t>(b)] += 1;
      pm[static_cast<std::size_t>(b)] -= 1;
      mp[static_cast<std::size_t>(b)] += 1;
      mm[static_cast<std::size_t>(b)] -= 1;
      sum += (W(p + ea)(a, b) * (at(pp) - at(pm)) - W(p - ea)(a, b) * (at(mp) - at(mm))) / (4.0 * h * h);
    }
  }
  return sum / metric.sqrt_det(p);
}

SupportFunctionProbe support_function_probe(const LagrangianSpec& spec, const ActionKernel& kernel,
                                            const ValueFunction& u, double c, std::size_t x, int t_steps,
                                            const ProbeOptions& opts) {
  if (t_steps < 1) throw ConfigError("probe needs t_steps >= 1");
  const Grid& g = kernel.grid;
  SupportFunctionProbe pr;
  pr.base = x;
  pr.t_steps = t_steps;
  pr.t = t_steps * kernel.dt;
  pr.span = opts.span_cells > 0 ? opts.span_cells : t_steps;
  if (2 * pr.span >= g.N()) throw ConfigError("probe spacing too wide for the grid");
  pr.curve = backward_calibrated_curve(kernel, u, c, x, t_steps);
  pr.foot = pr.curve.nodes.back();
  const ValueFunction dp = dp_action(kernel, pr.foot, t_steps);
  std::vector<double> phi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) phi[i] = u[pr.foot] + dp[i] + c * pr.t;
  pr.touching = phi[x] - u[x];
  pr.from_above = 1e300;
  const int n = g.dim();
  std::vector<int> off(static_cast<std::size_t>(n), -opts.m);
  while (true) {
    std::vector<int> o(off);
    for (int& e : o) e *= pr.span;
    const std::size_t node = g.shifted(x, o);
    pr.stencil.push_back(node);
    pr.phi.push_back(phi[node]);
    pr.from_above = std::min(pr.from_above, phi[node] - u[node]);
    int a = n - 1;
    while (a >= 0 && off[static_cast<std::size_t>(a)] == opts.m) off[static_cast<std::size_t>(a--)] = -opts.m;
    if (a < 0) break;
    ++off[static_cast<std::size_t>(a)];
  }
  pr.laplacian = grid_laplacian(spec.metric, g, phi, x, pr.span);
  return pr;
}

LaplacianEstimate barrier_laplacian_estimate(const LagrangianSpec& spec, const ActionKernel& kernel,
                                             const ValueFunction& u, double c, std::size_t x,
                                             const std::vector<int>& t_steps_list, const ProbeOptions& opts) {
  if (t_steps_list.empty()) throw ConfigError("need at least one probe time");
  LaplacianEstimate est;
  est.estimate = 1e300;
  for (int k : t_steps_list) {
    est.probes.push_back(support_function_probe(spec, kernel, u, c, x, k, opts));
    est.estimate = std::min(est.estimate, est.probes.back().laplacian);
  }
  return est;
}

HypothesisReport hypothesis_check_energy_surface(const LagrangianSpec& spec, double c, const HypothesisOptions& opts) {
  HypothesisReport rep;
  const int n = spec.dim();
  const ScalarField fh = opts.mane_potential ? half_norm_squared(spec.metric, spec.omega) : spec.f;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  FlowOptions fo;
  fo.dt = opts.flow_dt;
  for (int s = 0; s < opts.samples; ++s) {
    Vec x(n), d(n);
    for (int a = 0; a < n; ++a) x[a] = unif(rng);
    for (int a = 0; a < n; ++a) d[a] = gauss(rng);
    d /= std::sqrt(d.dot(spec.metric.g(x) * d));
    // ½|v|² + f − c_const = c along the fiber
    const double sq = 2.0 * (c + spec.c - spec.f(x));
    if (sq < 0.0) {
      ++rep.rejected;
      rep.diagnostics.push_back("no energy-surface root at sample " + std::to_string(s));
      continue;
    }
    try {
      const Trajectory tr = integrate_flow(spec, {x, std::sqrt(sq) * d}, -opts.T, fo);
      for (std::size_t i = 0; i < tr.size(); ++i)
        rep.min_value = std::min(rep.min_value, ricci_at(spec.metric, tr.x[i], tr.v[i]) +
                                                    laplacian(spec.metric, fh, tr.x[i]));
      ++rep.used;
    } catch (const NumericalError& e) {
      ++rep.rejected;
      rep.diagnostics.push_back(e.what());
    }
  }
  return rep;
}

void dump_barrier_csv(const BarrierSlice& slice, std::ostream& os) {
  const Grid& g = slice.h.grid;
  CsvWriter w(os);
  std::vector<std::string> header;
  const char* names[] = {"ix", "iy", "iz"};
  for (int a = 0; a < g.dim(); ++a) header.push_back(a < 3 ? names[a] : "i" + std::to_string(a + 1));
  header.push_back("h");
  w.header(header);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto c = g.coords(i);
    std::vector<double> row(c.begin(), c.end());
    row.push_back(slice.h[i]);
    w.row(row);
  }
}

}  // namespace wkam
