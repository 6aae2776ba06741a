#include "wkam/weakkam.hpp"

#include "wkam/io.hpp"
#include "wkam/parallel.hpp"
#include "wkam/simd/kernels.hpp"
#include "wkam/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace wkam {

Grid::Grid(int dim, int N) : dim_(dim), N_(N) {
  if (dim < 1) throw ConfigError("grid dimension must be positive");
  if (N < 2) throw ConfigError("grid resolution must be at least 2");
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(N);
}

std::vector<int> Grid::coords(std::size_t node) const {
  std::vector<int> c(static_cast<std::size_t>(dim_));
  for (int a = dim_ - 1; a >= 0; --a) {
    c[static_cast<std::size_t>(a)] = static_cast<int>(node % static_cast<std::size_t>(N_));
    node /= static_cast<std::size_t>(N_);
  }
  return c;
}

std::size_t Grid::index(const std::vector<int>& c) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    int v = c[static_cast<std::size_t>(a)] % N_;
    if (v < 0) v += N_;
    idx = idx * static_cast<std::size_t>(N_) + static_cast<std::size_t>(v);
  }
  return idx;
}

Vec Grid::point(std::size_t node) const {
  const auto c = coords(node);
  Vec p(dim_);
  for (int a = 0; a < dim_; ++a) p[a] = c[static_cast<std::size_t>(a)] * dx();
  return p;
}

std::size_t Grid::nearest(const Vec& x) const {
  std::vector<int> c(static_cast<std::size_t>(dim_));
  for (int a = 0; a < dim_; ++a) c[static_cast<std::size_t>(a)] = static_cast<int>(std::lround(wrap01(x[a]) * N_));
  return index(c);
}

std::size_t Grid::shifted(std::size_t node, const std::vector<int>& offset) const {
  auto c = coords(node);
  for (int a = 0; a < dim_; ++a) c[static_cast<std::size_t>(a)] += offset[static_cast<std::size_t>(a)];
  return index(c);
}

double ValueFunction::oscillation() const {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

void ValueFunction::normalize() {
  const double a = values.at(0);
  for (double& v : values) v -= a;
}

namespace {
std::size_t source_row(const Grid& g, std::size_t row, const std::vector<int>& d, int sign);
}  // namespace

ActionKernel build_kernel(const LagrangianSpec& spec, const Grid& grid, double dt, int r, const KernelOptions& opts) {
  if (!(dt > 0.0)) throw ConfigError("kernel time step must be positive");
  if (r < 1) throw ConfigError("stencil radius must be at least 1");
  if (spec.dim() != grid.dim()) throw ConfigError("grid and Lagrangian dimensions differ");
  const double reach = r * grid.dx() / dt;
  if (reach > opts.v_max + 1e-12) throw ConfigError("stencil speed r*dx/dt exceeds v_max");
  if (2 * r + 1 > grid.N()) throw ConfigError("stencil wider than the grid");

  const int n = grid.dim();
  const std::size_t m = grid.size();
  ActionKernel K;
  K.grid = grid;
  K.dt = dt;
  K.r = r;

  std::vector<Mat> g(m);
  std::vector<double> f(m), phi(m);
  std::vector<Vec> pts(m);
  double fmax = -1e300, fmin = 1e300, wmax = 0.0, lam_min = 1e300;
  for (std::size_t i = 0; i < m; ++i) {
    pts[i] = grid.point(i);
    g[i] = spec.metric.g(pts[i]);
    f[i] = spec.f(pts[i]);
    phi[i] = spec.omega.phi(pts[i]);
    fmax = std::max(fmax, f[i]);
    fmin = std::min(fmin, f[i]);
    const Vec w = spec.omega.value(pts[i]);
    wmax = std::max(wmax, std::sqrt(w.dot(spec.metric.inverse(pts[i]) * w)));
    lam_min = std::min(lam_min, Eigen::SelfAdjointEigenSolver<Mat>(g[i]).eigenvalues().minCoeff());
  }
  const double expected = (wmax + std::sqrt(2.0 * (fmax - fmin))) / std::sqrt(lam_min);
  if (reach < expected)
    K.warnings.push_back("stencil speed " + std::to_string(reach) + " is below the expected optimal speed " +
                         std::to_string(expected));

  std::vector<int> d(static_cast<std::size_t>(n), -r);
  while (true) {
    K.offsets.push_back(d);
    int a = n - 1;
    while (a >= 0 && d[static_cast<std::size_t>(a)] == r) d[static_cast<std::size_t>(a--)] = -r;
    if (a < 0) break;
    ++d[static_cast<std::size_t>(a)];
  }

  const Vec& c = spec.omega.constants;
  K.cost.assign(K.offsets.size(), std::vector<double>(m));
  for (std::size_t j = 0; j < K.offsets.size(); ++j) {
    const auto& off = K.offsets[j];
    Vec disp(n);
    std::vector<int> neg(off.size());
    for (int a = 0; a < n; ++a) {
      disp[a] = off[static_cast<std::size_t>(a)] * grid.dx();
      neg[static_cast<std::size_t>(a)] = -off[static_cast<std::size_t>(a)];
    }
    const Vec w = disp / dt;
    const double cw = c.size() ? c.dot(disp) : 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      const std::size_t y = grid.shifted(x, neg);
      const double kin = 0.25 * w.dot((g[x] + g[y]) * w);
      const double pot = 0.5 * (f[x] + f[y]);
      K.cost[j][x] = dt * (kin - pot + spec.c) - (cw + phi[x] - phi[y]);
    }
  }
  const std::size_t rows = m / static_cast<std::size_t>(grid.N());
  K.row_src_minus.assign(K.offsets.size(), std::vector<std::uint32_t>(rows));
  K.row_src_plus = K.row_src_minus;
  for (std::size_t j = 0; j < K.offsets.size(); ++j)
    for (std::size_t row = 0; row < rows; ++row) {
      K.row_src_minus[j][row] = static_cast<std::uint32_t>(source_row(grid, row, K.offsets[j], 1));
      K.row_src_plus[j][row] = static_cast<std::uint32_t>(source_row(grid, row, K.offsets[j], -1));
    }
  return K;
}

namespace {

struct RowRun {
  std::size_t dst, src, len;
};

// For a shift s along the last axis, the two contiguous pieces of a row.
void row_runs(int N, int shift, RowRun out[2]) {
  int s = shift % N;
  if (s < 0) s += N;
  const auto n = static_cast<std::size_t>(N), sz = static_cast<std::size_t>(s);
  out[0] = {sz, 0, n - sz};
  out[1] = {0, n - sz, sz};
}

// Row index of the source row for a destination row shifted by −sign·d.
std::size_t source_row(const Grid& g, std::size_t row, const std::vector<int>& d, int sign) {
  const int n = g.dim();
  if (n == 1) return 0;
  std::size_t rem = row;
  std::vector<int> c(static_cast<std::size_t>(n - 1));
  for (int a = n - 2; a >= 0; --a) {
    c[static_cast<std::size_t>(a)] = static_cast<int>(rem % static_cast<std::size_t>(g.N()));
    rem /= static_cast<std::size_t>(g.N());
  }
  std::size_t idx = 0;
  for (int a = 0; a < n - 1; ++a) {
    int v = (c[static_cast<std::size_t>(a)] - sign * d[static_cast<std::size_t>(a)]) % g.N();
    if (v < 0) v += g.N();
    idx = idx * static_cast<std::size_t>(g.N()) + static_cast<std::size_t>(v);
  }
  return idx;
}

void check_grid(const ActionKernel& kernel, const ValueFunction& u) {
  if (!(kernel.grid == u.grid) || u.values.size() != kernel.grid.size())
    throw DomainError("value function and kernel grids differ");
}

}  // namespace

ValueFunction lax_oleinik_minus(const ActionKernel& kernel, const ValueFunction& u) {
  check_grid(kernel, u);
  const Grid& g = kernel.grid;
  const auto N = static_cast<std::size_t>(g.N());
  const std::size_t rows = g.size() / N;
  const auto& kt = simd::active();
  ValueFunction out{g, std::vector<double>(g.size(), std::numeric_limits<double>::infinity())};
  parallel_for(rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = 0; j < kernel.offsets.size(); ++j) {
      const auto& d = kernel.offsets[j];
      RowRun runs[2];
      row_runs(g.N(), d.back(), runs);
      const double* K = kernel.cost[j].data();
      for (std::size_t row = lo; row < hi; ++row) {
        const std::size_t dst = row * N, src = kernel.row_src_minus[j][row] * N;
        for (const auto& rr : runs)
          if (rr.len)
            kt.minplus_accumulate(out.values.data() + dst + rr.dst, u.values.data() + src + rr.src,
                                  K + dst + rr.dst, rr.len);
      }
    }
  });
  return out;
}

ValueFunction lax_oleinik_plus(const ActionKernel& kernel, const ValueFunction& u) {
  check_grid(kernel, u);
  const Grid& g = kernel.grid;
  const auto N = static_cast<std::size_t>(g.N());
  const std::size_t rows = g.size() / N;
  const auto& kt = simd::active();
  ValueFunction out{g, std::vector<double>(g.size(), -std::numeric_limits<double>::infinity())};
  parallel_for(rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = 0; j < kernel.offsets.size(); ++j) {
      const auto& d = kernel.offsets[j];
      RowRun runs[2];
      row_runs(g.N(), -d.back(), runs);
      const double* K = kernel.cost[j].data();
      for (std::size_t row = lo; row < hi; ++row) {
        const std::size_t dst = row * N, src = kernel.row_src_plus[j][row] * N;
        for (const auto& rr : runs)
          if (rr.len)
            kt.maxminus_accumulate(out.values.data() + dst + rr.dst, u.values.data() + src + rr.src,
                                   K + src + rr.src, rr.len);
      }
    }
  });
  return out;
}

ValueFunction lax_oleinik_minus_argmin(const ActionKernel& kernel, const ValueFunction& u,
                                       std::vector<std::uint32_t>& argmin) {
  check_grid(kernel, u);
  const Grid& g = kernel.grid;
  ValueFunction out{g, std::vector<double>(g.size(), std::numeric_limits<double>::infinity())};
  argmin.assign(g.size(), 0);
  std::vector<std::vector<int>> neg;
  for (const auto& d : kernel.offsets) {
    std::vector<int> m(d.size());
    for (std::size_t a = 0; a < d.size(); ++a) m[a] = -d[a];
    neg.push_back(std::move(m));
  }
  parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t x = lo; x < hi; ++x)
      for (std::size_t j = 0; j < kernel.offsets.size(); ++j) {
        const double c = u.values[g.shifted(x, neg[j])] + kernel.cost[j][x];
        if (c < out.values[x]) {
          out.values[x] = c;
          argmin[x] = static_cast<std::uint32_t>(j);
        }
      }
  });
  return out;
}

double fixed_point_residual(const ActionKernel& kernel, const ValueFunction& u, double c) {
  ValueFunction t = lax_oleinik_minus(kernel, u);
  for (double& v : t.values) v += c * kernel.dt;
  return simd::active().max_abs_diff(t.values.data(), u.values.data(), t.values.size());
}

CriticalValueResult estimate_critical_value(const ActionKernel& kernel, double tol, int max_iters) {
  return estimate_critical_value(kernel, tol, max_iters,
                                 ValueFunction{kernel.grid, std::vector<double>(kernel.grid.size(), 0.0)});
}

CriticalValueResult estimate_critical_value(const ActionKernel& kernel, double tol, int max_iters,
                                            const ValueFunction& u0) {
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  check_grid(kernel, u0);
  const auto& kt = simd::active();
  CriticalValueResult res;
  auto& est = res.estimate;
  ValueFunction u = u0;
  auto tail_c = [&] {
    const std::size_t q = est.shifts.size();
    const std::size_t start = q - std::max<std::size_t>(1, q / 4);
    const double mean = std::accumulate(est.shifts.begin() + static_cast<std::ptrdiff_t>(start), est.shifts.end(), 0.0) /
                        static_cast<double>(q - start);
    return -mean / kernel.dt;
  };
  for (int it = 1; it <= max_iters; ++it) {
    ValueFunction w = lax_oleinik_minus(kernel, u);
    const double m = kt.min_value(w.values.data(), w.values.size());
    for (double& v : w.values) v -= m;
    const double change = kt.max_abs_diff(w.values.data(), u.values.data(), w.values.size());
    u = std::move(w);
    est.shifts.push_back(m);
    est.changes.push_back(change);
    est.iterations = it;
    if (change <= tol) {
      est.c = tail_c();
      est.residual = fixed_point_residual(kernel, u, est.c);
      if (est.residual <= tol) {
        est.converged = true;
        break;
      }
    }
  }
  if (!est.converged) {
    est.c = tail_c();
    est.residual = fixed_point_residual(kernel, u, est.c);
  }
  u.normalize();
  res.u = std::move(u);
  return res;
}

ValueFunction dp_action(const ActionKernel& kernel, std::size_t x, int t_steps) {
  if (t_steps < 1) throw ConfigError("dp_action needs t_steps >= 1");
  ValueFunction last;
  dp_action_visit(kernel, x, t_steps, [&](int k, const ValueFunction& v) {
    if (k == t_steps) last = v;
  });
  return last;
}

Vec CalibratedCurve::velocity(const ActionKernel& kernel, std::size_t k) const {
  const auto& d = kernel.offsets[offset[k]];
  Vec v(static_cast<Eigen::Index>(d.size()));
  for (std::size_t a = 0; a < d.size(); ++a) v[static_cast<Eigen::Index>(a)] = d[a] * kernel.grid.dx() / kernel.dt;
  return v;
}

CalibratedCurve backward_calibrated_curve(const ActionKernel& kernel, const ValueFunction& u, double c, std::size_t x,
                                          int steps) {
  check_grid(kernel, u);
  const Grid& g = kernel.grid;
  CalibratedCurve cv;
  cv.nodes.push_back(x);
  cv.lifted.push_back(g.point(x));
  std::size_t cur = x;
  for (int k = 0; k < steps; ++k) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bj = 0, by = cur;
    for (std::size_t j = 0; j < kernel.offsets.size(); ++j) {
      std::vector<int> neg(kernel.offsets[j]);
      for (int& e : neg) e = -e;
      const std::size_t y = g.shifted(cur, neg);
      const double val = u.values[y] + kernel.cost[j][cur];
      if (val < best) {
        best = val;
        bj = j;
        by = y;
      }
    }
    const double defect = std::abs(u.values[cur] - u.values[by] - kernel.cost[bj][cur] - c * kernel.dt);
    Vec step(g.dim());
    for (int a = 0; a < g.dim(); ++a) step[a] = kernel.offsets[bj][static_cast<std::size_t>(a)] * g.dx();
    cv.lifted.push_back(cv.lifted.back() - step);
    cv.nodes.push_back(by);
    cv.offset.push_back(bj);
    cv.defects.push_back(defect);
    cv.max_defect = std::max(cv.max_defect, defect);
    cur = by;
  }
  return cv;
}

double path_slack(const ActionKernel& kernel, const ValueFunction& u, double c, const GridPath& path) {
  double s = 0.0;
  for (std::size_t k = 0; k < path.offsets.size(); ++k)
    s += kernel.cost[path.offsets[k]][path.nodes[k + 1]] + c * kernel.dt;
  return s - (u.values[path.nodes.back()] - u.values[path.nodes.front()]);
}

DominationReport verify_domination(const ActionKernel& kernel, const ValueFunction& u, double c, double tol,
                                   int curves, int steps, std::uint64_t seed) {
  check_grid(kernel, u);
  DominationReport rep;
  const Grid& g = kernel.grid;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> node(0, g.size() - 1), off(0, kernel.offsets.size() - 1);
  for (int i = 0; i < curves; ++i) {
    GridPath p;
    p.nodes.push_back(node(rng));
    for (int k = 0; k < steps; ++k) {
      const std::size_t j = off(rng);
      p.offsets.push_back(j);
      p.nodes.push_back(g.shifted(p.nodes.back(), kernel.offsets[j]));
    }
    const double s = path_slack(kernel, u, c, p);
    rep.min_slack = std::min(rep.min_slack, s);
    if (s < -2.0 * tol) rep.violations.push_back(std::move(p));
    ++rep.curves;
  }
  // A calibrated curve run forward in time.
  const CalibratedCurve cv = backward_calibrated_curve(kernel, u, c, node(rng), steps);
  GridPath cp;
  cp.nodes.assign(cv.nodes.rbegin(), cv.nodes.rend());
  cp.offsets.assign(cv.offset.rbegin(), cv.offset.rend());
  rep.calibrated_slack = path_slack(kernel, u, c, cp);
  rep.min_slack = std::min(rep.min_slack, rep.calibrated_slack);
  if (rep.calibrated_slack < -2.0 * tol) rep.violations.push_back(cp);
  rep.ok = rep.violations.empty();
  return rep;
}

GradientCheckReport prop21_gradient_check(const LagrangianSpec& spec, const ActionKernel& kernel, std::size_t x,
                                          std::size_t y, int t_steps, const GradientCheckOptions& opts) {
  GradientCheckReport rep;
  const Grid& g = kernel.grid;
  const int n = g.dim();
  const double t = t_steps * kernel.dt;
  const int span = opts.span_cells > 0 ? opts.span_cells : t_steps;
  const double h = span * g.dx();
  rep.tolerance = std::max(5e-2, 4.0 * g.dx());

  const ValueFunction dp = dp_action(kernel, x, t_steps);
  rep.dp_value = dp[y];
  const auto sols = shoot_minimizers(spec, g.point(x), g.point(y), t, opts.starts, opts.seed, opts.flow_dt);
  if (sols.empty()) {
    rep.skipped = true;
    rep.diagnostic = "shooting found no extremal";
    return rep;
  }
  rep.shooting_action = sols[0].action;
  if (sols.size() >= 2 && sols[1].action - sols[0].action <= opts.distinct_tol) {
    rep.skipped = true;
    rep.diagnostic = "two minimizers within tolerance: A_t(x, .) not differentiable at y";
    return rep;
  }
  if (std::abs(sols[0].action - rep.dp_value) > opts.match_tol) {
    rep.skipped = true;
    rep.diagnostic = "shooting minimizer does not match the DP action";
    return rep;
  }
  FlowOptions fo;
  const auto steps = std::max<long long>(1, std::llround(std::ceil(t / opts.flow_dt - 1e-9)));
  fo.dt = t / static_cast<double>(steps);
  const Trajectory tr = integrate_flow(spec, {g.point(x), sols[0].v0}, t, fo);
  rep.lv_end = legendre(spec, tr.terminal()).p;
  rep.lv_start = legendre(spec, tr.initial()).p;
  rep.fd_grad_y = Vec(n);
  rep.fd_grad_x = Vec(n);
  for (int a = 0; a < n; ++a) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(a)] = span;
    std::vector<int> me(e);
    me[static_cast<std::size_t>(a)] = -span;
    rep.fd_grad_y[a] = (dp[g.shifted(y, e)] - dp[g.shifted(y, me)]) / (2.0 * h);
    const double ap = dp_action(kernel, g.shifted(x, e), t_steps)[y];
    const double am = dp_action(kernel, g.shifted(x, me), t_steps)[y];
    rep.fd_grad_x[a] = (ap - am) / (2.0 * h);
  }
  rep.max_error = std::max((rep.fd_grad_y - rep.lv_end).cwiseAbs().maxCoeff(),
                           (rep.fd_grad_x + rep.lv_start).cwiseAbs().maxCoeff());
  rep.ok = rep.max_error <= rep.tolerance;
  return rep;
}

void dump_value_csv(const ValueFunction& u, std::ostream& os) {
  const Grid& g = u.grid;
  CsvWriter w(os);
  std::vector<std::string> header;
  for (int a = 1; a <= g.dim(); ++a) header.push_back("i" + std::to_string(a));
  for (int a = 1; a <= g.dim(); ++a) header.push_back("x" + std::to_string(a));
  header.push_back("u");
  w.header(header);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto c = g.coords(i);
    std::vector<double> row(c.begin(), c.end());
    const Vec p = g.point(i);
    for (int a = 0; a < g.dim(); ++a) row.push_back(p[a]);
    row.push_back(u[i]);
    w.row(row);
  }
}

}  // namespace wkam
