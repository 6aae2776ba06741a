#include "wkam/hodge.hpp"

#include "wkam/io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace wkam {

namespace {

std::vector<int> unit(int n, int a, int s = 1) {
  std::vector<int> e(static_cast<std::size_t>(n), 0);
  e[static_cast<std::size_t>(a)] = s;
  return e;
}

// The four b-edges around an a-edge at node i sit at i + offsets below.
std::vector<std::vector<int>> cross_offsets(int n, int a, int b) {
  std::vector<int> z(static_cast<std::size_t>(n), 0);
  auto o = [&](int da, int db) {
    std::vector<int> v(z);
    v[static_cast<std::size_t>(a)] = da;
    v[static_cast<std::size_t>(b)] = db;
    return v;
  };
  return {o(0, 0), o(1, 0), o(0, -1), o(1, -1)};
}

}  // namespace

Vec EdgeCochain::covector_at(std::size_t node) const {
  const int n = grid.dim();
  Vec w(n);
  for (int a = 0; a < n; ++a) {
    const std::size_t prev = grid.shifted(node, unit(n, a, -1));
    w[a] = 0.5 * (edge[static_cast<std::size_t>(a)][node] + edge[static_cast<std::size_t>(a)][prev]) / grid.dx();
  }
  return w;
}

Vec EdgeCochain::loop_class() const {
  const int n = grid.dim();
  Vec c = Vec::Zero(n);
  for (int a = 0; a < n; ++a) {
    std::size_t node = 0;
    for (int k = 0; k < grid.N(); ++k) {
      c[a] += edge[static_cast<std::size_t>(a)][node];
      node = grid.shifted(node, unit(n, a));
    }
  }
  return c;
}

EdgeCochain sample_form(const Grid& grid, const ClosedOneForm& omega) {
  const int n = grid.dim();
  EdgeCochain w{grid, std::vector<std::vector<double>>(static_cast<std::size_t>(n), std::vector<double>(grid.size()))};
  std::vector<double> phi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) phi[i] = omega.phi(grid.point(i));
  for (int a = 0; a < n; ++a)
    for (std::size_t i = 0; i < grid.size(); ++i)
      w.edge[static_cast<std::size_t>(a)][i] =
          omega.constants[a] * grid.dx() + phi[grid.shifted(i, unit(n, a))] - phi[i];
  return w;
}

HarmonicCheck is_harmonic(const MetricField& metric, const ClosedOneForm& omega, const Grid& grid, double tol_h) {
  HarmonicCheck r;
  for (std::size_t i = 0; i < grid.size(); ++i)
    r.sup_div = std::max(r.sup_div, std::abs(divergence_of_form(metric, omega, grid.point(i))));
  r.harmonic = r.sup_div <= tol_h;
  return r;
}

DiscreteHodge::DiscreteHodge(const MetricField& metric, const Grid& grid) : grid_(grid) {
  const int n = grid.dim();
  const double h = grid.dx();
  auto W = [&](const Vec& q) { return Mat(metric.sqrt_det(q) * metric.inverse(q)); };
  diag_.assign(static_cast<std::size_t>(n), std::vector<double>(grid.size()));
  cross_.assign(static_cast<std::size_t>(n),
                std::vector<std::vector<std::vector<double>>>(
                    static_cast<std::size_t>(n), std::vector<std::vector<double>>(4, std::vector<double>(grid.size()))));
  vol_.resize(grid.size());
  plus_.assign(static_cast<std::size_t>(n), std::vector<std::size_t>(grid.size()));
  minus_ = plus_;
  cross_node_.assign(static_cast<std::size_t>(n),
                     std::vector<std::vector<std::vector<std::size_t>>>(
                         static_cast<std::size_t>(n),
                         std::vector<std::vector<std::size_t>>(4, std::vector<std::size_t>(grid.size()))));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int a = 0; a < n; ++a) {
      plus_[static_cast<std::size_t>(a)][i] = grid.shifted(i, unit(n, a));
      minus_[static_cast<std::size_t>(a)][i] = grid.shifted(i, unit(n, a, -1));
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        const auto offs = cross_offsets(n, a, b);
        for (std::size_t k = 0; k < 4; ++k)
          cross_node_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][k][i] = grid.shifted(i, offs[k]);
      }
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec p = grid.point(i);
    vol_[i] = metric.sqrt_det(p);
    for (int a = 0; a < n; ++a) {
      Vec ca = p;
      ca[a] += 0.5 * h;
      diag_[static_cast<std::size_t>(a)][i] = W(ca)(a, a);
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        const auto offs = cross_offsets(n, a, b);
        for (int k = 0; k < 4; ++k) {
          Vec cb = p;
          for (int e = 0; e < n; ++e) cb[e] += offs[static_cast<std::size_t>(k)][static_cast<std::size_t>(e)] * h;
          cb[b] += 0.5 * h;
          cross_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(k)][i] =
              W(0.5 * (ca + cb))(a, b);
        }
      }
    }
  }
}

std::vector<std::vector<double>> DiscreteHodge::flux(const EdgeCochain& w) const {
  const int n = grid_.dim();
  const double h = grid_.dx();
  std::vector<std::vector<double>> F(static_cast<std::size_t>(n), std::vector<double>(grid_.size(), 0.0));
  for (int a = 0; a < n; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    for (std::size_t i = 0; i < grid_.size(); ++i) F[ua][i] = diag_[ua][i] * w.edge[ua][i] / h;
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      const auto ub = static_cast<std::size_t>(b);
      const auto& nb = cross_node_[ua][ub];
      for (std::size_t i = 0; i < grid_.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) s += cross_[ua][ub][k][i] * w.edge[ub][nb[k][i]];
        F[ua][i] += 0.25 * s / h;
      }
    }
  }
  return F;
}

std::vector<double> DiscreteHodge::divergence(const std::vector<std::vector<double>>& F) const {
  const int n = grid_.dim();
  std::vector<double> D(grid_.size(), 0.0);
  for (int a = 0; a < n; ++a)
    for (std::size_t i = 0; i < grid_.size(); ++i)
      D[i] += (F[static_cast<std::size_t>(a)][i] - F[static_cast<std::size_t>(a)][minus_[static_cast<std::size_t>(a)][i]]) /
              grid_.dx();
  return D;
}

EdgeCochain DiscreteHodge::d(const std::vector<double>& psi) const {
  const int n = grid_.dim();
  EdgeCochain w{grid_, std::vector<std::vector<double>>(static_cast<std::size_t>(n), std::vector<double>(grid_.size()))};
  for (int a = 0; a < n; ++a)
    for (std::size_t i = 0; i < grid_.size(); ++i)
      w.edge[static_cast<std::size_t>(a)][i] = psi[plus_[static_cast<std::size_t>(a)][i]] - psi[i];
  return w;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void remove_mean(std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& e : v) e -= m;
}

}  // namespace

HodgeDecomposition harmonic_representative(const MetricField& metric, const EdgeCochain& omega,
                                           const HodgeOptions& opts) {
  const Grid& g = omega.grid;
  const int n = g.dim();
  const DiscreteHodge H(metric, g);
  HodgeDecomposition dec;
  dec.omega = omega;
  const std::size_t m = g.size();
  const double cell = std::pow(g.dx(), n);

  // A ψ = −D(F(dψ)), b = −D(F(ω)); A is symmetric positive semidefinite.
  auto apply = [&](const std::vector<double>& psi) {
    auto out = H.divergence(H.flux(H.d(psi)));
    for (double& e : out) e = -e;
    return out;
  };
  std::vector<double> b = H.divergence(H.flux(omega));
  dec.stokes_sum = std::accumulate(b.begin(), b.end(), 0.0) * cell;
  for (double& e : b) e = -e;
  remove_mean(b);
  const double bnorm = std::sqrt(dot(b, b));

  std::vector<double> psi(m, 0.0), r = b, p = r;
  double rr = dot(r, r);
  // Roundoff-level right-hand sides converge on an absolute floor.
  const double target = std::max(opts.tol * bnorm, 1e-14 * std::sqrt(static_cast<double>(m)));
  dec.converged = bnorm <= target;
  dec.div_tolerance = target / *std::min_element(H.volume().begin(), H.volume().end());
  for (int it = 0; it < opts.max_iters && !dec.converged; ++it) {
    const auto Ap = apply(p);
    const double alpha = rr / dot(p, Ap);
    for (std::size_t i = 0; i < m; ++i) {
      psi[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    remove_mean(r);
    const double rr_new = dot(r, r);
    dec.iterations = it + 1;
    if (std::sqrt(rr_new) <= target) {
      dec.converged = true;
      break;
    }
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
  }
  remove_mean(psi);
  const auto Apsi = apply(psi);
  double res = 0.0;
  for (std::size_t i = 0; i < m; ++i) res += (Apsi[i] - b[i]) * (Apsi[i] - b[i]);
  dec.solver_residual = bnorm > 0.0 ? std::sqrt(res) / bnorm : std::sqrt(res);
  dec.psi = psi;

  const EdgeCochain dpsi = H.d(psi);
  dec.harmonic = omega;
  for (int a = 0; a < n; ++a)
    for (std::size_t i = 0; i < m; ++i)
      dec.harmonic.edge[static_cast<std::size_t>(a)][i] -= dpsi.edge[static_cast<std::size_t>(a)][i];
  dec.harmonic_class = dec.harmonic.loop_class();
  dec.harmonic_mean = Vec::Zero(n);
  for (int a = 0; a < n; ++a)
    dec.harmonic_mean[a] = std::accumulate(dec.harmonic.edge[static_cast<std::size_t>(a)].begin(),
                                           dec.harmonic.edge[static_cast<std::size_t>(a)].end(), 0.0) /
                           (static_cast<double>(m) * g.dx());
  const auto div = H.divergence(H.flux(dec.harmonic));
  for (std::size_t i = 0; i < m; ++i) dec.harmonic_div_sup = std::max(dec.harmonic_div_sup, std::abs(div[i] / H.volume()[i]));
  if (!dec.converged)
    throw NonConvergenceError("Hodge CG did not converge: relative residual " + std::to_string(dec.solver_residual) +
                              " after " + std::to_string(dec.iterations) + " iterations");
  return dec;
}

HodgeDecomposition harmonic_representative(const MetricField& metric, const ClosedOneForm& omega, const Grid& grid,
                                           const HodgeOptions& opts) {
  return harmonic_representative(metric, sample_form(grid, omega), opts);
}

std::string to_string(BochnerStatus s) {
  switch (s) {
    case BochnerStatus::pass:
      return "pass";
    case BochnerStatus::fail:
      return "fail";
    case BochnerStatus::not_applicable:
      return "not-applicable";
  }
  return "not-applicable";
}

BochnerReport bochner_check(const MetricField& metric, const ClosedOneForm& omega_h, const Grid& grid, double tol_h,
                            double ricci_tol) {
  const HarmonicCheck hc = is_harmonic(metric, omega_h, grid, tol_h);
  if (!hc.harmonic)
    throw DomainError("form is not harmonic: sup |div| = " + std::to_string(hc.sup_div));
  BochnerReport rep;
  rep.min_ricci = 1e300;
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec p = grid.point(i);
    const Mat g = metric.g(p);
    if (!metric.is_constant()) {
      const Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(ricci_tensor(metric, p), g);
      rep.min_ricci = std::min(rep.min_ricci, es.eigenvalues().minCoeff());
    } else {
      rep.min_ricci = std::min(rep.min_ricci, 0.0);
    }
    const Vec w = omega_h.value(p);
    const double nrm = w.dot(metric.inverse(p) * w);
    lo = std::min(lo, nrm);
    hi = std::max(hi, nrm);
  }
  rep.spread = hi - lo;
  if (rep.min_ricci < -ricci_tol) {
    rep.status = BochnerStatus::not_applicable;
    rep.diagnostic = "sampled Ricci curvature is negative somewhere: " + std::to_string(rep.min_ricci);
    return rep;
  }
  rep.status = rep.spread <= 10.0 * tol_h ? BochnerStatus::pass : BochnerStatus::fail;
  return rep;
}

void dump_decomposition_csv(const HodgeDecomposition& dec, std::ostream& os) {
  const Grid& g = dec.omega.grid;
  const int n = g.dim();
  CsvWriter w(os);
  std::vector<std::string> header;
  for (int a = 1; a <= n; ++a) header.push_back("i" + std::to_string(a));
  for (int a = 1; a <= n; ++a) header.push_back("omega_" + std::to_string(a));
  for (int a = 1; a <= n; ++a) header.push_back("harm_" + std::to_string(a));
  header.push_back("psi");
  w.header(header);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto c = g.coords(i);
    std::vector<double> row(c.begin(), c.end());
    const Vec wo = dec.omega.covector_at(i), wh = dec.harmonic.covector_at(i);
    for (int a = 0; a < n; ++a) row.push_back(wo[a]);
    for (int a = 0; a < n; ++a) row.push_back(wh[a]);
    row.push_back(dec.psi[i]);
    w.row(row);
  }
}

}  // namespace wkam
