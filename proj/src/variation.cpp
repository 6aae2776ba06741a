#include "wkam/variation.hpp"

#include "wkam/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace wkam {

Mat orthonormal_frame(const MetricField& metric, const Vec& x) {
  Eigen::LLT<Mat> llt(metric.g(x));
  if (llt.info() != Eigen::Success) throw DegenerateMetricError("metric not positive definite");
  const int n = metric.dim();
  Mat L = llt.matrixL();
  // E = L^{-T}: E^T g E = L^{-1} L L^T L^{-T} = I
  return L.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
}

namespace {

// M(k, j) = Σ_i Γ^k_ij v^i, so that ė = −M e.
Mat connection_matrix(const MetricField& metric, const Vec& x, const Vec& v) {
  const int n = metric.dim();
  Mat M = Mat::Zero(n, n);
  if (metric.is_constant()) return M;
  const auto G = christoffel_at(metric, x);
  for (int k = 0; k < n; ++k) M.row(k) = (G[k].transpose() * v).transpose();
  return M;
}

}  // namespace

ParallelFrame parallel_transport(const MetricField& metric, const Trajectory& traj, const std::optional<Mat>& E0) {
  ParallelFrame pf;
  if (traj.size() == 0) return pf;
  Mat E = E0 ? *E0 : orthonormal_frame(metric, traj.x[0]);
  pf.s.push_back(0.0);
  pf.E.push_back(E);
  auto rhs = [&](double t, const Mat& e) -> Mat {
    const PhaseState st = traj.eval(t);
    return -connection_matrix(metric, st.x, st.v) * e;
  };
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double t0 = traj.t[k], h = traj.t[k + 1] - traj.t[k];
    const Mat k1 = rhs(t0, E);
    const Mat k2 = rhs(t0 + 0.5 * h, E + 0.5 * h * k1);
    const Mat k3 = rhs(t0 + 0.5 * h, E + 0.5 * h * k2);
    const Mat k4 = rhs(t0 + h, E + h * k3);
    E += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    pf.s.push_back(traj.t[k + 1] - traj.t[0]);
    pf.E.push_back(E);
  }
  return pf;
}

namespace {

struct FrameDeriv {
  Vec dx, dv;
  Mat dE, dA, dAdot;
};

FrameState advance(const FrameState& s, const FrameDeriv& d, double h, bool synthetic) {
  FrameState r;
  if (!synthetic) {
    r.x = s.x + h * d.dx;
    r.v = s.v + h * d.dv;
    r.E = s.E + h * d.dE;
  } else {
    r.x = s.x;
    r.v = s.v;
    r.E = s.E;
  }
  r.A = s.A + h * d.dA;
  r.Adot = s.Adot + h * d.dAdot;
  return r;
}

FrameCoefficients spec_coefficients(const LagrangianSpec& spec, const FrameState& st) {
  const int n = spec.dim();
  FrameCoefficients c{Mat::Zero(n, n), Mat::Zero(n, n)};
  if (!spec.metric.is_constant()) {
    const auto Rt = riemann_at(spec.metric, st.x);
    const Mat g = spec.metric.g(st.x);
    for (int i = 0; i < n; ++i) {
      const Vec w = Rt.apply(st.E.col(i), st.v, st.v);
      for (int j = 0; j < n; ++j) c.R(i, j) = w.dot(g * st.E.col(j));
    }
    c.R = 0.5 * (c.R + c.R.transpose());
  }
  if (!spec.f.is_zero()) c.H = st.E.transpose() * hessian_at(spec.metric, spec.f, st.x) * st.E;
  return c;
}

}  // namespace

FrameCoefficients JacobiFrame::coefficients_at(const FrameState& st, double s_) const {
  if (synthetic) return synthetic_curvature(s_);
  return spec_coefficients(*spec, st);
}

namespace {

FrameDeriv frame_rhs(const JacobiFrame& fr, const FrameState& st, double s) {
  FrameDeriv d;
  const FrameCoefficients c = fr.coefficients_at(st, s);
  if (!fr.synthetic) {
    const auto& spec = *fr.spec;
    d.dx = st.v;
    d.dv = el_acceleration(spec, st.x, st.v);
    d.dE = -connection_matrix(spec.metric, st.x, st.v) * st.E;
  }
  d.dA = st.Adot;
  d.dAdot = -st.A * (c.R + c.H);
  return d;
}

FrameState rk4_frame(const JacobiFrame& fr, const FrameState& s0, double s, double h) {
  const bool syn = fr.synthetic;
  const FrameDeriv k1 = frame_rhs(fr, s0, s);
  const FrameDeriv k2 = frame_rhs(fr, advance(s0, k1, 0.5 * h, syn), s + 0.5 * h);
  const FrameDeriv k3 = frame_rhs(fr, advance(s0, k2, 0.5 * h, syn), s + 0.5 * h);
  const FrameDeriv k4 = frame_rhs(fr, advance(s0, k3, h, syn), s + h);
  FrameDeriv sum;
  if (!syn) {
    sum.dx = (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx) / 6.0;
    sum.dv = (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv) / 6.0;
    sum.dE = (k1.dE + 2.0 * k2.dE + 2.0 * k3.dE + k4.dE) / 6.0;
  }
  sum.dA = (k1.dA + 2.0 * k2.dA + 2.0 * k3.dA + k4.dA) / 6.0;
  sum.dAdot = (k1.dAdot + 2.0 * k2.dAdot + 2.0 * k3.dAdot + k4.dAdot) / 6.0;
  return advance(s0, sum, h, syn);
}

void run_frame(JacobiFrame& fr, FrameState st, std::size_t steps) {
  constexpr double kBlowUp = 1e150;
  fr.s.push_back(0.0);
  fr.states.push_back(st);
  fr.detA.push_back(st.A.determinant());
  for (std::size_t k = 1; k <= steps; ++k) {
    const double s0 = fr.dt * static_cast<double>(k - 1);
    st = rk4_frame(fr, st, s0, fr.dt);
    const double mag = std::max(st.A.cwiseAbs().maxCoeff(), st.Adot.cwiseAbs().maxCoeff());
    if (!std::isfinite(mag) || mag > kBlowUp) {
      fr.diagnostic = "frame ODE blow-up after s = " + std::to_string(s0);
      fr.last_valid_s = s0;
      return;
    }
    fr.s.push_back(fr.dt * static_cast<double>(k));
    fr.states.push_back(st);
    fr.detA.push_back(st.A.determinant());
  }
  fr.last_valid_s = fr.s.back();
}

}  // namespace

FrameState JacobiFrame::state_at(double s_) const {
  if (s_ <= 0.0) return states.front();
  auto k = static_cast<std::size_t>(std::floor(s_ / dt));
  if (k >= size() - 1) k = size() - 1;
  const double h = s_ - s[k];
  if (h == 0.0) return states[k];
  return rk4_frame(*this, states[k], s[k], h);
}

JacobiFrame propagate_jacobi_frame(const LagrangianSpec& spec, const Trajectory& traj, const std::optional<Mat>& B) {
  if (traj.size() == 0) throw DomainError("empty trajectory");
  const int n = spec.dim();
  JacobiFrame fr;
  fr.dt = traj.dt;
  fr.spec = spec;
  FrameState st;
  st.x = traj.x[0];
  st.v = traj.v[0];
  st.E = orthonormal_frame(spec.metric, st.x);
  st.A = Mat::Zero(n, n);
  st.Adot = B ? *B : Mat::Identity(n, n);
  run_frame(fr, st, traj.size() - 1);
  return fr;
}

JacobiFrame propagate_synthetic_frame(int n, SyntheticCurvature curvature, double T, double dt,
                                      const std::optional<Mat>& B) {
  if (!(dt > 0.0) || !(T > 0.0)) throw ConfigError("synthetic frame needs T > 0 and dt > 0");
  JacobiFrame fr;
  fr.dt = dt;
  fr.synthetic = true;
  fr.synthetic_curvature = std::move(curvature);
  FrameState st;
  st.x = Vec::Zero(n);
  st.v = Vec::Zero(n);
  st.E = Mat::Identity(n, n);
  st.A = Mat::Zero(n, n);
  st.Adot = B ? *B : Mat::Identity(n, n);
  run_frame(fr, st, static_cast<std::size_t>(std::llround(T / dt)));
  return fr;
}

namespace {

Mat adjugate(const Mat& A) {
  const auto n = A.rows();
  if (n == 1) return Mat::Ones(1, 1);
  Mat adj(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Mat minor(n - 1, n - 1);
      for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = A(r, c);
        }
        ++rr;
      }
      adj(j, i) = (((i + j) % 2) ? -1.0 : 1.0) * minor.determinant();
    }
  return adj;
}

double det_derivative(const FrameState& st) { return (adjugate(st.A) * st.Adot).trace(); }

template <class F>
double bisect(F&& f, double a, double b, double fa, double tol) {
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

ConjugateReport conjugate_points(const JacobiFrame& frame, const ConjugateOptions& opts) {
  ConjugateReport rep;
  const std::size_t m = frame.size();
  if (m < 3) return rep;
  std::vector<double> dd(m);
  for (std::size_t k = 0; k < m; ++k) dd[k] = det_derivative(frame.states[k]);
  auto det_at = [&](double s) { return frame.state_at(s).A.determinant(); };
  auto dd_at = [&](double s) { return det_derivative(frame.state_at(s)); };
  // A(s) ≈ s·Ȧ(0) near 0; the zero at s = 0 is excluded.
  const std::size_t k0 = 5;
  const auto wsteps = static_cast<std::size_t>(std::ceil(opts.window / frame.dt));
  for (std::size_t k = k0; k + 1 < m; ++k) {
    const double d0 = frame.detA[k], d1 = frame.detA[k + 1];
    const double s0 = frame.s[k], s1 = frame.s[k + 1];
    if (d0 == 0.0) {
      rep.points.push_back(s0);
      continue;
    }
    if ((d0 > 0.0) != (d1 > 0.0) && d1 != 0.0) {
      rep.points.push_back(bisect(det_at, s0, s1, d0, opts.tol_s));
      continue;
    }
    if (d1 == 0.0) continue;
    // Tangential zero: det' changes sign while det keeps its sign.
    if ((dd[k] > 0.0) != (dd[k + 1] > 0.0) && dd[k] != 0.0 && dd[k + 1] != 0.0) {
      const bool toward_zero = (d0 > 0.0) ? (dd[k] < 0.0) : (dd[k] > 0.0);
      if (!toward_zero) continue;
      const double sc = bisect(dd_at, s0, s1, dd[k], opts.tol_s);
      const double dc = std::abs(det_at(sc));
      double scale = 0.0;
      const std::size_t lo = k > wsteps ? k - wsteps : 0, hi = std::min(m - 1, k + 1 + wsteps);
      for (std::size_t j = lo; j <= hi; ++j) scale = std::max(scale, std::abs(frame.detA[j]));
      if (scale == 0.0) continue;
      if (dc <= opts.tangential_rel * scale)
        rep.points.push_back(sc);
      else if (dc <= opts.undetermined_rel * scale)
        rep.undetermined.push_back(sc);
    }
  }
  return rep;
}

ReverseConjugacyReport reverse_conjugacy_check(const LagrangianSpec& spec, const Trajectory& traj, double tol) {
  ReverseConjugacyReport rep;
  const JacobiFrame fr = propagate_jacobi_frame(spec, traj);
  rep.forward = conjugate_points(fr).points;
  const LagrangianSpec rev = spec.reversed();
  FlowOptions fo;
  fo.dt = traj.dt;
  for (double b : rep.forward) {
    const FrameState st = fr.state_at(b);
    const double horizon = b + std::max(10.0 * traj.dt, 0.1);
    const Trajectory back = integrate_flow(rev, {st.x, -st.v}, horizon, fo);
    const auto pts = conjugate_points(propagate_jacobi_frame(rev, back)).points;
    double match = std::numeric_limits<double>::quiet_NaN();
    for (double p : pts)
      if (std::abs(p - b) <= tol) match = p;
    rep.matched.push_back(match);
    if (std::isnan(match)) rep.ok = false;
  }
  const PhaseState end = traj.terminal();
  const Trajectory from_end = integrate_flow(rev, {end.x, -end.v}, traj.t_end() - traj.t_begin(), fo);
  rep.reversed_from_end = conjugate_points(propagate_jacobi_frame(rev, from_end)).points;
  return rep;
}

ReverseConjugacyReport reverse_conjugacy_check_synthetic(int n, const SyntheticCurvature& curvature, double T,
                                                         double dt, double tol) {
  ReverseConjugacyReport rep;
  rep.forward = conjugate_points(propagate_synthetic_frame(n, curvature, T, dt)).points;
  for (double b : rep.forward) {
    auto rc = [curvature, b](double s) { return curvature(b - s); };
    const double horizon = b + std::max(10.0 * dt, 0.1);
    const auto pts = conjugate_points(propagate_synthetic_frame(n, rc, horizon, dt)).points;
    double match = std::numeric_limits<double>::quiet_NaN();
    for (double p : pts)
      if (std::abs(p - b) <= tol) match = p;
    rep.matched.push_back(match);
    if (std::isnan(match)) rep.ok = false;
  }
  auto re = [curvature, T](double s) { return curvature(T - s); };
  rep.reversed_from_end = conjugate_points(propagate_synthetic_frame(n, re, T, dt)).points;
  return rep;
}

SecondVariationCoefficients second_variation_coefficients(const LagrangianSpec& spec, const Vec& x, const Vec& v) {
  const int n = spec.dim();
  SecondVariationCoefficients c;
  c.Lvv = spec.metric.g(x);
  c.Lv = c.Lvv * v - spec.omega.value(x);
  const Mat dw = spec.omega.derivative(x);
  c.Lvx = -dw.transpose();
  c.Lxx = -spec.f.hess(x);
  if (!spec.metric.is_constant()) {
    const auto dg = spec.metric.dg(x);
    const auto d2 = spec.metric.d2g(x);
    for (int j = 0; j < n; ++j) c.Lvx.col(j) += dg[j] * v;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c.Lxx(i, j) += 0.5 * v.dot(d2[i * n + j] * v);
  }
  if (!spec.omega.phi.is_zero()) {
    const auto t3 = spec.omega.phi.third(x);
    for (int a = 0; a < n; ++a) c.Lxx -= t3[a] * v[a];
  }
  return c;
}

CoefficientPath coefficients_along(const LagrangianSpec& spec, const Trajectory& traj) {
  return [spec, traj](double t) {
    const PhaseState st = traj.eval(t);
    return second_variation_coefficients(spec, st.x, st.v);
  };
}

namespace {

constexpr double kGaussX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
constexpr double kGaussW[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};

std::size_t piece_of(const PiecewiseField& f, double t) {
  const auto& bp = f.breakpoints;
  for (std::size_t j = 0; j + 1 < bp.size(); ++j)
    if (t < bp[j + 1]) return j;
  return bp.size() - 2;
}

std::vector<double> merge_partitions(const std::vector<const PiecewiseField*>& fields) {
  const double scale = std::max(1.0, std::abs(fields[0]->breakpoints.back()));
  for (const auto* f : fields) {
    if (f->breakpoints.size() < 2 || f->pieces.size() + 1 != f->breakpoints.size())
      throw DomainError("piecewise field needs k+1 breakpoints for k pieces");
    if (std::abs(f->breakpoints.front() - fields[0]->breakpoints.front()) > 1e-12 * scale ||
        std::abs(f->breakpoints.back() - fields[0]->breakpoints.back()) > 1e-12 * scale)
      throw DomainError("fields are defined on mismatched intervals");
  }
  std::vector<double> p;
  for (const auto* f : fields) p.insert(p.end(), f->breakpoints.begin(), f->breakpoints.end());
  std::sort(p.begin(), p.end());
  std::vector<double> out;
  for (double t : p)
    if (out.empty() || t - out.back() > 1e-12 * scale) out.push_back(t);
  return out;
}

// Calls fn(t, weight, piece index per field) at the composite Gauss nodes.
template <class F>
void quadrature(const std::vector<double>& part, const std::vector<const PiecewiseField*>& fields, int panels,
                F&& fn) {
  std::vector<std::size_t> piece(fields.size());
  for (std::size_t i = 0; i + 1 < part.size(); ++i) {
    const double a = part[i], b = part[i + 1], mid = 0.5 * (a + b);
    for (std::size_t f = 0; f < fields.size(); ++f) piece[f] = piece_of(*fields[f], mid);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double c = a + (p + 0.5) * h;
      for (int q = 0; q < 5; ++q) fn(c + 0.5 * h * kGaussX[q], 0.5 * h * kGaussW[q], piece);
    }
  }
}

}  // namespace

IndexFormValue index_form(const CoefficientPath& coeffs, const PiecewiseField& eta, const PiecewiseField& theta,
                          int panels_per_piece) {
  IndexFormValue r;
  const std::vector<const PiecewiseField*> fields{&eta, &theta};
  r.partition = merge_partitions(fields);
  double sum = 0.0;
  quadrature(r.partition, fields, panels_per_piece, [&](double t, double w, const std::vector<std::size_t>& pc) {
    const FieldValue e = eta.eval(t, pc[0]);
    const FieldValue th = theta.eval(t, pc[1]);
    const auto c = coeffs(t);
    sum += w * (e.derivative.dot(c.Lvv * th.derivative) + e.derivative.dot(c.Lvx * th.value) +
                e.value.dot(c.Lvx.transpose() * th.derivative) + e.value.dot(c.Lxx * th.value));
  });
  r.value = sum;
  return r;
}

IndexFormValue index_form(const LagrangianSpec& spec, const Trajectory& traj, const PiecewiseField& eta,
                          const PiecewiseField& theta, int panels_per_piece) {
  const double lo = eta.breakpoints.front(), hi = eta.breakpoints.back();
  if (lo < traj.t_begin() - 1e-12 || hi > traj.t_end() + 1e-12)
    throw DomainError("fields extend beyond the trajectory interval");
  return index_form(coefficients_along(spec, traj), eta, theta, panels_per_piece);
}

SecondVariationReport second_variation_check(const LagrangianSpec& spec, const Trajectory& traj,
                                             const PiecewiseField& V, const std::optional<PiecewiseField>& W,
                                             double rel_tol) {
  SecondVariationReport rep;
  const int n = spec.dim();
  const PiecewiseField zero = PiecewiseField::smooth(V.breakpoints.front(), V.breakpoints.back(), [n](double) {
    return FieldValue{Vec::Zero(n), Vec::Zero(n)};
  });
  const PiecewiseField& Wf = W ? *W : zero;
  const std::vector<const PiecewiseField*> fields{&V, &Wf};
  const auto part = merge_partitions(fields);
  const double t0 = part.front(), t1 = part.back();
  constexpr int kPanels = 64;

  auto field_at_end = [](const PiecewiseField& f, double t, bool end) {
    return f.eval(t, end ? f.pieces.size() - 1 : 0);
  };
  auto S = [&](double s) {
    double sum = 0.0;
    quadrature(part, fields, kPanels, [&](double t, double w, const std::vector<std::size_t>& pc) {
      const PhaseState st = traj.eval(t);
      const FieldValue a = V.eval(t, pc[0]), b = Wf.eval(t, pc[1]);
      const Vec x = st.x + s * a.value + s * s * b.value;
      const Vec v = st.v + s * a.derivative + s * s * b.derivative;
      sum += w * (0.5 * v.dot(spec.metric.g(x) * v) - spec.f(x) + spec.c);
    });
    const Vec xa = traj.eval(t0).x + s * field_at_end(V, t0, false).value + s * s * field_at_end(Wf, t0, false).value;
    const Vec xb = traj.eval(t1).x + s * field_at_end(V, t1, true).value + s * s * field_at_end(Wf, t1, true).value;
    return sum - spec.omega.line_integral(xa, xb);
  };

  rep.index_value = index_form(spec, traj, V, V).value;
  auto Lv = [&](double t) {
    const PhaseState st = traj.eval(t);
    return Vec(spec.metric.g(st.x) * st.v - spec.omega.value(st.x));
  };
  rep.boundary = 2.0 * (Lv(t1).dot(field_at_end(Wf, t1, true).value) - Lv(t0).dot(field_at_end(Wf, t0, false).value));
  rep.predicted = rep.index_value + rep.boundary;
  const double s0 = S(0.0);
  rep.steps = {1e-3, 1e-4};
  for (double h : rep.steps) {
    const double fd = (S(h) - 2.0 * s0 + S(-h)) / (h * h);
    rep.finite_difference.push_back(fd);
    const double err = std::abs(fd - rep.predicted);
    const double rel = std::abs(rep.predicted) > 1e-14 ? err / std::abs(rep.predicted) : (err < 1e-10 ? 0.0 : err);
    rep.max_rel_error = std::max(rep.max_rel_error, rel);
  }
  rep.ok = rep.max_rel_error <= rel_tol;
  return rep;
}

namespace {

Vec flow_endpoint(const LagrangianSpec& spec, const Vec& x, const Vec& v, double t, double dt) {
  const auto steps = std::max<long long>(1, std::llround(std::ceil(t / dt - 1e-9)));
  const double h = t / static_cast<double>(steps);
  PhaseState s{x, v};
  for (long long i = 0; i < steps; ++i) s = el_step(spec, s, h);
  return s.x;
}

}  // namespace

std::vector<ShootingSolution> shoot_minimizers(const LagrangianSpec& spec, const Vec& x, const Vec& y, double t,
                                               int starts, unsigned long long seed, double flow_dt) {
  const int n = spec.dim();
  const Vec base = x + periodic_delta(x, y);
  std::vector<Vec> lifts;
  const int count = static_cast<int>(std::pow(3, n));
  for (int c = 0; c < count; ++c) {
    Vec k(n);
    int r = c;
    for (int i = 0; i < n; ++i) {
      k[i] = static_cast<double>(r % 3 - 1);
      r /= 3;
    }
    lifts.push_back(base + k);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<ShootingSolution> sols;
  FlowOptions fo;
  const auto steps = std::max<long long>(1, std::llround(std::ceil(t / flow_dt - 1e-9)));
  fo.dt = t / static_cast<double>(steps);
  for (int st = 0; st < starts; ++st) {
    const Vec& target = lifts[static_cast<std::size_t>(st) % lifts.size()];
    Vec v = (target - x) / t;
    if (st >= static_cast<int>(lifts.size())) {
      const double spread = 0.3 * v.norm() + 0.1;
      for (int i = 0; i < n; ++i) v[i] += spread * gauss(rng);
    }
    bool converged = false;
    try {
      Vec F = flow_endpoint(spec, x, v, t, fo.dt) - target;
      for (int it = 0; it < 40 && !converged; ++it) {
        if (F.cwiseAbs().maxCoeff() <= 1e-10) {
          converged = true;
          break;
        }
        Mat J(n, n);
        for (int j = 0; j < n; ++j) {
          const double eps = 1e-6 * std::max(1.0, v.norm());
          Vec vp = v, vm = v;
          vp[j] += eps;
          vm[j] -= eps;
          J.col(j) = (flow_endpoint(spec, x, vp, t, fo.dt) - flow_endpoint(spec, x, vm, t, fo.dt)) / (2.0 * eps);
        }
        Eigen::FullPivLU<Mat> lu(J);
        if (!lu.isInvertible()) break;
        const Vec step = lu.solve(-F);
        double lambda = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 12; ++ls) {
          const Vec vt = v + lambda * step;
          if (vt.norm() > fo.v_max) {
            lambda *= 0.5;
            continue;
          }
          const Vec Ft = flow_endpoint(spec, x, vt, t, fo.dt) - target;
          if (Ft.norm() < F.norm()) {
            v = vt;
            F = Ft;
            improved = true;
            break;
          }
          lambda *= 0.5;
        }
        if (!improved) break;
      }
      if (!converged && F.cwiseAbs().maxCoeff() <= 1e-10) converged = true;
    } catch (const NumericalError&) {
      converged = false;
    }
    if (!converged) continue;
    bool dup = false;
    for (const auto& s : sols)
      if ((s.v0 - v).norm() <= 1e-6 * std::max(1.0, v.norm())) dup = true;
    if (dup) continue;
    try {
      const Trajectory tr = integrate_flow(spec, {x, v}, t, fo);
      sols.push_back({v, tr.x.back(), action(spec, tr)});
    } catch (const NumericalError&) {
    }
  }
  std::sort(sols.begin(), sols.end(), [](const auto& a, const auto& b) { return a.action < b.action; });
  return sols;
}

std::string to_string(CutClass c) {
  switch (c) {
    case CutClass::not_cut:
      return "not-cut";
    case CutClass::cut_conjugate:
      return "cut-conjugate";
    case CutClass::cut_multiple_minimizer:
      return "cut-multiple-minimizer";
    case CutClass::undetermined:
      return "undetermined";
  }
  return "undetermined";
}

CutReport is_cut_point(const LagrangianSpec& spec, const Vec& x, const Vec& v, double t, const ActionOracle& oracle,
                       const CutOptions& opts) {
  CutReport rep;
  if (!(t > 0.0)) throw DomainError("cut-point test needs t > 0");
  double tau = t + opts.delta_t;
  if (oracle.time_step > 0.0) {
    const double kt = std::round(t / oracle.time_step);
    if (std::abs(kt * oracle.time_step - t) > 1e-9 * std::max(1.0, t)) {
      rep.diagnostic = "t is not on the oracle time grid";
      return rep;
    }
    const double kd = std::max(1.0, std::ceil(opts.delta_t / oracle.time_step - 1e-9));
    tau = (kt + kd) * oracle.time_step;
  }
  rep.tau_after = tau;
  if (opts.tol < oracle.resolution) {
    rep.diagnostic = "oracle resolution coarser than tolerance";
    return rep;
  }
  FlowOptions fo;
  const auto steps_t = std::max<long long>(1, std::llround(std::ceil(t / opts.flow_dt - 1e-9)));
  fo.dt = t / static_cast<double>(steps_t);
  const Trajectory first = integrate_flow(spec, {x, v}, t, fo);
  FlowOptions fo2;
  const double rest = tau - t;
  const auto steps_r = std::max<long long>(1, std::llround(std::ceil(rest / opts.flow_dt - 1e-9)));
  fo2.dt = rest / static_cast<double>(steps_r);
  const Trajectory second = integrate_flow(spec, first.terminal(), rest, fo2);
  const double S_t = action(spec, first);
  const double S_tau = S_t + action(spec, second);
  const Vec y = wrap01(first.x.back());
  rep.gap_at_t = S_t - oracle.value(t, y);
  rep.gap_after = S_tau - oracle.value(tau, wrap01(second.x.back()));
  if (rep.gap_at_t > opts.tol) {
    rep.diagnostic = "extremal is not minimal at t";
    return rep;
  }
  if (rep.gap_after <= opts.tol) {
    rep.verdict = CutClass::not_cut;
    return rep;
  }
  const JacobiFrame frame = opts.frame_override ? *opts.frame_override : propagate_jacobi_frame(spec, first);
  const double window = std::max(2.0 * frame.dt, 1e-3);
  for (double p : conjugate_points(frame).points)
    if (std::abs(p - t) <= window) {
      rep.verdict = CutClass::cut_conjugate;
      return rep;
    }
  for (const auto& s : shoot_minimizers(spec, x, y, t, opts.starts, opts.seed, opts.flow_dt)) {
    if ((s.v0 - v).norm() <= 1e-6 * std::max(1.0, v.norm())) continue;
    if (std::abs(s.action - S_t) <= opts.tol) {
      rep.verdict = CutClass::cut_multiple_minimizer;
      return rep;
    }
  }
  rep.diagnostic = "no conjugate point and no second minimizer found";
  return rep;
}

void dump_frame_csv(const JacobiFrame& frame, std::ostream& os) {
  const int n = frame.size() ? static_cast<int>(frame.A(0).rows()) : 0;
  CsvWriter w(os);
  std::vector<std::string> header{"s", "detA"};
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) header.push_back("A" + std::to_string(i) + std::to_string(j));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) header.push_back("Adot" + std::to_string(i) + std::to_string(j));
  w.header(header);
  for (std::size_t k = 0; k < frame.size(); ++k) {
    std::vector<double> row{frame.s[k], frame.detA[k]};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) row.push_back(frame.A(k)(i, j));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) row.push_back(frame.Adot(k)(i, j));
    w.row(row);
  }
}

}  // namespace wkam
