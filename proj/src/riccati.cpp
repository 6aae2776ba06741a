#include "wkam/riccati.hpp"

#include "wkam/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace wkam {

namespace {

void check_domain(int n, double k, double s) {
  if (n < 1) throw DomainError("dimension must be positive");
  if (!(s > 0.0)) throw DomainError("comparison function needs s > 0");
  if (k > 0.0 && s >= M_PI / std::sqrt(k / n)) throw DomainError("s beyond the first zero of the sine branch");
}

}  // namespace

double comparison_function(int n, double k, double s) {
  check_domain(n, k, s);
  if (k == 0.0) return s;
  if (k > 0.0) {
    const double a = std::sqrt(k / n);
    return std::sin(a * s) / a;
  }
  const double a = std::sqrt(-k / n);
  return std::sinh(a * s) / a;
}

double comparison_derivative(int n, double k, double s) {
  check_domain(n, k, s);
  if (k == 0.0) return 1.0;
  if (k > 0.0) return std::cos(std::sqrt(k / n) * s);
  return std::cosh(std::sqrt(-k / n) * s);
}

double riccati_bound(int n, double k, double s) {
  check_domain(n, k, s);
  if (k == 0.0) return n / s;
  if (k > 0.0) {
    const double a = std::sqrt(k / n);
    const double t = std::tan(a * s);
    if (std::abs(t) > 1e15) return 0.0;
    return n * a / t;
  }
  const double a = std::sqrt(-k / n);
  return n * a / std::tanh(a * s);
}

ComparisonReport verify_comparison(int n, double k, const ComparisonOptions& opts) {
  ComparisonReport rep;
  if (!(opts.s0 > 0.0) || !(opts.horizon > opts.s0)) throw ConfigError("need 0 < s0 < horizon");
  auto slack = [&](double s) { return opts.slack ? opts.slack(s) : 0.0; };
  auto rhs = [&](double s, double a) { return -a * a / n - k - slack(s); };
  double s = opts.s0;
  double a = opts.alpha0 != 0.0 ? opts.alpha0 : n / opts.s0;
  auto record = [&] {
    const double b = riccati_bound(n, k, s);
    rep.s.push_back(s);
    rep.alpha.push_back(a);
    rep.bound.push_back(b);
    rep.max_excess = std::max(rep.max_excess, a - b);
  };
  record();
  while (s < opts.horizon) {
    const double h = std::min({1e-3 * s, 1e-3, opts.horizon - s});
    const double k1 = rhs(s, a);
    const double k2 = rhs(s + 0.5 * h, a + 0.5 * h * k1);
    const double k3 = rhs(s + 0.5 * h, a + 0.5 * h * k2);
    const double k4 = rhs(s + h, a + h * k3);
    a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s = (opts.horizon - s - h < 1e-12) ? opts.horizon : s + h;
    if (!std::isfinite(a) || a < -1.0 / opts.det_floor) {
      // α → −∞ stays below any bound from here on
      rep.diagnostic = "solution blew down at s = " + std::to_string(s);
      break;
    }
    if (k > 0.0 && s >= M_PI / std::sqrt(k / n)) {
      rep.diagnostic = "horizon passes the first zero of the comparison function";
      break;
    }
    record();
  }
  rep.ok = rep.max_excess <= opts.tol;
  return rep;
}

RiccatiTrace theta_along(const JacobiFrame& frame, double det_floor) {
  RiccatiTrace tr;
  const std::size_t m = frame.size();
  if (m == 0) return tr;
  const int n = static_cast<int>(frame.A(0).rows());
  for (std::size_t i = 1; i < m; ++i) {
    const FrameState& st = frame.states[i];
    if (frame.detA[i] <= det_floor) {
      tr.truncated = true;
      tr.diagnostic = "det A below floor at s = " + std::to_string(frame.s[i]);
      break;
    }
    const Mat Lambda = st.A.lu().solve(st.Adot);
    const FrameCoefficients c = frame.coefficients_at(st, frame.s[i]);
    tr.s.push_back(frame.s[i]);
    tr.theta.push_back(Lambda.trace());
    tr.ric_plus_hessf.push_back((c.R + c.H).trace());
    double div = 0.0;
    if (!frame.synthetic) div = divergence_of_form(frame.spec->metric, frame.spec->omega, st.x);
    tr.div_correction.push_back(div);
  }
  const std::size_t q = tr.s.size();
  double kmin = 0.0;
  for (double v : tr.ric_plus_hessf) kmin = std::min(kmin, v);
  tr.k = kmin;
  tr.residual.assign(q, 0.0);
  for (std::size_t i = 0; i < q; ++i) {
    double dth = 0.0;
    if (i >= 2 && i + 2 < q)
      dth = (tr.theta[i - 2] - 8.0 * tr.theta[i - 1] + 8.0 * tr.theta[i + 1] - tr.theta[i + 2]) /
            (12.0 * (tr.s[i + 1] - tr.s[i]));
    else if (i >= 1 && i + 1 < q)
      dth = (tr.theta[i + 1] - tr.theta[i - 1]) / (tr.s[i + 1] - tr.s[i - 1]);
    else if (q >= 2)
      dth = i == 0 ? (tr.theta[1] - tr.theta[0]) / (tr.s[1] - tr.s[0])
                   : (tr.theta[i] - tr.theta[i - 1]) / (tr.s[i] - tr.s[i - 1]);
    tr.residual[i] = dth + tr.theta[i] * tr.theta[i] / n + tr.ric_plus_hessf[i];
    tr.bound.push_back(riccati_bound(n, kmin, tr.s[i]));
  }
  // Low-order differences at the ends and the 1/s singularity are excluded.
  for (std::size_t i = 2; i + 2 < q; ++i)
    if (tr.s[i] >= 0.1) tr.max_residual = std::max(tr.max_residual, tr.residual[i]);
  return tr;
}

MatrixRiccatiReport matrix_riccati_residual(const JacobiFrame& frame, double s_min, double det_floor) {
  MatrixRiccatiReport rep;
  const std::size_t m = frame.size();
  if (m < 5) return rep;
  const int n = static_cast<int>(frame.A(0).rows());
  std::vector<Mat> L(m);
  std::vector<bool> ok(m, false);
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs(frame.detA[i]) <= det_floor) break;
    L[i] = frame.A(i).lu().solve(frame.Adot(i));
    ok[i] = true;
  }
  const double h = frame.dt;
  for (std::size_t i = 2; i + 2 < m; ++i) {
    if (frame.s[i] < s_min || !ok[i - 2] || !ok[i + 2]) continue;
    const Mat dL = (L[i - 2] - 8.0 * L[i - 1] + 8.0 * L[i + 1] - L[i + 2]) / (12.0 * h);
    const FrameCoefficients c = frame.coefficients_at(frame.states[i], frame.s[i]);
    const double r = (dL + L[i] * L[i] + c.R + c.H).norm();
    rep.s.push_back(frame.s[i]);
    rep.residual.push_back(r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  for (std::size_t i = 1; i < m; ++i) {
    if (!ok[i]) break;
    const double tr = L[i].trace();
    const double gap = (L[i] * L[i]).trace() - tr * tr / n;
    rep.min_trace_gap = std::min(rep.min_trace_gap, gap / std::max(1.0, tr * tr));
  }
  return rep;
}

void dump_trace_csv(const RiccatiTrace& trace, std::ostream& os) {
  CsvWriter w(os);
  w.header({"s", "theta", "bound", "ric_plus_hessf_trace", "residual"});
  for (std::size_t i = 0; i < trace.s.size(); ++i)
    w.row({trace.s[i], trace.theta[i], trace.bound[i], trace.ric_plus_hessf[i], trace.residual[i]});
}

}  // namespace wkam
