#include "wkam/geometry.hpp"

#include <cmath>

namespace wkam {

namespace {

constexpr double kMinStep = 1e-12;
constexpr double kSecondStep = 1e-4;

std::vector<Mat> zeros(int n, int count) { return std::vector<Mat>(count, Mat::Zero(n, n)); }

}  // namespace

MetricField MetricField::flat(int dim) { return constant(Mat::Identity(dim, dim)); }

MetricField MetricField::constant(const Mat& g) {
  if (g.rows() != g.cols() || g.rows() < 1) throw ConfigError("constant metric must be square");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 0.0) throw ConfigError("metric must be symmetric");
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw DegenerateMetricError("constant metric is not positive definite");
  MetricField m;
  m.kind_ = Kind::constant;
  m.dim_ = static_cast<int>(g.rows());
  m.const_g_ = g;
  return m;
}

MetricField MetricField::conformal(const ScalarField& lambda) {
  return diagonal(std::vector<ScalarField>(lambda.dim(), lambda));
}

MetricField MetricField::diagonal(std::vector<ScalarField> lambdas) {
  const int n = static_cast<int>(lambdas.size());
  for (const auto& l : lambdas)
    if (l.dim() != n) throw ConfigError("diagonal metric log-scale has wrong dimension");
  MetricField m;
  m.kind_ = Kind::diagonal;
  m.dim_ = n;
  m.lambdas_ = std::move(lambdas);
  return m;
}

MetricField MetricField::from_functions(int dim, MetricFn g, DerivFn dg, Deriv2Fn d2g) {
  MetricField m;
  m.kind_ = Kind::closure;
  m.dim_ = dim;
  m.g_ = std::move(g);
  m.dg_ = std::move(dg);
  m.d2g_ = std::move(d2g);
  return m;
}

void MetricField::check_step() const {
  if (!(h_g > kMinStep) || !std::isfinite(h_g)) throw ConfigError("metric derivative step underflow");
}

Mat MetricField::g(const Vec& x) const {
  switch (kind_) {
    case Kind::constant:
      return const_g_;
    case Kind::diagonal: {
      Mat g = Mat::Zero(dim_, dim_);
      for (int a = 0; a < dim_; ++a) g(a, a) = std::exp(2.0 * lambdas_[a](x));
      return g;
    }
    case Kind::closure:
      return g_(x);
  }
  return {};
}

Mat MetricField::inverse(const Vec& x) const {
  Mat gx = g(x);
  Eigen::LLT<Mat> llt(gx);
  if (llt.info() != Eigen::Success) throw DegenerateMetricError("metric not positive definite");
  return llt.solve(Mat::Identity(dim_, dim_));
}

double MetricField::sqrt_det(const Vec& x) const {
  Eigen::LLT<Mat> llt(g(x));
  if (llt.info() != Eigen::Success) throw DegenerateMetricError("metric not positive definite");
  Mat L = llt.matrixL();
  double p = 1.0;
  for (int i = 0; i < dim_; ++i) p *= L(i, i);
  return p;
}

std::vector<Mat> MetricField::dg_fd(const Vec& x, double h) const {
  if (!(h > kMinStep)) throw ConfigError("metric derivative step underflow");
  std::vector<Mat> out(dim_);
  for (int k = 0; k < dim_; ++k) {
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    out[k] = (g(xp) - g(xm)) / (2.0 * h);
  }
  return out;
}

std::vector<Mat> MetricField::dg(const Vec& x) const {
  switch (kind_) {
    case Kind::constant:
      return zeros(dim_, dim_);
    case Kind::diagonal: {
      auto out = zeros(dim_, dim_);
      for (int a = 0; a < dim_; ++a) {
        const double gaa = std::exp(2.0 * lambdas_[a](x));
        const Vec dl = lambdas_[a].grad(x);
        for (int k = 0; k < dim_; ++k) out[k](a, a) = 2.0 * dl[k] * gaa;
      }
      return out;
    }
    case Kind::closure:
      if (dg_) return dg_(x);
      check_step();
      return dg_fd(x, h_g);
  }
  return {};
}

std::vector<Mat> MetricField::d2g(const Vec& x) const {
  const int n = dim_;
  switch (kind_) {
    case Kind::constant:
      return zeros(n, n * n);
    case Kind::diagonal: {
      auto out = zeros(n, n * n);
      for (int a = 0; a < n; ++a) {
        const double gaa = std::exp(2.0 * lambdas_[a](x));
        const Vec dl = lambdas_[a].grad(x);
        const Mat hl = lambdas_[a].hess(x);
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) out[k * n + l](a, a) = (4.0 * dl[k] * dl[l] + 2.0 * hl(k, l)) * gaa;
      }
      return out;
    }
    case Kind::closure:
      break;
  }
  if (d2g_) return d2g_(x);
  check_step();
  const double h = std::max(h_g, kSecondStep);
  auto out = zeros(n, n * n);
  if (dg_) {
    for (int k = 0; k < n; ++k) {
      Vec xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      auto dp = dg_(xp), dm = dg_(xm);
      for (int l = 0; l < n; ++l) out[k * n + l] = (dp[l] - dm[l]) / (2.0 * h);
    }
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) {
        Mat s = 0.5 * (out[k * n + l] + out[l * n + k]);
        out[k * n + l] = out[l * n + k] = s;
      }
    return out;
  }
  const Mat g0 = g(x);
  for (int k = 0; k < n; ++k) {
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    out[k * n + k] = (g(xp) - 2.0 * g0 + g(xm)) / (h * h);
    for (int l = k + 1; l < n; ++l) {
      Vec a = x, b = x, c = x, d = x;
      a[k] += h; a[l] += h;
      b[k] += h; b[l] -= h;
      c[k] -= h; c[l] += h;
      d[k] -= h; d[l] -= h;
      out[k * n + l] = out[l * n + k] = (g(a) - g(b) - g(c) + g(d)) / (4.0 * h * h);
    }
  }
  return out;
}

namespace {

// T[m](i,j) = ½(∂_i g_mj + ∂_j g_mi − ∂_m g_ij)
std::vector<Mat> first_kind(const std::vector<Mat>& dg, int n) {
  std::vector<Mat> T(n, Mat::Zero(n, n));
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) T[m](i, j) = 0.5 * (dg[i](m, j) + dg[j](m, i) - dg[m](i, j));
  return T;
}

Christoffel raise(const Mat& ginv, const std::vector<Mat>& T, int n) {
  Christoffel G(n, Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m) G[k] += ginv(k, m) * T[m];
  return G;
}

}  // namespace

Christoffel christoffel_at(const MetricField& metric, const Vec& x) {
  const int n = metric.dim();
  const Mat ginv = metric.inverse(x);
  if (metric.is_constant()) return Christoffel(n, Mat::Zero(n, n));
  return raise(ginv, first_kind(metric.dg(x), n), n);
}

Christoffel christoffel_fd(const MetricField& metric, const Vec& x, double h) {
  const int n = metric.dim();
  return raise(metric.inverse(x), first_kind(metric.dg_fd(x, h), n), n);
}

std::vector<Christoffel> christoffel_derivative(const MetricField& metric, const Vec& x) {
  const int n = metric.dim();
  std::vector<Christoffel> out(n, Christoffel(n, Mat::Zero(n, n)));
  if (metric.is_constant()) return out;
  const Mat ginv = metric.inverse(x);
  const auto dg = metric.dg(x);
  const auto d2 = metric.d2g(x);
  const auto T = first_kind(dg, n);
  for (int l = 0; l < n; ++l) {
    const Mat dginv = -ginv * dg[l] * ginv;
    std::vector<Mat> dT(n, Mat::Zero(n, n));
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          dT[m](i, j) = 0.5 * (d2[l * n + i](m, j) + d2[l * n + j](m, i) - d2[l * n + m](i, j));
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) out[l][k] += dginv(k, m) * T[m] + ginv(k, m) * dT[m];
  }
  return out;
}

Vec RiemannTensor::apply(const Vec& u, const Vec& v, const Vec& w) const {
  Vec r = Vec::Zero(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) r[l] += (*this)(l, i, j, k) * u[i] * v[j] * w[k];
  return r;
}

RiemannTensor riemann_at(const MetricField& metric, const Vec& x) {
  const int n = metric.dim();
  RiemannTensor R;
  R.n = n;
  R.data.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  if (metric.is_constant()) {
    metric.inverse(x);
    return R;
  }
  const auto G = christoffel_at(metric, x);
  const auto dG = christoffel_derivative(metric, x);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = dG[i][l](j, k) - dG[j][l](i, k);
          for (int m = 0; m < n; ++m) s += G[l](i, m) * G[m](j, k) - G[l](j, m) * G[m](i, k);
          R.data[static_cast<std::size_t>(((l * n + i) * n + j) * n + k)] = s;
        }
  return R;
}

Mat ricci_tensor(const MetricField& metric, const Vec& x) {
  const int n = metric.dim();
  const auto R = riemann_at(metric, x);
  Mat ric = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) ric(j, k) += R(i, i, j, k);
  return 0.5 * (ric + ric.transpose());
}

double ricci_at(const MetricField& metric, const Vec& x, const Vec& v) {
  if (v.isZero(0.0)) return 0.0;
  return v.dot(ricci_tensor(metric, x) * v);
}

CurvatureReport curvature_report(const MetricField& metric, const Vec& x, const Vec& v) {
  CurvatureReport r;
  r.point = wrap01(x);
  r.direction = v;
  r.riemann_sample = riemann_at(metric, x);
  Mat ric = Mat::Zero(metric.dim(), metric.dim());
  for (int j = 0; j < metric.dim(); ++j)
    for (int k = 0; k < metric.dim(); ++k)
      for (int i = 0; i < metric.dim(); ++i) ric(j, k) += r.riemann_sample(i, i, j, k);
  r.ricci = v.dot(ric * v);
  return r;
}

Vec sharp(const MetricField& metric, const Vec& x, const Vec& covector) {
  return metric.inverse(x) * covector;
}

Vec flat(const MetricField& metric, const Vec& x, const Vec& vector) { return metric.g(x) * vector; }

Vec gradient(const MetricField& metric, const ScalarField& f, const Vec& x) {
  return metric.inverse(x) * f.grad(x);
}

namespace {

// Γ^i_{ik} = ½ tr(g^{-1} ∂_k g)
Vec contracted_christoffel(const MetricField& metric, const Vec& x, const Mat& ginv) {
  const int n = metric.dim();
  Vec c = Vec::Zero(n);
  if (metric.is_constant()) return c;
  const auto dg = metric.dg(x);
  for (int k = 0; k < n; ++k) c[k] = 0.5 * (ginv * dg[k]).trace();
  return c;
}

}  // namespace

double divergence(const MetricField& metric, const VectorField& X, const Vec& x) {
  const Mat ginv = metric.inverse(x);
  return X.jacobian(x).trace() + contracted_christoffel(metric, x, ginv).dot(X.eval(x));
}

Mat hessian_at(const MetricField& metric, const ScalarField& f, const Vec& x) {
  const int n = metric.dim();
  Mat H = f.hess(x);
  if (!metric.is_constant()) {
    const Vec df = f.grad(x);
    const auto G = christoffel_at(metric, x);
    for (int k = 0; k < n; ++k) H -= G[k] * df[k];
  }
  return 0.5 * (H + H.transpose());
}

double laplacian(const MetricField& metric, const ScalarField& f, const Vec& x) {
  return (metric.inverse(x) * hessian_at(metric, f, x)).trace();
}

double divergence_of_form(const MetricField& metric, const ClosedOneForm& omega, const Vec& x) {
  const int n = metric.dim();
  const Mat ginv = metric.inverse(x);
  const Vec w = omega.value(x);
  const Vec X = ginv * w;
  const Mat dw = omega.derivative(x);
  double div = 0.0;
  if (metric.is_constant()) return (ginv * dw).trace();
  const auto dg = metric.dg(x);
  for (int i = 0; i < n; ++i) {
    const Mat dginv = -ginv * dg[i] * ginv;
    div += (dginv.row(i)).dot(w) + ginv.row(i).dot(dw.row(i));
  }
  return div + contracted_christoffel(metric, x, ginv).dot(X);
}

ScalarField half_norm_squared(const MetricField& metric, const ClosedOneForm& omega) {
  const int n = metric.dim();
  auto eval = [metric, omega](const Vec& x) {
    const Vec w = omega.value(x);
    return 0.5 * w.dot(metric.inverse(x) * w);
  };
  auto grad = [metric, omega, n](const Vec& x) -> Vec {
    const Vec w = omega.value(x);
    const Mat ginv = metric.inverse(x);
    const Vec X = ginv * w;
    const Mat dw = omega.derivative(x);
    Vec gr = dw * X;
    if (!metric.is_constant()) {
      const auto dg = metric.dg(x);
      for (int k = 0; k < n; ++k) gr[k] -= 0.5 * X.dot(dg[k] * X);
    }
    return gr;
  };
  return ScalarField::from_functions(n, eval, grad);
}

}  // namespace wkam
