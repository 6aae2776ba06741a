#pragma once

#include "wkam/fields.hpp"
#include "wkam/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace wkam {

// Periodic metric tensor on the chart torus.
//
// Built-ins carry analytic first and second derivatives. Closure metrics
// without derivatives use central differences with step h_g; second
// derivatives use max(h_g, 1e-4) to stay clear of cancellation.
class MetricField {
 public:
  using MetricFn = std::function<Mat(const Vec&)>;
  // dg[k] = ∂_k g
  using DerivFn = std::function<std::vector<Mat>(const Vec&)>;
  // d2g[k*n + l] = ∂_k ∂_l g
  using Deriv2Fn = std::function<std::vector<Mat>(const Vec&)>;

  MetricField() = default;

  static MetricField flat(int dim);
  static MetricField constant(const Mat& g);
  // g = e^{2λ} δ
  static MetricField conformal(const ScalarField& lambda);
  // g = diag(e^{2λ_1}, ..., e^{2λ_n})
  static MetricField diagonal(std::vector<ScalarField> lambdas);
  static MetricField from_functions(int dim, MetricFn g, DerivFn dg = {}, Deriv2Fn d2g = {});

  int dim() const { return dim_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  bool has_analytic_derivatives() const { return kind_ != Kind::closure || static_cast<bool>(dg_); }

  Mat g(const Vec& x) const;
  Mat inverse(const Vec& x) const;  // throws DegenerateMetricError
  double sqrt_det(const Vec& x) const;
  std::vector<Mat> dg(const Vec& x) const;
  std::vector<Mat> d2g(const Vec& x) const;

  // Central-difference derivatives regardless of analytic availability.
  std::vector<Mat> dg_fd(const Vec& x, double h) const;

  double h_g = 1e-5;

 private:
  enum class Kind { constant, diagonal, closure };
  void check_step() const;

  Kind kind_ = Kind::constant;
  int dim_ = 0;
  Mat const_g_;
  std::vector<ScalarField> lambdas_;
  MetricFn g_;
  DerivFn dg_;
  Deriv2Fn d2g_;
};

// christoffel[k](i, j) = Γ^k_ij
using Christoffel = std::vector<Mat>;

Christoffel christoffel_at(const MetricField& metric, const Vec& x);
// Finite-difference Christoffels with an explicit step, for scheme checks.
Christoffel christoffel_fd(const MetricField& metric, const Vec& x, double h);
// dchristoffel[l][k](i, j) = ∂_l Γ^k_ij
std::vector<Christoffel> christoffel_derivative(const MetricField& metric, const Vec& x);

// R^l_{ijk}, stored at ((l*n + i)*n + j)*n + k, with R(∂_i,∂_j)∂_k = R^l_{ijk} ∂_l.
struct RiemannTensor {
  int n = 0;
  std::vector<double> data;
  double operator()(int l, int i, int j, int k) const {
    return data[static_cast<std::size_t>(((l * n + i) * n + j) * n + k)];
  }
  // R(u, v) w
  Vec apply(const Vec& u, const Vec& v, const Vec& w) const;
};

RiemannTensor riemann_at(const MetricField& metric, const Vec& x);
Mat ricci_tensor(const MetricField& metric, const Vec& x);

struct CurvatureReport {
  Vec point;
  Vec direction;
  double ricci = 0.0;
  RiemannTensor riemann_sample;
};

// Ric(v) = tr(w ↦ R(w, v) v)
double ricci_at(const MetricField& metric, const Vec& x, const Vec& v);
CurvatureReport curvature_report(const MetricField& metric, const Vec& x, const Vec& v);

// Musical isomorphisms.
Vec sharp(const MetricField& metric, const Vec& x, const Vec& covector);
Vec flat(const MetricField& metric, const Vec& x, const Vec& vector);

Vec gradient(const MetricField& metric, const ScalarField& f, const Vec& x);
double divergence(const MetricField& metric, const VectorField& X, const Vec& x);
double laplacian(const MetricField& metric, const ScalarField& f, const Vec& x);
Mat hessian_at(const MetricField& metric, const ScalarField& f, const Vec& x);

// div ω♯ computed from the analytic structure of the form.
double divergence_of_form(const MetricField& metric, const ClosedOneForm& omega, const Vec& x);
// ½ g(ω♯, ω♯) as a scalar field.
ScalarField half_norm_squared(const MetricField& metric, const ClosedOneForm& omega);

}  // namespace wkam
