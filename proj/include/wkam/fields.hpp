#pragma once

#include "wkam/types.hpp"

#include <functional>
#include <vector>

namespace wkam {

// amp * sin(2π k·x) or amp * cos(2π k·x)
struct FourierTerm {
  double amp = 0.0;
  bool cosine = false;
  std::vector<int> k;
};

// Periodic scalar field on the chart torus. Fourier fields carry exact
// derivatives; closure fields fall back to central differences.
class ScalarField {
 public:
  using EvalFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;

  ScalarField() = default;

  static ScalarField zero(int dim);
  static ScalarField constant(int dim, double value);
  static ScalarField fourier(int dim, std::vector<FourierTerm> terms, double offset = 0.0);
  static ScalarField from_functions(int dim, EvalFn f, GradFn grad = {}, HessFn hess = {});

  int dim() const { return dim_; }
  double operator()(const Vec& x) const;
  Vec grad(const Vec& x) const;
  Mat hess(const Vec& x) const;
  // third[a](i, j) = ∂_a ∂_i ∂_j f
  std::vector<Mat> third(const Vec& x) const;

  bool analytic_grad() const { return static_cast<bool>(grad_); }
  bool analytic_hess() const { return static_cast<bool>(hess_); }
  bool is_zero() const { return kind_ == Kind::zero; }
  const std::vector<FourierTerm>& terms() const { return terms_; }

  ScalarField scaled(double a) const;
  ScalarField plus(const ScalarField& other) const;

  // Step for the finite-difference fallback.
  double fd_step = 1e-4;

 private:
  enum class Kind { zero, fourier, closure };
  Kind kind_ = Kind::zero;
  int dim_ = 0;
  double offset_ = 0.0;
  std::vector<FourierTerm> terms_;
  EvalFn eval_;
  GradFn grad_;
  HessFn hess_;
};

// Vector field with optional Jacobian jac(i,j) = ∂_i X^j.
struct VectorField {
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jac;
  double fd_step = 1e-5;

  Mat jacobian(const Vec& x) const;
};

// ω = Σ c_i dx_i + dφ, closed by construction.
struct ClosedOneForm {
  Vec constants;
  ScalarField phi;

  static ClosedOneForm zero(int dim);
  static ClosedOneForm harmonic(const Vec& c);

  int dim() const { return static_cast<int>(constants.size()); }
  Vec value(const Vec& x) const { return constants + phi.grad(x); }
  // ∂_i ω_j (symmetric: Hessian of φ)
  Mat derivative(const Vec& x) const { return phi.hess(x); }
  // ∫ ω along any curve from lifted a to lifted b.
  double line_integral(const Vec& a, const Vec& b) const {
    return constants.dot(b - a) + phi(b) - phi(a);
  }
  const Vec& cohomology_class() const { return constants; }
  ClosedOneForm negated() const;
  ClosedOneForm scaled(double a) const;
  ClosedOneForm plus(const ClosedOneForm& other) const;
};

}  // namespace wkam
