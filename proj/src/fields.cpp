#include "wkam/fields.hpp"

#include <numbers>

namespace wkam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double phase(const FourierTerm& t, const Vec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.k.size(); ++i) s += t.k[i] * x[static_cast<Eigen::Index>(i)];
  return kTwoPi * s;
}

void check_term(const FourierTerm& t, int dim) {
  if (static_cast<int>(t.k.size()) != dim)
    throw ConfigError("fourier term wave vector has wrong dimension");
}

}  // namespace

ScalarField ScalarField::zero(int dim) {
  ScalarField f;
  f.dim_ = dim;
  return f;
}

ScalarField ScalarField::constant(int dim, double value) {
  ScalarField f = fourier(dim, {}, value);
  if (value == 0.0) f.kind_ = Kind::zero;
  return f;
}

ScalarField ScalarField::fourier(int dim, std::vector<FourierTerm> terms, double offset) {
  for (const auto& t : terms) check_term(t, dim);
  ScalarField f;
  f.kind_ = Kind::fourier;
  f.dim_ = dim;
  f.offset_ = offset;
  f.terms_ = std::move(terms);
  return f;
}

ScalarField ScalarField::from_functions(int dim, EvalFn fn, GradFn grad, HessFn hess) {
  ScalarField f;
  f.kind_ = Kind::closure;
  f.dim_ = dim;
  f.eval_ = std::move(fn);
  f.grad_ = std::move(grad);
  f.hess_ = std::move(hess);
  return f;
}

double ScalarField::operator()(const Vec& x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::fourier: {
      double s = offset_;
      for (const auto& t : terms_) {
        double th = phase(t, x);
        s += t.amp * (t.cosine ? std::cos(th) : std::sin(th));
      }
      return s;
    }
    case Kind::closure:
      return eval_(x);
  }
  return 0.0;
}

Vec ScalarField::grad(const Vec& x) const {
  Vec g = Vec::Zero(dim_);
  if (kind_ == Kind::zero) return g;
  if (kind_ == Kind::fourier) {
    for (const auto& t : terms_) {
      double th = phase(t, x);
      double d = t.amp * kTwoPi * (t.cosine ? -std::sin(th) : std::cos(th));
      for (int i = 0; i < dim_; ++i) g[i] += d * t.k[i];
    }
    return g;
  }
  if (grad_) return grad_(x);
  for (int i = 0; i < dim_; ++i) {
    Vec xp = x, xm = x;
    xp[i] += fd_step;
    xm[i] -= fd_step;
    g[i] = (eval_(xp) - eval_(xm)) / (2.0 * fd_step);
  }
  return g;
}

Mat ScalarField::hess(const Vec& x) const {
  Mat h = Mat::Zero(dim_, dim_);
  if (kind_ == Kind::zero) return h;
  if (kind_ == Kind::fourier) {
    for (const auto& t : terms_) {
      double th = phase(t, x);
      double d = -t.amp * kTwoPi * kTwoPi * (t.cosine ? std::cos(th) : std::sin(th));
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) h(i, j) += d * t.k[i] * t.k[j];
    }
    return h;
  }
  if (hess_) return hess_(x);
  const double e = fd_step;
  if (grad_) {
    for (int i = 0; i < dim_; ++i) {
      Vec xp = x, xm = x;
      xp[i] += e;
      xm[i] -= e;
      h.row(i) = ((grad_(xp) - grad_(xm)) / (2.0 * e)).transpose();
    }
    return 0.5 * (h + h.transpose());
  }
  const double f0 = eval_(x);
  for (int i = 0; i < dim_; ++i) {
    Vec xp = x, xm = x;
    xp[i] += e;
    xm[i] -= e;
    h(i, i) = (eval_(xp) - 2.0 * f0 + eval_(xm)) / (e * e);
    for (int j = i + 1; j < dim_; ++j) {
      Vec a = x, b = x, c = x, d = x;
      a[i] += e; a[j] += e;
      b[i] += e; b[j] -= e;
      c[i] -= e; c[j] += e;
      d[i] -= e; d[j] -= e;
      h(i, j) = h(j, i) = (eval_(a) - eval_(b) - eval_(c) + eval_(d)) / (4.0 * e * e);
    }
  }
  return h;
}

std::vector<Mat> ScalarField::third(const Vec& x) const {
  std::vector<Mat> out(dim_, Mat::Zero(dim_, dim_));
  if (kind_ == Kind::zero) return out;
  if (kind_ == Kind::fourier) {
    const double c3 = kTwoPi * kTwoPi * kTwoPi;
    for (const auto& t : terms_) {
      double th = phase(t, x);
      double d = t.amp * c3 * (t.cosine ? std::sin(th) : -std::cos(th));
      for (int a = 0; a < dim_; ++a)
        for (int i = 0; i < dim_; ++i)
          for (int j = 0; j < dim_; ++j) out[a](i, j) += d * t.k[a] * t.k[i] * t.k[j];
    }
    return out;
  }
  const double e = fd_step;
  for (int a = 0; a < dim_; ++a) {
    Vec xp = x, xm = x;
    xp[a] += e;
    xm[a] -= e;
    out[a] = (hess(xp) - hess(xm)) / (2.0 * e);
  }
  return out;
}

ScalarField ScalarField::scaled(double a) const {
  if (kind_ == Kind::zero || a == 0.0) return zero(dim_);
  if (kind_ == Kind::fourier) {
    auto terms = terms_;
    for (auto& t : terms) t.amp *= a;
    return fourier(dim_, std::move(terms), a * offset_);
  }
  ScalarField self = *this;
  GradFn g;
  HessFn h;
  if (grad_) g = [self, a](const Vec& x) -> Vec { return a * self.grad(x); };
  if (hess_) h = [self, a](const Vec& x) -> Mat { return a * self.hess(x); };
  ScalarField r = from_functions(dim_, [self, a](const Vec& x) { return a * self(x); }, g, h);
  r.fd_step = fd_step;
  return r;
}

ScalarField ScalarField::plus(const ScalarField& other) const {
  if (other.dim_ != dim_) throw ConfigError("scalar field dimension mismatch");
  if (kind_ == Kind::zero) return other;
  if (other.kind_ == Kind::zero) return *this;
  if (kind_ == Kind::fourier && other.kind_ == Kind::fourier) {
    auto terms = terms_;
    terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
    return fourier(dim_, std::move(terms), offset_ + other.offset_);
  }
  ScalarField a = *this, b = other;
  GradFn g;
  HessFn h;
  if (a.analytic_grad() || a.kind_ == Kind::fourier)
    if (b.analytic_grad() || b.kind_ == Kind::fourier)
      g = [a, b](const Vec& x) -> Vec { return a.grad(x) + b.grad(x); };
  if (a.analytic_hess() || a.kind_ == Kind::fourier)
    if (b.analytic_hess() || b.kind_ == Kind::fourier)
      h = [a, b](const Vec& x) -> Mat { return a.hess(x) + b.hess(x); };
  return from_functions(dim_, [a, b](const Vec& x) { return a(x) + b(x); }, g, h);
}

Mat VectorField::jacobian(const Vec& x) const {
  if (jac) return jac(x);
  const auto n = x.size();
  Mat J(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp[i] += fd_step;
    xm[i] -= fd_step;
    J.row(i) = ((eval(xp) - eval(xm)) / (2.0 * fd_step)).transpose();
  }
  return J;
}

ClosedOneForm ClosedOneForm::zero(int dim) { return {Vec::Zero(dim), ScalarField::zero(dim)}; }

ClosedOneForm ClosedOneForm::harmonic(const Vec& c) {
  return {c, ScalarField::zero(static_cast<int>(c.size()))};
}

ClosedOneForm ClosedOneForm::negated() const { return scaled(-1.0); }

ClosedOneForm ClosedOneForm::scaled(double a) const { return {a * constants, phi.scaled(a)}; }

ClosedOneForm ClosedOneForm::plus(const ClosedOneForm& other) const {
  return {constants + other.constants, phi.plus(other.phi)};
}

}  // namespace wkam
