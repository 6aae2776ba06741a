#include "support.hpp"
#include "wkam/geometry.hpp"

#include <doctest.h>

#include <random>

using namespace wkam;
using test::kPi;
using test::vec2;

namespace {

// λ = 0.1 sin 2πx₁ and its derivatives
double lam(const Vec& x) { return 0.1 * std::sin(2 * kPi * x[0]); }
double lam1(const Vec& x) { return 0.2 * kPi * std::cos(2 * kPi * x[0]); }
double lam11(const Vec& x) { return -0.4 * kPi * kPi * std::sin(2 * kPi * x[0]); }

// Gauss curvature of e^{2λ}δ: K = −e^{−2λ} Δλ
double gauss(const Vec& x) { return -std::exp(-2 * lam(x)) * lam11(x); }

MetricField conformal() { return MetricField::conformal(test::sine(0.1, 1, 0)); }

}  // namespace

TEST_CASE("conformal Christoffel symbols match the closed form") {
  const MetricField g = conformal();
  for (double x1 : {0.0, 0.13, 0.5, 0.77}) {
    const Vec x = vec2(x1, 0.3);
    const Christoffel G = christoffel_at(g, x);
    const double a = lam1(x);
    CHECK(G[0](0, 0) == doctest::Approx(a).epsilon(1e-12));
    CHECK(G[0](1, 1) == doctest::Approx(-a).epsilon(1e-12));
    CHECK(G[1](0, 1) == doctest::Approx(a).epsilon(1e-12));
    CHECK(G[1](1, 0) == doctest::Approx(a).epsilon(1e-12));
    CHECK(std::abs(G[0](0, 1)) < 1e-14);
    CHECK(std::abs(G[1](0, 0)) < 1e-14);
  }
  CHECK(christoffel_at(g, vec2(0.0, 0.0))[0](0, 0) == doctest::Approx(0.2 * kPi).epsilon(1e-12));
}

TEST_CASE("finite-difference Christoffels converge to the analytic ones") {
  const MetricField g = conformal();
  const Vec x = vec2(0.21, 0.64);
  const Christoffel G = christoffel_at(g, x);
  double prev = 1e300;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    const Christoffel F = christoffel_fd(g, x, h);
    double e = 0;
    for (int k = 0; k < 2; ++k) e = std::max(e, test::max_abs(G[k] - F[k]));
    CHECK(e < prev / 3.5);  // second order
    prev = e;
  }
}

TEST_CASE("closure metric without derivatives falls back to differences") {
  const MetricField ref = conformal();
  const MetricField g = MetricField::from_functions(2, [&](const Vec& x) { return ref.g(x); });
  const Vec x = vec2(0.4, 0.1);
  const Christoffel a = christoffel_at(ref, x), b = christoffel_at(g, x);
  for (int k = 0; k < 2; ++k) CHECK(test::max_abs(a[k] - b[k]) < 1e-8);
  CHECK(ricci_at(g, x, vec2(1, 0)) == doctest::Approx(ricci_at(ref, x, vec2(1, 0))).epsilon(1e-5));
}

TEST_CASE("Ricci and Riemann on a conformal 2-torus") {
  const MetricField g = conformal();
  for (double x1 : {0.1, 0.25, 0.6, 0.9}) {
    const Vec x = vec2(x1, 0.5);
    const double K = gauss(x);
    CHECK(test::max_abs(ricci_tensor(g, x) - K * g.g(x)) < 1e-10);
    const Vec v = vec2(0.3, -0.7);
    CHECK(ricci_at(g, x, v) == doctest::Approx(K * v.dot(g.g(x) * v)).epsilon(1e-10));

    const RiemannTensor R = riemann_at(g, x);
    for (int l = 0; l < 2; ++l)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) {
            CHECK(R(l, i, j, k) == doctest::Approx(-R(l, j, i, k)).epsilon(1e-12));
            // first Bianchi identity
            CHECK(std::abs(R(l, i, j, k) + R(l, j, k, i) + R(l, k, i, j)) < 1e-10);
          }
  }
}

TEST_CASE("flat metric has zero curvature") {
  const MetricField g = MetricField::flat(3);
  Vec x(3);
  x << 0.1, 0.2, 0.3;
  CHECK(test::max_abs(ricci_tensor(g, x)) == 0.0);
  const CurvatureReport rep = curvature_report(g, x, Vec::Ones(3));
  CHECK(rep.ricci == 0.0);
}

TEST_CASE("musical isomorphisms are inverse") {
  const MetricField g = conformal();
  const Vec x = vec2(0.3, 0.8), w = vec2(0.2, -0.5);
  CHECK(test::max_abs(flat(g, x, sharp(g, x, w)) - w) < 1e-14);
  CHECK(sharp(g, x, w)[0] == doctest::Approx(std::exp(-2 * lam(x)) * 0.2).epsilon(1e-14));
}

TEST_CASE("Laplacians against closed forms") {
  const ScalarField s = test::sine(1.0, 1, 0);
  for (double x1 : {0.1, 0.35, 0.8}) {
    const Vec x = vec2(x1, 0.2);
    CHECK(laplacian(MetricField::flat(2), s, x) == doctest::Approx(-4 * kPi * kPi * std::sin(2 * kPi * x1)).epsilon(1e-12));
    // 2D conformal: Δ_g = e^{−2λ} Δ
    CHECK(laplacian(conformal(), s, x) ==
          doctest::Approx(-4 * kPi * kPi * std::sin(2 * kPi * x1) * std::exp(-2 * lam(x))).epsilon(1e-10));
  }
}

TEST_CASE("divergence of a constant form on a diagonal metric") {
  // g = diag(e^{2λ₁}, e^{2λ₂}); div ω♯ = e^{−λ₁−λ₂} Σ_a ∂_a(e^{λ₁+λ₂−2λ_a}) ω_a
  const ScalarField l1 = test::sine(0.1, 1, 0), l2 = test::cosine(0.1, 0, 1);
  const MetricField g = MetricField::diagonal({l1, l2});
  const ClosedOneForm w = ClosedOneForm::harmonic(vec2(0.3, 0.4));
  for (double a : {0.1, 0.4, 0.7})
    for (double b : {0.2, 0.9}) {
      const Vec x = vec2(a, b);
      const double L1 = l1(x), L2 = l2(x);
      const Vec d1 = l1.grad(x), d2 = l2.grad(x);
      // ∂_1(e^{λ₂−λ₁}), ∂_2(e^{λ₁−λ₂})
      const double t1 = std::exp(L2 - L1) * (d2[0] - d1[0]);
      const double t2 = std::exp(L1 - L2) * (d1[1] - d2[1]);
      const double expected = std::exp(-L1 - L2) * (t1 * 0.3 + t2 * 0.4);
      CHECK(divergence_of_form(g, w, x) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("constant forms are divergence-free under a 2D conformal metric") {
  const ClosedOneForm w = ClosedOneForm::harmonic(vec2(0.3, 0.4));
  CHECK(std::abs(divergence_of_form(conformal(), w, vec2(0.17, 0.4))) < 1e-14);
}

TEST_CASE("vector-field divergence agrees with the form divergence") {
  const MetricField g = conformal();
  const ClosedOneForm w{vec2(0.3, 0.4), test::sine(0.1, 1, 0)};
  VectorField X{[&](const Vec& x) { return sharp(g, x, w.value(x)); }, {}};
  const Vec x = vec2(0.31, 0.62);
  CHECK(divergence(g, X, x) == doctest::Approx(divergence_of_form(g, w, x)).epsilon(1e-7));
}

TEST_CASE("Hessian trace is the Laplacian") {
  const MetricField g = conformal();
  const ScalarField f = test::cosine(0.3, 1, 1);
  const Vec x = vec2(0.12, 0.47);
  const Mat H = hessian_at(g, f, x);
  CHECK((g.inverse(x) * H).trace() == doctest::Approx(laplacian(g, f, x)).epsilon(1e-10));
  CHECK(test::max_abs(H - H.transpose()) < 1e-12);
}

TEST_CASE("half norm squared of a form") {
  const MetricField g = conformal();
  const ClosedOneForm w = ClosedOneForm::harmonic(vec2(0.3, 0.4));
  const ScalarField h = half_norm_squared(g, w);
  const Vec x = vec2(0.2, 0.1);
  CHECK(h(x) == doctest::Approx(0.5 * 0.25 * std::exp(-2 * lam(x))).epsilon(1e-12));
}

TEST_CASE("degenerate metric is reported") {
  CHECK_THROWS_AS(MetricField::constant(Mat::Zero(2, 2)), DegenerateMetricError);
  // degenerates on the line x₁ = 0
  const MetricField g = MetricField::from_functions(2, [](const Vec& x) {
    Mat m = Mat::Identity(2, 2);
    m(0, 0) = std::sin(kPi * x[0]) * std::sin(kPi * x[0]);
    return m;
  });
  CHECK_NOTHROW(g.inverse(vec2(0.5, 0)));
  CHECK_THROWS_AS(g.inverse(vec2(0.0, 0)), DegenerateMetricError);
}

TEST_CASE("Ricci on the conformal torus at x = (1/4, 0)") {
  const MetricField g = conformal();
  const Vec x = vec2(0.25, 0.0);
  // unit g-norm direction: e^{−λ} e₁
  const Vec v = vec2(std::exp(-0.1), 0.0);
  CHECK(v.dot(g.g(x) * v) == doctest::Approx(1.0).epsilon(1e-14));
  const double expected = 0.4 * kPi * kPi * std::exp(-0.2);
  CHECK(expected == doctest::Approx(3.2322194575542613).epsilon(1e-14));
  CHECK(ricci_at(g, x, v) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(ricci_at(g, x, Vec::Zero(2)) == 0.0);
}

TEST_CASE("Ricci is quadratic in the direction") {
  const MetricField g = conformal();
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Vec x = vec2(0.5 * (U(rng) + 1), 0.5 * (U(rng) + 1)), v = vec2(U(rng), U(rng));
    const double a = 3 * U(rng);
    CHECK(ricci_at(g, x, a * v) == doctest::Approx(a * a * ricci_at(g, x, v)).epsilon(1e-10));
  }
}

TEST_CASE("flat Ricci vanishes at random points") {
  const MetricField g = MetricField::flat(2);
  const MetricField fd = MetricField::from_functions(2, [](const Vec&) { return Mat::Identity(2, 2); });
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Vec x = vec2(U(rng), U(rng)), v = vec2(U(rng) - 0.5, U(rng) - 0.5);
    CHECK(std::abs(ricci_at(g, x, v)) <= 1e-8);
    CHECK(std::abs(ricci_at(fd, x, v)) <= 1e-4);
  }
}

TEST_CASE("metric and Christoffels are periodic") {
  const MetricField g = conformal();
  const Vec x = vec2(0.37, 0.81);
  for (const Vec& e : {vec2(1, 0), vec2(0, 1), vec2(-2, 3)}) {
    CHECK(test::max_abs(g.g(x + e) - g.g(x)) < 1e-13);
    const Christoffel a = christoffel_at(g, x), b = christoffel_at(g, x + e);
    for (int k = 0; k < 2; ++k) CHECK(test::max_abs(a[k] - b[k]) < 1e-12);
  }
}

TEST_CASE("sharp on diag(4, 1)") {
  Mat m(2, 2);
  m << 4, 0, 0, 1;
  const MetricField g = MetricField::constant(m);
  const Vec v = sharp(g, vec2(0.1, 0.2), vec2(1, 0));
  CHECK(v[0] == 0.25);
  CHECK(v[1] == 0.0);
  CHECK(test::max_abs(sharp(MetricField::flat(2), vec2(0.3, 0.3), vec2(0.7, -0.2)) - vec2(0.7, -0.2)) == 0.0);
}

TEST_CASE("flat divergence and Hessian examples") {
  const MetricField g = MetricField::flat(2);
  VectorField X{[](const Vec& x) { return vec2(std::sin(2 * kPi * x[0]), 0); }, {}};
  CHECK(divergence(g, X, vec2(0, 0)) == doctest::Approx(2 * kPi).epsilon(1e-8));
  CHECK(divergence_of_form(g, ClosedOneForm::harmonic(vec2(0.3, 0.4)), vec2(0.6, 0.1)) == 0.0);
  const Mat H = hessian_at(g, test::sine(1.0, 1, 0), vec2(0.1, 0.4));
  CHECK(H(0, 0) == doctest::Approx(-4 * kPi * kPi * std::sin(0.2 * kPi)).epsilon(1e-12));
  CHECK(std::abs(H(0, 1)) < 1e-14);
  CHECK(std::abs(H(1, 1)) < 1e-14);
  CHECK(test::max_abs(hessian_at(conformal(), ScalarField::zero(2), vec2(0.3, 0.2))) == 0.0);
}

TEST_CASE("Laplacian is linear") {
  const MetricField g = conformal();
  const ScalarField f = test::sine(1.0, 1, 2), h = test::cosine(1.0, 2, -1);
  const double a = 0.7, b = -1.3;
  const ScalarField sum = ScalarField::fourier(2, {{a, false, {1, 2}}, {b, true, {2, -1}}});
  for (double x1 : {0.05, 0.4, 0.9}) {
    const Vec x = vec2(x1, 0.33);
    const double lhs = laplacian(g, sum, x), rhs = a * laplacian(g, f, x) + b * laplacian(g, h, x);
    CHECK(std::abs(lhs - rhs) <= 1e-11 * (1 + std::abs(rhs)));
  }
}

TEST_CASE("grid integral of the divergence vanishes") {
  // periodic trapezoid rule is spectrally accurate for smooth integrands
  const MetricField g = MetricField::diagonal({test::sine(0.1, 1, 0), test::cosine(0.1, 1, 1)});
  const ClosedOneForm w{vec2(0.3, -0.2), test::sine(0.05, 1, 1)};
  VectorField X{[&](const Vec& x) { return sharp(g, x, w.value(x)); }, {}};
  const int N = 48;
  const double dA = 1.0 / (N * N);
  double sum = 0, scale = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const Vec x = vec2(double(i) / N, double(j) / N);
      const double term = divergence_of_form(g, w, x) * g.sqrt_det(x) * dA;
      sum += term;
      scale += std::abs(term);
    }
  CHECK(scale > 1e-3);
  CHECK(std::abs(sum) <= 1e-10);
}

TEST_CASE("chart wrapping and minimal displacement") {
  CHECK(wrap01(1.25) == 0.25);
  CHECK(wrap01(-0.25) == 0.75);
  CHECK(wrap01(-1e-18) == 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    const Vec a = vec2(U(rng), U(rng)), b = vec2(U(rng), U(rng));
    const Vec w = wrap01(a), d = periodic_delta(a, b);
    for (int i = 0; i < 2; ++i) {
      REQUIRE(w[i] >= 0.0);
      REQUIRE(w[i] < 1.0);
      REQUIRE(d[i] >= -0.5);
      REQUIRE(d[i] < 0.5);
      const double k = b[i] - a[i] - d[i];
      REQUIRE(std::abs(k - std::round(k)) < 1e-12);
    }
  }
  CHECK(periodic_delta(vec2(0.9, 0), vec2(0.1, 0))[0] == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("cohomology class ignores the exact part") {
  const ClosedOneForm w{vec2(0.3, -0.4), test::sine(0.2, 1, 1)};
  CHECK(w.cohomology_class() == vec2(0.3, -0.4));
  CHECK(w.scaled(2).cohomology_class() == vec2(0.6, -0.8));
  CHECK(w.negated().cohomology_class() == vec2(-0.3, 0.4));
}
