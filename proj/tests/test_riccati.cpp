#include "support.hpp"
#include "wkam/riccati.hpp"

#include <doctest.h>

#include <sstream>

using namespace wkam;
using test::vec2;

TEST_CASE("comparison functions") {
  CHECK(comparison_function(2, -2.0, 1.0) == doctest::Approx(1.1752011936438014).epsilon(1e-14));  // sinh 1
  CHECK(comparison_function(2, 0.0, 0.7) == 0.7);
  CHECK(comparison_function(2, 2.0, 1.0) == doctest::Approx(0.8414709848078965).epsilon(1e-14));  // sin 1
  CHECK(comparison_derivative(2, -2.0, 1.0) == doctest::Approx(1.5430806348152437).epsilon(1e-14));
  CHECK(riccati_bound(2, -2.0, 1.0) == doctest::Approx(2.626070570998663).epsilon(1e-14));  // 2 coth 1
  CHECK(riccati_bound(2, 0.0, 0.5) == 4.0);
  CHECK(riccati_bound(3, 3.0, 0.5) == doctest::Approx(3.0 / std::tan(0.5)).epsilon(1e-14));
}

TEST_CASE("comparison domain errors") {
  CHECK_THROWS_AS(comparison_function(0, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(comparison_function(2, -1.0, 0.0), DomainError);
  CHECK_THROWS_AS(riccati_bound(2, 2.0, test::kPi), DomainError);
}

TEST_CASE("integrated Riccati solution stays below the bound") {
  for (int n : {1, 2, 3})
    for (double k : {-2.0, -1.0, 0.0})
      for (double slack : {0.0, 0.5}) {
        ComparisonOptions o;
        o.slack = [slack](double) { return slack; };
        const ComparisonReport r = verify_comparison(n, k, o);
        CHECK(r.ok);
        CHECK(r.max_excess <= 1e-6);
        // with slack and k = 0 (or n = 1) the solution blows down before the horizon
        if (r.diagnostic.empty()) CHECK(r.s.back() == doctest::Approx(20.0));
      }
}

TEST_CASE("equality case") {
  const ComparisonReport r = verify_comparison(2, 0.0);
  double err = 0;
  for (std::size_t i = 0; i < r.s.size(); ++i) err = std::max(err, std::abs(r.alpha[i] - 2.0 / r.s[i]));
  CHECK(err <= 1e-8);
}

TEST_CASE("slack pulls the solution strictly below") {
  ComparisonOptions o;
  o.slack = [](double) { return 0.5; };
  const ComparisonReport r = verify_comparison(2, -1.0, o);
  CHECK(r.alpha.back() < r.bound.back() - 0.1);
}

TEST_CASE("a larger initial value than n/s0 violates the bound") {
  ComparisonOptions o;
  o.alpha0 = 4.0 / o.s0;
  const ComparisonReport r = verify_comparison(2, 0.0, o);
  CHECK_FALSE(r.ok);
}

TEST_CASE("trace Riccati on a flat frame") {
  const LagrangianSpec s = test::flat_harmonic();
  const JacobiFrame F = propagate_jacobi_frame(s, integrate_flow(s, {vec2(0, 0), vec2(0.3, 0.4)}, 2.0, {1e-3}));
  const RiccatiTrace t = theta_along(F);
  for (std::size_t i = 1; i < t.s.size(); i += 111) CHECK(t.theta[i] == doctest::Approx(2.0 / t.s[i]).epsilon(1e-9));
  // five-point truncation of Θ̇ = −2/s² is about 8e-6 at s = 0.1
  CHECK(std::abs(t.max_residual) < 1e-5);
  for (std::size_t i = 2; i + 2 < t.s.size(); ++i)
    if (t.s[i] >= 0.5) REQUIRE(std::abs(t.residual[i]) < 1e-9);
  CHECK(t.k == 0.0);
}

TEST_CASE("trace Riccati inequality on a curved frame") {
  const LagrangianSpec s = test::curved();
  const JacobiFrame F = propagate_jacobi_frame(s, integrate_flow(s, {vec2(0.1, 0.2), vec2(0.4, 0.3)}, 2.0, {1e-3}));
  const RiccatiTrace t = theta_along(F);
  CHECK(t.max_residual <= 1e-8);
  CHECK(t.k < 0.0);
  for (std::size_t i = 1; i < t.s.size(); ++i) REQUIRE(t.theta[i] <= t.bound[i] + 1e-6);
}

TEST_CASE("matrix Riccati identity") {
  for (const LagrangianSpec& s : {test::flat_harmonic(), test::curved(), test::mechanical()}) {
    const JacobiFrame F = propagate_jacobi_frame(s, integrate_flow(s, {vec2(0.3, 0.6), vec2(-0.4, 0.5)}, 2.0, {1e-3}));
    const MatrixRiccatiReport r = matrix_riccati_residual(F);
    CHECK(r.max_residual <= 1e-6);
    CHECK(r.min_trace_gap >= -1e-12);
  }
}

TEST_CASE("Riccati identity on a synthetic frame with potential Hessian") {
  const JacobiFrame F = propagate_synthetic_frame(
      2,
      [](double s) {
        Mat R(2, 2), H(2, 2);
        R << 0.3 * std::cos(s), 0.1, 0.1, -0.2;
        H << 0.2, 0.0, 0.0, 0.1 * std::sin(s);
        return FrameCoefficients{R, H};
      },
      2.0, 1e-3);
  CHECK(matrix_riccati_residual(F).max_residual <= 1e-6);
}

TEST_CASE("trace CSV header") {
  const LagrangianSpec s = test::flat_harmonic();
  const JacobiFrame F = propagate_jacobi_frame(s, integrate_flow(s, {vec2(0, 0), vec2(0.3, 0.4)}, 0.05, {1e-3}));
  std::ostringstream os;
  dump_trace_csv(theta_along(F), os);
  CHECK(os.str().substr(0, os.str().find('\n')) == "s,theta,bound,ric_plus_hessf_trace,residual");
}

TEST_CASE("negative curvature equilibrium and margin") {
  const ComparisonReport eq = verify_comparison(2, -1.0);
  CHECK(eq.s.back() == doctest::Approx(20.0));
  CHECK(std::abs(eq.alpha.back() - std::sqrt(2.0)) <= 1e-6);

  ComparisonOptions o;
  o.slack = [](double) { return 0.5; };
  o.horizon = 5.0;
  const ComparisonReport r = verify_comparison(2, -1.0, o);
  for (std::size_t i = 1; i < r.s.size(); ++i) REQUIRE(r.bound[i] - r.alpha[i] >= 0.0);
}

TEST_CASE("comparison closed forms at sample points") {
  CHECK(comparison_function(2, 2.0, test::kPi / 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(riccati_bound(2, -2.0, 10.0) - 2.0) <= 1e-8);
}

TEST_CASE("s times theta tends to n") {
  for (const LagrangianSpec& s : {test::curved(), test::mechanical()}) {
    const JacobiFrame F = propagate_jacobi_frame(s, integrate_flow(s, {vec2(0.15, 0.35), vec2(0.4, -0.2)}, 0.5, {1e-3}));
    const RiccatiTrace t = theta_along(F);
    std::size_t i = 0;
    while (t.s[i] < 1e-2 - 1e-12) ++i;
    CHECK(t.s[i] == doctest::Approx(1e-2).epsilon(1e-9));
    CHECK(std::abs(t.s[i] * t.theta[i] - 2.0) <= 1e-3);
  }
}

TEST_CASE("nonnegative Ric plus Laplacian of f keeps theta below n/s") {
  // on the ridge x₁ = 1/2 the mechanical potential has Δf = 0.2π² > 0 and the line is invariant
  const LagrangianSpec s = test::mechanical();
  const JacobiFrame F = propagate_jacobi_frame(s, integrate_flow(s, {vec2(0.5, 0.2), vec2(0, 0.3)}, 3.0, {1e-3}));
  const RiccatiTrace t = theta_along(F);
  REQUIRE(t.s.size() > 100);
  // the first conjugate time is near π/√(0.2π²) ≈ 2.24
  CHECK(t.truncated);
  CHECK(t.s.back() == doctest::Approx(2.24).epsilon(0.02));
  for (std::size_t i = 1; i < t.s.size(); ++i) {
    REQUIRE(t.ric_plus_hessf[i] >= 0.0);
    REQUIRE(t.theta[i] <= 2.0 / t.s[i] + 1e-3);
  }
}
