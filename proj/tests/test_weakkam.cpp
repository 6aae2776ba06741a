#include "support.hpp"
#include "wkam/weakkam.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace wkam;
using test::vec2;

namespace {

std::size_t offset_index(const ActionKernel& K, const std::vector<int>& d) {
  for (std::size_t j = 0; j < K.offsets.size(); ++j)
    if (K.offsets[j] == d) return j;
  throw std::logic_error("offset not in stencil");
}

ValueFunction random_values(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  ValueFunction u{g, std::vector<double>(g.size())};
  for (double& e : u.values) e = U(rng);
  return u;
}

// Generic small setup: potential, harmonic and exact form parts.
LagrangianSpec generic() {
  return {MetricField::conformal(test::sine(0.05, 1, 0)), test::cosine(0.05, 1, 0),
          ClosedOneForm{vec2(0.2, 0.1), test::sine(0.05, 0, 1)}, 0.0};
}

}  // namespace

TEST_CASE("grid indexing") {
  const Grid g(3, 8);
  CHECK(g.size() == 512);
  CHECK(g.index({0, 0, 1}) == 1);  // last axis fastest
  CHECK(g.index({1, 0, 0}) == 64);
  CHECK(g.index({-1, 8, 9}) == g.index({7, 0, 1}));
  const std::size_t i = g.index({2, 5, 7});
  CHECK(g.coords(i) == std::vector<int>{2, 5, 7});
  CHECK(g.nearest(g.point(i)) == i);
  CHECK(g.shifted(i, {1, -6, 1}) == g.index({3, 7, 0}));
}

TEST_CASE("kernel entries") {
  const LagrangianSpec free{MetricField::flat(2), ScalarField::zero(2), ClosedOneForm::zero(2), 0.0};
  const ActionKernel K = build_kernel(free, Grid(2, 64), 0.05, 3);
  CHECK(K.stencil_size() == 49);
  CHECK(K.offsets.front() == std::vector<int>{-3, -3});
  CHECK(K.offsets.back() == std::vector<int>{3, 3});
  CHECK(K.step_cost(offset_index(K, {1, 0}), 100) == doctest::Approx(0.00244140625).epsilon(1e-14));
  CHECK(K.step_cost(offset_index(K, {0, 0}), 7) == 0.0);

  // trapezoid potential and metric, exact form integral
  const LagrangianSpec s = generic();
  const ActionKernel G = build_kernel(s, Grid(2, 32), 0.1, 2);
  const std::size_t j = offset_index(G, {2, -1}), x = G.grid.index({5, 9});
  const std::size_t y = G.grid.index({3, 10});
  const Vec d = vec2(2.0 / 32, -1.0 / 32), v = d / 0.1;
  const Vec px = G.grid.point(x), py = G.grid.point(y);
  const double kin = 0.25 * v.dot((s.metric.g(px) + s.metric.g(py)) * v);
  const double expected = 0.1 * (kin - 0.5 * (s.f(px) + s.f(py))) - s.omega.constants.dot(d) - (s.omega.phi(px) - s.omega.phi(py));
  CHECK(G.step_cost(j, x) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("kernel validation") {
  const LagrangianSpec s = test::flat_harmonic();
  CHECK_THROWS_AS(build_kernel(s, Grid(2, 16), 0.001, 3), ConfigError);  // speed above v_max
  CHECK_THROWS_AS(build_kernel(s, Grid(2, 16), 0.5, 8), ConfigError);    // wider than the grid
  CHECK_THROWS_AS(build_kernel(s, Grid(2, 16), 0.0, 1), ConfigError);
  CHECK_FALSE(build_kernel(s, Grid(2, 64), 0.5, 1).warnings.empty());  // speed 1/32 is too slow for |ω| = 0.5
}

TEST_CASE("Lax-Oleinik operator laws") {
  const ActionKernel K = build_kernel(generic(), Grid(2, 16), 0.1, 2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> P(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const ValueFunction u = random_values(K.grid, rng);
    ValueFunction v = u, w = random_values(K.grid, rng), ua = u;
    for (double& e : v.values) e += P(rng);
    for (double& e : ua.values) e += 3.25;
    const ValueFunction Tu = lax_oleinik_minus(K, u), Tv = lax_oleinik_minus(K, v), Tw = lax_oleinik_minus(K, w);
    const ValueFunction Tua = lax_oleinik_minus(K, ua);
    double in = 0, out = 0;
    for (std::size_t i = 0; i < K.grid.size(); ++i) {
      REQUIRE(Tu[i] <= Tv[i]);
      REQUIRE(std::abs(Tua[i] - Tu[i] - 3.25) < 1e-12);
      in = std::max(in, std::abs(u[i] - w[i]));
      out = std::max(out, std::abs(Tu[i] - Tw[i]));
    }
    CHECK(out <= in + 1e-12);
  }
}

TEST_CASE("argmin variant agrees with T-") {
  const ActionKernel K = build_kernel(generic(), Grid(2, 16), 0.1, 2);
  std::mt19937_64 rng(3);
  const ValueFunction u = random_values(K.grid, rng);
  std::vector<std::uint32_t> arg;
  const ValueFunction a = lax_oleinik_minus_argmin(K, u, arg), b = lax_oleinik_minus(K, u);
  CHECK(a.values == b.values);
  for (std::size_t x = 0; x < K.grid.size(); x += 5) {
    std::vector<int> neg = K.offsets[arg[x]];
    for (int& e : neg) e = -e;
    CHECK(u[K.grid.shifted(x, neg)] + K.step_cost(arg[x], x) == a[x]);
  }
}

TEST_CASE("T+ is T- of the reversed Lagrangian") {
  const LagrangianSpec s = generic();
  const Grid g(2, 16);
  const ActionKernel K = build_kernel(s, g, 0.1, 2), R = build_kernel(s.reversed(), g, 0.1, 2);
  std::mt19937_64 rng(5);
  const ValueFunction u = random_values(g, rng);
  ValueFunction neg = u;
  for (double& e : neg.values) e = -e;
  const ValueFunction plus = lax_oleinik_plus(K, u), minus = lax_oleinik_minus(R, neg);
  for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(std::abs(plus[i] + minus[i]) < 1e-12);
}

TEST_CASE("T+ T- pulls back below u") {
  const ActionKernel K = build_kernel(generic(), Grid(2, 16), 0.1, 2);
  std::mt19937_64 rng(11);
  const ValueFunction u = random_values(K.grid, rng);
  const ValueFunction back = lax_oleinik_plus(K, lax_oleinik_minus(K, u));
  const ValueFunction fwd = lax_oleinik_minus(K, lax_oleinik_plus(K, u));
  for (std::size_t i = 0; i < K.grid.size(); ++i) {
    REQUIRE(back[i] <= u[i] + 1e-12);
    REQUIRE(fwd[i] >= u[i] - 1e-12);
  }
}

TEST_CASE("grid action has the Markov property") {
  const ActionKernel K = build_kernel(generic(), Grid(2, 16), 0.1, 2);
  const std::size_t x = K.grid.index({3, 4});
  const ValueFunction a3 = dp_action(K, x, 3), a5 = dp_action(K, x, 5);
  for (std::size_t z : {std::size_t{0}, std::size_t{77}, std::size_t{200}}) {
    double best = 1e300;
    for (std::size_t y = 0; y < K.grid.size(); ++y) best = std::min(best, a3[y] + dp_action(K, y, 2)[z]);
    CHECK(best == doctest::Approx(a5[z]).epsilon(1e-12));
  }
}

TEST_CASE("grid action of a free particle") {
  const LagrangianSpec s = test::flat_harmonic();
  const ActionKernel K = build_kernel(s, Grid(2, 64), 0.05, 3);
  const std::size_t x = K.grid.index({10, 10});
  const ValueFunction a = dp_action(K, x, 2);
  // two equal steps of (1, 2) cells
  const Vec d = vec2(2.0 / 64, 4.0 / 64);
  const double T = 0.1;
  CHECK(a[K.grid.index({12, 14})] == doctest::Approx(0.5 * d.squaredNorm() / T - 0.3 * d[0] - 0.4 * d[1]).epsilon(1e-13));
  CHECK(a[K.grid.index({40, 40})] >= 0.5 * kBig);  // out of reach
  int visits = 0;
  dp_action_visit(K, x, 2, [&](int k, const ValueFunction& v) {
    ++visits;
    if (k == 2) CHECK(v.values == a.values);
  });
  CHECK(visits == 2);
}

TEST_CASE("critical value of the flat harmonic Lagrangian is the discrete Legendre value") {
  // With dt = 1/2 and r = N/4 the critical value is max over grid velocities of ω·v − ½|v|².
  const LagrangianSpec s = test::flat_harmonic();
  double prev = 1e300;
  for (int N : {32, 64, 128}) {
    const ActionKernel K = build_kernel(s, Grid(2, N), 0.5, N / 4);
    const CriticalValueResult r = estimate_critical_value(K, 1e-9, 100);
    double oracle = -1e300;
    const double unit = 2.0 / N;
    for (int i = -N / 4; i <= N / 4; ++i)
      for (int j = -N / 4; j <= N / 4; ++j) {
        const double v1 = i * unit, v2 = j * unit;
        oracle = std::max(oracle, 0.3 * v1 + 0.4 * v2 - 0.5 * (v1 * v1 + v2 * v2));
      }
    CHECK(r.estimate.c == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(r.estimate.residual <= 1e-9);
    CHECK(r.u.oscillation() <= 1e-12);
    const double err = std::abs(r.estimate.c - 0.125);
    CHECK(err < prev / 3.9);  // second order in dx/dt
    prev = err;
  }
  CHECK(prev == doctest::Approx(2.44140625e-5).epsilon(1e-6));
}

TEST_CASE("one-dimensional critical value") {
  // ω = (0.25, 0) is representable at dt = 1/2, r = N/4: c = ½·0.25² exactly.
  const LagrangianSpec s = test::flat_harmonic(0.25, 0.0);
  const CriticalValueResult r = estimate_critical_value(build_kernel(s, Grid(2, 32), 0.5, 8), 1e-9, 100);
  CHECK(r.estimate.c == doctest::Approx(0.03125).epsilon(1e-12));
}

TEST_CASE("exact forms give c = 0 and u = -phi up to a constant") {
  const LagrangianSpec s{MetricField::flat(2), ScalarField::zero(2), ClosedOneForm{vec2(0, 0), test::sine(0.1, 1, 0)}, 0.0};
  const ActionKernel K = build_kernel(s, Grid(2, 32), 0.5, 8);
  const CriticalValueResult r = estimate_critical_value(K, 1e-9, 2000);
  CHECK(std::abs(r.estimate.c) <= 5e-3);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < K.grid.size(); ++i) {
    const double w = r.u[i] + s.omega.phi(K.grid.point(i));
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  CHECK(0.5 * (hi - lo) <= 2e-2);
  CHECK(r.u.oscillation() >= 0.15);
}

TEST_CASE("mechanical critical value is max f") {
  const ActionKernel K = build_kernel(test::mechanical(), Grid(2, 32), 0.5, 8);
  const CriticalValueResult r = estimate_critical_value(K, 1e-9, 2000);
  CHECK(r.estimate.c == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(r.estimate.converged);
  CHECK(fixed_point_residual(K, r.u, r.estimate.c) <= 1e-9);
  CHECK(r.u[0] == 0.0);  // normalized at node 0
}

TEST_CASE("domination and calibration") {
  const ActionKernel K = build_kernel(test::mechanical(), Grid(2, 32), 0.5, 8);
  const CriticalValueResult r = estimate_critical_value(K, 1e-9, 2000);
  const double c = r.estimate.c;
  const DominationReport d = verify_domination(K, r.u, c, 1e-9, 64, 10, 9);
  CHECK(d.ok);
  CHECK(d.violations.empty());
  CHECK(d.min_slack >= -1e-9);
  const CalibratedCurve cc = backward_calibrated_curve(K, r.u, c, K.grid.index({10, 3}), 12);
  CHECK(cc.nodes.size() == 13);
  CHECK(cc.max_defect <= 1e-9);
  // reconstructing the path gives zero slack
  GridPath p;
  for (std::size_t k = cc.nodes.size(); k-- > 0;) p.nodes.push_back(cc.nodes[k]);
  for (std::size_t k = cc.offset.size(); k-- > 0;) p.offsets.push_back(cc.offset[k]);
  CHECK(std::abs(path_slack(K, r.u, c, p)) <= 1e-9);
}

TEST_CASE("calibrated velocity in the harmonic case") {
  const ActionKernel K = build_kernel(test::flat_harmonic(), Grid(2, 64), 0.05, 3);
  const CriticalValueResult r = estimate_critical_value(K, 1e-9, 100);
  const CalibratedCurve cc = backward_calibrated_curve(K, r.u, r.estimate.c, 0, 10);
  const double tol = 2 * K.grid.dx() / K.dt;
  for (std::size_t k = 0; k + 1 < cc.nodes.size(); ++k)
    CHECK(test::max_abs(cc.velocity(K, k) - vec2(0.3, 0.4)) <= tol);
}

TEST_CASE("gradient of the grid action matches Legendre momenta") {
  const LagrangianSpec s = test::flat_harmonic();
  const ActionKernel K = build_kernel(s, Grid(2, 64), 0.5, 16);
  // y near x + tω so the minimizing lift lies inside the stencil reach
  const GradientCheckReport rep = prop21_gradient_check(s, K, K.grid.index({10, 10}), K.grid.index({29, 36}), 2);
  INFO(rep.diagnostic);
  REQUIRE_FALSE(rep.skipped);
  CHECK(rep.ok);
  CHECK(rep.max_error <= rep.tolerance);
  // d_y A = L_v at the end: v − ω
  CHECK(test::max_abs(rep.lv_end - (vec2(19.0 / 64, 26.0 / 64) - vec2(0.3, 0.4))) < 1e-6);
}

TEST_CASE("free-particle action at a quarter") {
  const LagrangianSpec s{MetricField::flat(2), ScalarField::zero(2), ClosedOneForm::zero(2), 0.0};
  // 1D lattice oracle: min Σ (j dx)²/(2dt) over `steps` moves of |j| ≤ r summing to `cells`
  auto lattice = [](int N, double dt, int r, int steps, int cells) {
    std::vector<double> best(cells + 1, 1e300);
    best[0] = 0.0;
    for (int k = 0; k < steps; ++k) {
      std::vector<double> next(cells + 1, 1e300);
      for (int a = 0; a <= cells; ++a)
        for (int j = 0; j <= r && a + j <= cells; ++j)
          next[a + j] = std::min(next[a + j], best[a] + 0.5 * (j / double(N)) * (j / double(N)) / dt);
      best = next;
    }
    return best[cells];
  };
  const ActionKernel K = build_kernel(s, Grid(2, 64), 0.05, 3);
  const double a = dp_action(K, K.grid.index({0, 0}), 20)[K.grid.index({16, 0})];
  CHECK(a == doctest::Approx(lattice(64, 0.05, 3, 20, 16)).epsilon(1e-12));
  CHECK(a == doctest::Approx(0.0390625).epsilon(1e-12));
  // the lattice quantum dx/dt = 0.3125 exceeds the speed 0.25
  CHECK(a - 0.03125 == doctest::Approx(0.0078125).epsilon(1e-9));
  // with a representable speed the continuum value is exact
  const ActionKernel C = build_kernel(s, Grid(2, 64), 0.5, 16);
  CHECK(dp_action(C, 0, 2)[C.grid.index({16, 0})] == doctest::Approx(0.03125).epsilon(1e-12));
}

TEST_CASE("calibrated curves of the free particle are stationary") {
  const LagrangianSpec s{MetricField::flat(2), ScalarField::zero(2), ClosedOneForm::zero(2), 0.0};
  const ActionKernel K = build_kernel(s, Grid(2, 32), 0.5, 8);
  const CriticalValueResult r = estimate_critical_value(K, 1e-9, 100);
  CHECK(r.estimate.c == 0.0);
  const CalibratedCurve cc = backward_calibrated_curve(K, r.u, 0.0, 77, 10);
  for (std::size_t n : cc.nodes) CHECK(n == 77);
}

TEST_CASE("mechanical calibrated curves approach the maximum line") {
  const ActionKernel K = build_kernel(test::mechanical(), Grid(2, 32), 0.5, 8);
  const CriticalValueResult r = estimate_critical_value(K, 1e-9, 2000);
  for (std::size_t x : {K.grid.index({16, 3}), K.grid.index({9, 20}), K.grid.index({25, 11})}) {
    const CalibratedCurve cc = backward_calibrated_curve(K, r.u, r.estimate.c, x, 80);
    const int i1 = K.grid.coords(cc.nodes.back())[0];
    CHECK(std::min(i1, K.grid.N() - i1) <= 1);
    CHECK(cc.max_defect <= 2e-9);
  }
}

TEST_CASE("path slack") {
  const ActionKernel K = build_kernel(test::mechanical(), Grid(2, 32), 0.5, 8);
  const CriticalValueResult r = estimate_critical_value(K, 1e-9, 2000);
  const double c = r.estimate.c;
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> step(0, K.stencil_size() - 1);
  for (int trial = 0; trial < 20; ++trial) {
    GridPath p;
    p.nodes.push_back(K.grid.index({11, 4}));
    for (int k = 0; k < 12; ++k) {
      p.offsets.push_back(step(rng));
      p.nodes.push_back(K.grid.shifted(p.nodes.back(), K.offsets[p.offsets.back()]));
    }
    CHECK(path_slack(K, r.u, c, p) > 0.0);
  }
  // resting on the maximum line costs nothing
  GridPath rest;
  const std::size_t still = offset_index(K, {0, 0}), x = K.grid.index({0, 5});
  rest.nodes.assign(13, x);
  rest.offsets.assign(12, still);
  CHECK(std::abs(path_slack(K, r.u, c, rest)) <= 1e-9);
}

TEST_CASE("gradient check skips the flat cut locus") {
  const LagrangianSpec s{MetricField::flat(2), ScalarField::zero(2), ClosedOneForm::zero(2), 0.0};
  const ActionKernel K = build_kernel(s, Grid(2, 64), 0.5, 16);
  const GradientCheckReport rep = prop21_gradient_check(s, K, K.grid.index({0, 10}), K.grid.index({32, 10}), 2);
  CHECK(rep.skipped);
  CHECK(rep.diagnostic.find("two minimizers") != std::string::npos);
  // off the cut locus the free-particle gradient is the velocity
  const GradientCheckReport ok = prop21_gradient_check(s, K, K.grid.index({0, 10}), K.grid.index({8, 10}), 2);
  REQUIRE_FALSE(ok.skipped);
  CHECK(ok.ok);
  CHECK(test::max_abs(ok.lv_end - vec2(0.125, 0.0)) <= 1e-6);
  CHECK(test::max_abs(ok.fd_grad_x + ok.lv_start) <= ok.tolerance);
}

TEST_CASE("value CSV") {
  ValueFunction u{Grid(2, 16), std::vector<double>(256, 0.5)};
  std::ostringstream os;
  dump_value_csv(u, os);
  const std::string out = os.str();
  CHECK(out.substr(0, out.find('\n')) == "i1,i2,x1,x2,u");
  CHECK(std::count(out.begin(), out.end(), '\n') == 257);
}
