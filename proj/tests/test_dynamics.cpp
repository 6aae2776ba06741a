#include "support.hpp"
#include "wkam/dynamics.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace wkam;
using test::vec2;

TEST_CASE("Lagrangian sign conventions") {
  const LagrangianSpec s = test::curved();
  const Vec x = vec2(0.2, 0.7), v = vec2(0.4, -0.3);
  const double expected = 0.5 * v.dot(s.metric.g(x) * v) - s.f(x) - s.omega.value(x).dot(v) + s.c;
  CHECK(lagrangian(s, x, v) == doctest::Approx(expected).epsilon(1e-15));
  // L̆(x, v) = L(x, −v)
  CHECK(lagrangian(s.reversed(), x, v) == doctest::Approx(lagrangian(s, x, -v)).epsilon(1e-15));
}

TEST_CASE("Legendre transform round trip and energy") {
  const LagrangianSpec s = test::curved();
  const PhaseState z{vec2(0.3, 0.1), vec2(-0.2, 0.5)};
  const CotangentState p = legendre(s, z);
  CHECK(test::max_abs(p.p - (s.metric.g(z.x) * z.v - s.omega.value(z.x))) < 1e-15);
  const PhaseState back = inverse_legendre(s, p);
  CHECK(test::max_abs(back.v - z.v) < 1e-14);
  CHECK(hamiltonian(s, p) == doctest::Approx(energy(s, z)).epsilon(1e-14));
}

TEST_CASE("Mañé Lagrangian is the shifted kinetic energy") {
  const MetricField g = MetricField::conformal(test::sine(0.1, 1, 0));
  const ClosedOneForm w{vec2(0.3, 0.4), test::sine(0.05, 0, 1)};
  const LagrangianSpec m = mane_lagrangian(g, w);
  const Vec x = vec2(0.15, 0.55), v = vec2(0.6, -0.1);
  const Vec d = v - sharp(g, x, w.value(x));
  CHECK(lagrangian(m, x, v) == doctest::Approx(0.5 * d.dot(g.g(x) * d)).epsilon(1e-13));
}

TEST_CASE("flow conserves energy") {
  const LagrangianSpec s = test::curved();
  const Trajectory tr = integrate_flow(s, {vec2(0.1, 0.2), vec2(0.5, 0.3)}, 10.0, {1e-3});
  const double e0 = energy(s, tr.initial());
  double drift = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) drift = std::max(drift, std::abs(energy(s, tr.state(i)) - e0));
  CHECK(drift < 1e-8);
}

TEST_CASE("flow is reversible") {
  const LagrangianSpec s = test::curved();
  const Trajectory fwd = integrate_flow(s, {vec2(0.1, 0.2), vec2(0.5, 0.3)}, 3.0, {1e-3});
  const PhaseState end = fwd.terminal();
  const Trajectory back = integrate_flow(s.reversed(), {end.x, -end.v}, 3.0, {1e-3});
  CHECK(test::max_abs(back.terminal().x - vec2(0.1, 0.2)) < 1e-9);
  CHECK(test::max_abs(back.terminal().v + vec2(0.5, 0.3)) < 1e-9);
}

TEST_CASE("backward flow ends at the initial state") {
  const LagrangianSpec s = test::mechanical();
  const Trajectory b = integrate_flow(s, {vec2(0.3, 0.3), vec2(0.2, 0.1)}, -2.0, {1e-3});
  CHECK(b.backward);
  CHECK(b.t_begin() == doctest::Approx(-2.0));
  CHECK(b.t_end() == 0.0);
  CHECK(test::max_abs(b.initial().x - vec2(0.3, 0.3)) == 0.0);
  const Trajectory f = integrate_flow(s, b.state(0), 2.0, {1e-3});
  CHECK(test::max_abs(f.terminal().x - vec2(0.3, 0.3)) < 1e-9);
}

TEST_CASE("straight-line action on the flat torus") {
  const LagrangianSpec s{MetricField::flat(2), ScalarField::zero(2), ClosedOneForm::zero(2), 0.0};
  const Trajectory tr = integrate_flow(s, {vec2(0, 0), vec2(0.3, 0.4)}, 1.0, {1e-3});
  CHECK(action(s, tr) == doctest::Approx(0.125).epsilon(1e-12));
  // with ω = (0.3, 0.4) the line integral subtracts ω·v t = 0.25
  const LagrangianSpec w = test::flat_harmonic();
  CHECK(action(w, integrate_flow(w, {vec2(0, 0), vec2(0.3, 0.4)}, 1.0, {1e-3})) ==
        doctest::Approx(-0.125).epsilon(1e-12));
}

TEST_CASE("geodesics on a flat torus are straight") {
  const LagrangianSpec s = test::flat_harmonic();
  const Trajectory tr = integrate_flow(s, {vec2(0.9, 0.1), vec2(1.5, -0.5)}, 2.0, {1e-2});
  CHECK(test::max_abs(tr.terminal().x - vec2(3.9, -0.9)) < 1e-12);  // lifted coordinates are not wrapped
}

TEST_CASE("Hamiltonian flow matches the Euler-Lagrange flow") {
  const LagrangianSpec s = test::curved();
  const PhaseState z{vec2(0.4, 0.6), vec2(-0.3, 0.2)};
  const auto H = integrate_hamiltonian(s, legendre(s, z), 2.0, 1e-3);
  const Trajectory tr = integrate_flow(s, z, 2.0, {1e-3});
  CHECK(test::max_abs(H.back().x - tr.terminal().x) < 1e-9);
  CHECK(test::max_abs(inverse_legendre(s, H.back()).v - tr.terminal().v) < 1e-9);
}

TEST_CASE("Hermite interpolant reproduces samples") {
  const LagrangianSpec s = test::curved();
  const Trajectory tr = integrate_flow(s, {vec2(0.1, 0.1), vec2(0.3, 0.2)}, 1.0, {1e-2});
  CHECK(test::max_abs(tr.eval(tr.t[37]).x - tr.x[37]) < 1e-14);
  // midpoint interpolation is fourth order in dt
  const Trajectory fine = integrate_flow(s, {vec2(0.1, 0.1), vec2(0.3, 0.2)}, 1.0, {1e-3});
  CHECK(test::max_abs(tr.eval(0.375).x - fine.eval(0.375).x) < 1e-8);
}

TEST_CASE("velocity blow-up raises a numerical error") {
  const LagrangianSpec s = test::mechanical();
  FlowOptions o;
  o.v_max = 1.0;
  CHECK_THROWS_AS(integrate_flow(s, {vec2(0, 0), vec2(2.0, 0)}, 1.0, o), NumericalError);
}

TEST_CASE("Hamiltonian values") {
  const LagrangianSpec free{MetricField::flat(2), ScalarField::zero(2), ClosedOneForm::zero(2), 0.0};
  CHECK(hamiltonian(free, {vec2(0.3, 0.3), vec2(1, 0)}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(hamiltonian(test::flat_harmonic(), {vec2(0.3, 0.3), vec2(0, 0)}) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("Hamiltonian is the fiberwise supremum") {
  const LagrangianSpec s = test::curved();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 1.0), V(-0.5, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec x = vec2(U(rng), U(rng)), v = vec2(V(rng), V(rng));
    const CotangentState p = legendre(s, {x, v});
    // 101 × 101 fiber grid, offset so v is not a node
    double sup = -1e300;
    for (int i = 0; i <= 100; ++i)
      for (int j = 0; j <= 100; ++j) {
        const Vec w = v + vec2(-1.003 + 0.02 * i, -0.997 + 0.02 * j);
        sup = std::max(sup, p.p.dot(w) - lagrangian(s, x, w));
      }
    CHECK(std::abs(sup - hamiltonian(s, p)) <= 1e-3);
    CHECK(sup <= hamiltonian(s, p) + 1e-14);
    CHECK(hamiltonian(s, p) == doctest::Approx(0.5 * v.dot(s.metric.g(x) * v) + s.f(x) - s.c).epsilon(1e-13));
  }
}

TEST_CASE("pendulum energy over a long run") {
  const LagrangianSpec s = test::mechanical();
  const Trajectory tr = integrate_flow(s, {vec2(0.1, 0.0), vec2(0.2, 0.0)}, 50.0, {1e-3});
  const double e0 = energy(s, tr.initial());
  double drift = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) drift = std::max(drift, std::abs(energy(s, tr.state(i)) - e0));
  CHECK(drift <= 1e-10);
}

TEST_CASE("free flow over ten time units") {
  const LagrangianSpec s{MetricField::flat(2), ScalarField::zero(2), ClosedOneForm::zero(2), 0.0};
  const Trajectory tr = integrate_flow(s, {vec2(0.2, 0.7), vec2(0.31, -0.17)}, 10.0, {1e-3});
  double err = 0;
  for (std::size_t i = 0; i < tr.size(); i += 10)
    err = std::max(err, test::max_abs(tr.x[i] - (vec2(0.2, 0.7) + tr.t[i] * vec2(0.31, -0.17))));
  CHECK(err <= 1e-12);
}

TEST_CASE("forward then backward returns to the start") {
  const LagrangianSpec s = test::curved();
  const PhaseState z{vec2(0.6, 0.3), vec2(0.2, -0.4)};
  const Trajectory fwd = integrate_flow(s, z, 5.0, {1e-3});
  const Trajectory back = integrate_flow(s, fwd.terminal(), -5.0, {1e-3});
  CHECK(test::max_abs(back.state(0).x - z.x) <= 1e-8);
  CHECK(test::max_abs(back.state(0).v - z.v) <= 1e-8);
}

TEST_CASE("closed forms do not enter the flow") {
  const LagrangianSpec s = test::curved();
  LagrangianSpec bare = s;
  bare.omega = ClosedOneForm::zero(2);
  const PhaseState z{vec2(0.1, 0.8), vec2(0.3, 0.3)};
  const Trajectory a = integrate_flow(s, z, 3.0, {1e-3}), b = integrate_flow(bare, z, 3.0, {1e-3});
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, test::max_abs(a.x[i] - b.x[i]) + test::max_abs(a.v[i] - b.v[i]));
  CHECK(d <= 1e-12);
}

TEST_CASE("Legendre map intertwines the flows") {
  const LagrangianSpec s = test::curved();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0), V(-0.5, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const PhaseState z{vec2(U(rng), U(rng)), vec2(V(rng), V(rng))};
    const auto H = integrate_hamiltonian(s, legendre(s, z), 1.0, 1e-3);
    const CotangentState L = legendre(s, integrate_flow(s, z, 1.0, {1e-3}).terminal());
    CHECK(test::max_abs(H.back().x - L.x) <= 1e-6);
    CHECK(test::max_abs(H.back().p - L.p) <= 1e-6);
  }
}

TEST_CASE("action identities") {
  const LagrangianSpec free{MetricField::flat(2), ScalarField::zero(2), ClosedOneForm::zero(2), 0.0};
  const Trajectory seg = integrate_flow(free, {vec2(0.1, 0.1), vec2(0.5, 0.0)}, 1.0, {1e-3});
  CHECK(action(free, seg) == doctest::Approx(0.125).epsilon(1e-12));
  LagrangianSpec shifted = free;
  shifted.c = 0.7;
  CHECK(action(shifted, seg) - action(free, seg) == doctest::Approx(0.7).epsilon(1e-12));
  // one full wrap with an exact form: the ω term vanishes
  LagrangianSpec exact = free;
  exact.omega = ClosedOneForm{vec2(0, 0), test::sine(0.1, 1, 0)};
  const Trajectory loop = integrate_flow(free, {vec2(0.1, 0.3), vec2(1.0, 0.0)}, 1.0, {1e-3});
  CHECK(std::abs(action(exact, loop) - action(free, loop)) <= 1e-12);
  // additivity over [0, 1] ∪ [1, 2]
  const LagrangianSpec s = test::curved();
  const PhaseState z{vec2(0.3, 0.2), vec2(0.4, 0.1)};
  const Trajectory whole = integrate_flow(s, z, 2.0, {1e-3});
  const Trajectory first = integrate_flow(s, z, 1.0, {1e-3});
  const Trajectory second = integrate_flow(s, first.terminal(), 1.0, {1e-3});
  CHECK(std::abs(action(s, whole) - action(s, first) - action(s, second)) <= 1e-10);
}

TEST_CASE("trajectory CSV") {
  const LagrangianSpec s = test::mechanical();
  const Trajectory tr = integrate_flow(s, {vec2(0, 0), vec2(0.1, 0)}, 0.01, {1e-3});
  std::ostringstream os;
  dump_trajectory_csv(tr, os);
  const std::string out = os.str();
  CHECK(out.substr(0, out.find('\n')) == "t,x1,x2,v1,v2");
  CHECK(std::count(out.begin(), out.end(), '\n') == static_cast<long>(tr.size() + 1));
}
