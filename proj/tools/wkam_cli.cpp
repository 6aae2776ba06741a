// wkam: command-line driver for the weak KAM toolkit.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
// 3 numerical failure or non-convergence.
#include "wkam/acceptance.hpp"
#include "wkam/barrier.hpp"
#include "wkam/config.hpp"
#include "wkam/geometry.hpp"
#include "wkam/hodge.hpp"
#include "wkam/io.hpp"
#include "wkam/riccati.hpp"
#include "wkam/variation.hpp"
#include "wkam/version.hpp"
#include "wkam/weakkam.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>

namespace fs = std::filesystem;
using namespace wkam;

namespace {

struct Run {
  std::string subcommand;
  std::optional<ExperimentConfig> cfg;
  fs::path out_dir;
  Json outputs = Json::object();
  std::vector<Check> checks;
  std::vector<std::string> artifacts;

  void check(const std::string& name, double value, const std::string& rel, double bound) {
    CriterionResult tmp;
    tmp.check(name, value, rel, bound);
    checks.push_back(tmp.checks.front());
  }

  // Creates the output directory on first use, so failed validation leaves nothing behind.
  std::ofstream open(const std::string& name) {
    fs::create_directories(out_dir);
    artifacts.push_back(name);
    std::ofstream os(out_dir / name);
    if (!os) throw std::runtime_error("cannot write " + (out_dir / name).string());
    return os;
  }

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

Json checks_json(const std::vector<Check>& checks) {
  Json a = Json::array();
  for (const Check& c : checks)
    a.push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"tolerance", c.bound},
                 {"pass", c.pass}});
  return a;
}

Json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json mat_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

const ExperimentConfig& need_cfg(const Run& run) {
  if (!run.cfg) throw ConfigError(run.subcommand + " requires --config");
  return *run.cfg;
}

Vec default_velocity(int dim) {
  Vec v = Vec::Zero(dim);
  v[0] = 0.3;
  if (dim > 1) v[1] = 0.4;
  return v;
}

ActionKernel kernel_of(const ExperimentConfig& cfg, const LagrangianSpec& spec, Run& run) {
  ActionKernel K = build_kernel(spec, Grid(cfg.dim, cfg.N), cfg.dt, cfg.stencil_r);
  if (!K.warnings.empty()) run.outputs["kernel_warnings"] = K.warnings;
  return K;
}

CriticalValueResult solve(const ExperimentConfig& cfg, const ActionKernel& K, Run& run) {
  CriticalValueResult res = estimate_critical_value(K, cfg.tol, cfg.max_iters);
  if (!res.estimate.converged)
    throw NonConvergenceError("critical value iteration stopped after " + std::to_string(res.estimate.iterations) +
                              " iterations with residual " + std::to_string(res.estimate.residual));
  run.outputs["c_estimate"] = res.estimate.c;
  run.outputs["residual"] = res.estimate.residual;
  run.outputs["iterations"] = res.estimate.iterations;
  run.outputs["oscillation"] = res.u.oscillation();
  run.check("fixed-point residual", res.estimate.residual, "<=", cfg.tol);
  return res;
}

BarrierOptions barrier_options(const ExperimentConfig& cfg) {
  BarrierOptions o;
  o.horizons = cfg.horizons;
  o.tol = param_or<double>(cfg, "barrier_tol", o.tol);
  return o;
}

double default_tol_A(const ExperimentConfig& cfg) {
  const double dx = 1.0 / cfg.N;
  return 5e-3 + dx * dx / cfg.dt;
}

// ---------------------------------------------------------------------------

void cmd_geometry(Run& run) {
  const ExperimentConfig& cfg = need_cfg(run);
  const LagrangianSpec spec = build_spec(cfg);
  const int n = cfg.dim;
  std::vector<Vec> points;
  if (cfg.params.contains("points")) {
    for (const auto& p : param_or<std::vector<std::vector<double>>>(cfg, "points", {})) {
      if (static_cast<int>(p.size()) != n) throw ConfigError("params.points entries need one value per dimension");
      points.push_back(Eigen::Map<const Vec>(p.data(), n));
    }
  } else {
    std::mt19937_64 rng(default_seed());
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 8; ++i) {
      Vec x(n);
      for (int a = 0; a < n; ++a) x[a] = U(rng);
      points.push_back(x);
    }
  }
  const double fd_h = param_or<double>(cfg, "fd_step", 1e-4);
  double fd_err = 0.0, ric_asym = 0.0;
  Json samples = Json::array();
  for (const Vec& x : points) {
    const Christoffel G = christoffel_at(spec.metric, x), Gfd = christoffel_fd(spec.metric, x, fd_h);
    for (int k = 0; k < n; ++k) fd_err = std::max(fd_err, (G[k] - Gfd[k]).cwiseAbs().maxCoeff());
    const Mat ric = ricci_tensor(spec.metric, x);
    ric_asym = std::max(ric_asym, (ric - ric.transpose()).cwiseAbs().maxCoeff());
    const Mat g = spec.metric.g(x);
    Json chr = Json::array();
    for (int k = 0; k < n; ++k) chr.push_back(mat_json(G[k]));
    samples.push_back({{"x", vec_json(x)},
                       {"g", mat_json(g)},
                       {"christoffel", chr},
                       {"ricci", mat_json(ric)},
                       {"scalar_curvature", (spec.metric.inverse(x) * ric).trace()},
                       {"laplacian_f", laplacian(spec.metric, spec.f, x)},
                       {"div_omega_sharp", divergence_of_form(spec.metric, spec.omega, x)}});
  }
  run.open("geometry.json") << Json{{"points", samples}}.dump(2) << '\n';
  run.outputs["christoffel_fd_error"] = fd_err;
  run.check("Christoffel analytic vs finite difference", fd_err, "<=", param_or<double>(cfg, "fd_tol", 1e-6));
  run.check("Ricci asymmetry", ric_asym, "<=", 1e-10);
}

void cmd_flow(Run& run) {
  const ExperimentConfig& cfg = need_cfg(run);
  const LagrangianSpec spec = build_spec(cfg);
  const Vec x0 = param_vec(cfg, "x0", Vec::Zero(cfg.dim));
  const Vec v0 = param_vec(cfg, "v0", default_velocity(cfg.dim));
  const double T = param_or<double>(cfg, "T", 10.0);
  FlowOptions fo;
  fo.dt = param_or<double>(cfg, "flow_dt", 1e-3);
  const Trajectory traj = integrate_flow(spec, {x0, v0}, T, fo);
  double e0 = energy(spec, traj.initial()), drift = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) drift = std::max(drift, std::abs(energy(spec, traj.state(i)) - e0));
  {
    auto os = run.open("trajectory.csv");
    dump_trajectory_csv(traj, os);
  }
  run.outputs["energy"] = e0;
  run.outputs["energy_drift"] = drift;
  run.outputs["action"] = action(spec, traj);
  run.outputs["endpoint"] = vec_json(traj.terminal().x);
  run.check("energy drift", drift, "<=", param_or<double>(cfg, "energy_tol", 1e-8));
}

void cmd_jacobi(Run& run) {
  const ExperimentConfig& cfg = need_cfg(run);
  const LagrangianSpec spec = build_spec(cfg);
  const Vec x0 = param_vec(cfg, "x0", Vec::Zero(cfg.dim));
  const Vec v0 = param_vec(cfg, "v0", default_velocity(cfg.dim));
  const double T = param_or<double>(cfg, "T", 5.0);
  FlowOptions fo;
  fo.dt = param_or<double>(cfg, "flow_dt", 1e-3);
  const Trajectory traj = integrate_flow(spec, {x0, v0}, T, fo);
  const JacobiFrame frame = propagate_jacobi_frame(spec, traj);
  const ConjugateReport conj = conjugate_points(frame);
  const RiccatiTrace trace = theta_along(frame);
  const ReverseConjugacyReport rev = reverse_conjugacy_check(spec, traj, param_or<double>(cfg, "conj_tol", 1e-4));
  {
    auto os = run.open("frame.csv");
    dump_frame_csv(frame, os);
  }
  {
    auto os = run.open("trace.csv");
    dump_trace_csv(trace, os);
  }
  run.outputs["conjugate_points"] = conj.points;
  run.outputs["undetermined"] = conj.undetermined;
  run.outputs["riccati_k"] = trace.k;
  run.outputs["trace_max_residual"] = trace.max_residual;
  if (!frame.diagnostic.empty()) run.outputs["frame_diagnostic"] = frame.diagnostic;
  run.check("reversed-curve conjugate mismatches", rev.ok ? 0.0 : 1.0, "==", 0.0);
}

void cmd_riccati(Run& run, std::optional<int> n_flag, std::optional<double> k_flag, std::optional<double> slack_flag) {
  const ExperimentConfig cfg = run.cfg.value_or(ExperimentConfig{});
  const int n = n_flag.value_or(param_or<int>(cfg, "n", cfg.dim));
  const double k = k_flag.value_or(param_or<double>(cfg, "k", -1.0));
  const double slack = slack_flag.value_or(param_or<double>(cfg, "slack", 0.0));
  if (n < 1) throw ConfigError("n must be at least 1");
  if (slack < 0.0) throw ConfigError("slack must be nonnegative");
  ComparisonOptions o;
  o.horizon = param_or<double>(cfg, "horizon", o.horizon);
  o.slack = [slack](double) { return slack; };
  const ComparisonReport rep = verify_comparison(n, k, o);
  auto os = run.open("comparison.csv");
  CsvWriter w(os);
  w.header({"s", "alpha", "bound", "margin"});
  for (std::size_t i = 0; i < rep.s.size(); ++i) w.row({rep.s[i], rep.alpha[i], rep.bound[i], rep.bound[i] - rep.alpha[i]});
  run.outputs["n"] = n;
  run.outputs["k"] = k;
  run.outputs["slack"] = slack;
  run.outputs["max_excess"] = rep.max_excess;
  if (!rep.diagnostic.empty()) run.outputs["diagnostic"] = rep.diagnostic;
  run.check("max alpha - bound", rep.max_excess, "<=", o.tol);
}

void cmd_weakkam(Run& run) {
  const ExperimentConfig& cfg = need_cfg(run);
  const LagrangianSpec spec = build_spec(cfg);
  const ActionKernel K = kernel_of(cfg, spec, run);
  const CriticalValueResult res = solve(cfg, K, run);
  const DominationReport dom = verify_domination(K, res.u, res.estimate.c, param_or<double>(cfg, "domination_tol", 1e-8),
                                                 param_or<int>(cfg, "curves", 64), param_or<int>(cfg, "steps", 20),
                                                 default_seed());
  {
    auto os = run.open("value.csv");
    dump_value_csv(res.u, os);
  }
  run.outputs["domination_min_slack"] = dom.min_slack;
  run.check("domination violations", static_cast<double>(dom.violations.size()), "==", 0.0);
}

void cmd_barrier(Run& run) {
  const ExperimentConfig& cfg = need_cfg(run);
  const LagrangianSpec spec = build_spec(cfg);
  const ActionKernel K = kernel_of(cfg, spec, run);
  const CriticalValueResult res = solve(cfg, K, run);
  const BarrierOptions bo = barrier_options(cfg);
  const std::size_t base = K.grid.nearest(param_vec(cfg, "base", Vec::Zero(cfg.dim)));
  const BarrierSlice sl = peierls_barrier(K, res.estimate.c, base, bo);
  {
    auto os = run.open("barrier.csv");
    dump_barrier_csv(sl, os);
  }
  run.outputs["base"] = base;
  run.outputs["stable"] = sl.stable;
  run.outputs["max_change"] = sl.max_change;
  if (!sl.stable) run.outputs["suggested_horizon"] = sl.suggested_horizon;
  run.check("h(x,x)", sl.h[base], ">=", -2.0 * bo.tol);
}

AubryReport aubry_of(const ExperimentConfig& cfg, const ActionKernel& K, double c, Run& run) {
  const int stride = param_or<int>(cfg, "stride", 8);
  if (stride < 1) throw ConfigError("params.stride must be positive");
  const double tol_A = param_or<double>(cfg, "tol_A", default_tol_A(cfg));
  try {
    return aubry_set(K, c, lattice_sample(K.grid, stride), tol_A, barrier_options(cfg));
  } catch (const DomainError& e) {
    run.outputs["aubry_diagnostic"] = e.what();
    AubryReport empty;
    empty.tol_A = tol_A;
    return empty;
  }
}

void cmd_aubry(Run& run) {
  const ExperimentConfig& cfg = need_cfg(run);
  const LagrangianSpec spec = build_spec(cfg);
  const ActionKernel K = kernel_of(cfg, spec, run);
  const CriticalValueResult res = solve(cfg, K, run);
  const AubryReport A = aubry_of(cfg, K, res.estimate.c, run);
  run.open("aubry.json") << Json{{"tol_A", A.tol_A},
                                 {"sampled", A.sampled},
                                 {"diagonal", A.diagonal},
                                 {"nodes", A.nodes},
                                 {"unstable", A.unstable}}
                                .dump(2)
                         << '\n';
  run.outputs["aubry_count"] = A.nodes.size();
  run.outputs["sampled"] = A.sampled.size();
  run.outputs["tol_A"] = A.tol_A;
  run.check("Aubry nodes", static_cast<double>(A.nodes.size()), ">=", 1.0);
}

void cmd_quotient(Run& run) {
  const ExperimentConfig& cfg = need_cfg(run);
  const LagrangianSpec spec = build_spec(cfg);
  const ActionKernel K = kernel_of(cfg, spec, run);
  const CriticalValueResult res = solve(cfg, K, run);
  const AubryReport A = aubry_of(cfg, K, res.estimate.c, run);
  run.check("Aubry nodes", static_cast<double>(A.nodes.size()), ">=", 1.0);
  if (A.nodes.empty()) return;
  // Pairwise cost is quadratic; keep at most 256 base points, evenly spaced.
  std::vector<std::size_t> nodes = A.nodes;
  if (nodes.size() > 256) {
    std::vector<std::size_t> sub;
    for (std::size_t i = 0; i < 256; ++i) sub.push_back(nodes[i * nodes.size() / 256]);
    nodes = sub;
  }
  const double tol_Q = param_or<double>(cfg, "tol_Q", 0.05);
  const BarrierOptions bo = barrier_options(cfg);
  const MatherQuotientReport Q = mather_quotient(K, res.estimate.c, nodes, tol_Q, bo);
  const Json report = {{"aubry_count", A.nodes.size()},
                       {"component_count", Q.at_tol.count},
                       {"tol_A", A.tol_A},
                       {"tol_Q", tol_Q},
                       {"representatives", Q.at_tol.representatives},
                       {"component_count_double_tol", Q.at_double_tol.count},
                       {"min_delta", Q.min_delta},
                       {"triangle_excess", Q.triangle_excess}};
  run.open("quotient.json") << report.dump(2) << '\n';
  run.outputs["quotient"] = report;
  run.check("min delta", Q.min_delta, ">=", -2.0 * bo.tol);
}

void cmd_hodge(Run& run) {
  const ExperimentConfig& cfg = need_cfg(run);
  const LagrangianSpec spec = build_spec(cfg);
  const Grid g(cfg.dim, cfg.N);
  HodgeOptions ho;
  ho.tol = param_or<double>(cfg, "cg_tol", ho.tol);
  ho.max_iters = cfg.max_iters;
  const HodgeDecomposition d = harmonic_representative(spec.metric, spec.omega, g, ho);
  {
    auto os = run.open("decomposition.csv");
    dump_decomposition_csv(d, os);
  }
  run.outputs["harmonic_class"] = vec_json(d.harmonic_class);
  run.outputs["harmonic_mean"] = vec_json(d.harmonic_mean);
  run.outputs["cg_iterations"] = d.iterations;
  run.outputs["solver_residual"] = d.solver_residual;
  run.check("discrete Stokes sum", std::abs(d.stokes_sum), "<=", 1e-10);
  run.check("sup |div harmonic|", d.harmonic_div_sup, "<=", d.div_tolerance);

  const double tol_h = param_or<double>(cfg, "tol_h", 1e-8);
  const ClosedOneForm constant_part = ClosedOneForm::harmonic(spec.omega.constants);
  if (is_harmonic(spec.metric, constant_part, g, tol_h).harmonic) {
    const BochnerReport b = bochner_check(spec.metric, constant_part, g, tol_h);
    run.outputs["bochner"] = {{"status", to_string(b.status)}, {"spread", b.spread}, {"min_ricci", b.min_ricci}};
    if (b.status != BochnerStatus::not_applicable) run.check("Bochner spread", b.spread, "<=", 10.0 * tol_h);
  } else {
    run.outputs["bochner"] = {{"status", "not_applicable"}, {"diagnostic", "constant part is not harmonic"}};
  }
}

void cmd_verify(Run& run, const std::string& theorem) {
  const std::vector<int> ids = criteria_for_theorem(theorem);
  AcceptanceOptions opts;
  opts.seed = default_seed();
  Json results = Json::array();
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, opts);
    std::cerr << summary_line(r) << '\n';
    results.push_back(to_json(r));
    for (const Check& c : r.checks) run.checks.push_back({"criterion " + std::to_string(id) + ": " + c.name, c.value,
                                                          c.relation, c.bound, c.pass});
    if (!r.error.empty()) run.check("criterion " + std::to_string(id) + " completed", 0.0, "==", 1.0);
  }
  run.outputs["theorem"] = theorem;
  run.outputs["criteria"] = results;
  run.outputs["seed"] = opts.seed;
  run.open("verify.json") << results.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak KAM toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, output_dir, theorem;
  std::optional<int> n_flag;
  std::optional<double> k_flag, slack_flag;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"geometry-check", "Christoffel and curvature report at sample points"},
      {"flow", "integrate the Euler-Lagrange flow"},
      {"jacobi", "Jacobi frame, conjugate points and Riccati trace"},
      {"riccati-compare", "scalar Riccati comparison against the closed-form bound"},
      {"weakkam-solve", "critical value and weak KAM solution"},
      {"barrier", "Peierls barrier slice from one base point"},
      {"aubry", "sampled Aubry set"},
      {"quotient", "Mather quotient components"},
      {"hodge", "harmonic representative and Bochner check"},
      {"verify", "acceptance criteria for one theorem"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "experiment config (JSON)");
    sub->add_option("-o,--output-dir", output_dir, "artifact directory (overrides the config)");
    subs[name] = sub;
  }
  subs["riccati-compare"]->add_option("--n", n_flag, "dimension");
  subs["riccati-compare"]->add_option("--k", k_flag, "curvature lower bound");
  subs["riccati-compare"]->add_option("--slack", slack_flag, "constant slack");
  subs["verify"]->add_option("--theorem", theorem, "one of 1.5 1.6 1.7 1.8 1.9 riccati index")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Run run;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) run.subcommand = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (!config_path.empty()) run.cfg = load_config(config_path);
    run.out_dir = !output_dir.empty() ? fs::path(output_dir) : fs::path(run.cfg ? run.cfg->output_dir : "out");
    if (run.subcommand == "verify") criteria_for_theorem(theorem);  // validate before any work

    if (run.subcommand == "geometry-check") cmd_geometry(run);
    else if (run.subcommand == "flow") cmd_flow(run);
    else if (run.subcommand == "jacobi") cmd_jacobi(run);
    else if (run.subcommand == "riccati-compare") cmd_riccati(run, n_flag, k_flag, slack_flag);
    else if (run.subcommand == "weakkam-solve") cmd_weakkam(run);
    else if (run.subcommand == "barrier") cmd_barrier(run);
    else if (run.subcommand == "aubry") cmd_aubry(run);
    else if (run.subcommand == "quotient") cmd_quotient(run);
    else if (run.subcommand == "hodge") cmd_hodge(run);
    else if (run.subcommand == "verify") cmd_verify(run, theorem);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const DegenerateMetricError& e) {
    std::cerr << "degenerate metric: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Json summary = {{"schema", 1},
                  {"toolkit_version", kVersion},
                  {"subcommand", run.subcommand},
                  {"experiment", run.cfg ? run.cfg->experiment : run.subcommand},
                  {"inputs", run.cfg ? to_json(*run.cfg) : Json(nullptr)},
                  {"outputs", run.outputs},
                  {"checks", checks_json(run.checks)},
                  {"pass", run.pass()},
                  {"artifacts", run.artifacts},
                  {"wall_clock_seconds", seconds}};
  std::cout << summary.dump(2) << '\n';
  return run.pass() ? 0 : 1;
}
