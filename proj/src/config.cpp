#include "wkam/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace wkam {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

FieldConfig parse_field(const Json& j, const std::string& where) {
  check_keys(j, {"name", "params"}, where);
  FieldConfig fc;
  fc.name = get_or<std::string>(j, "name", "zero", where);
  fc.params = j.contains("params") ? j.at("params") : Json::object();
  if (!fc.params.is_object()) throw ConfigError(where + ".params must be an object");
  return fc;
}

MetricConfig parse_metric(const Json& j, const std::string& where) {
  check_keys(j, {"name", "params"}, where);
  MetricConfig mc;
  mc.name = get_or<std::string>(j, "name", "flat", where);
  mc.params = j.contains("params") ? j.at("params") : Json::object();
  if (!mc.params.is_object()) throw ConfigError(where + ".params must be an object");
  return mc;
}

Json field_json(const FieldConfig& fc) { return {{"name", fc.name}, {"params", fc.params}}; }

std::vector<int> wavevector(const Json& j, int dim, const std::string& where) {
  if (!j.is_array() || !std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_number_integer(); }))
    throw ConfigError(where + ": k must be an integer array");
  const std::vector<int> k = j.get<std::vector<int>>();
  if (static_cast<int>(k.size()) != dim) throw ConfigError(where + ": k must have one entry per dimension");
  return k;
}

}  // namespace

ScalarField build_field(int dim, const FieldConfig& fc) {
  const std::string where = "field '" + fc.name + "'";
  const Json& p = fc.params;
  if (fc.name == "zero") return ScalarField::zero(dim);
  if (fc.name == "constant") return ScalarField::constant(dim, get_or<double>(p, "value", 0.0, where));
  if (fc.name == "cosine" || fc.name == "sine") {
    check_keys(p, {"amp", "k"}, where);
    if (!p.contains("k")) throw ConfigError(where + ": missing k");
    return ScalarField::fourier(
        dim, {{get_or<double>(p, "amp", 0.0, where), fc.name == "cosine", wavevector(p.at("k"), dim, where)}});
  }
  if (fc.name == "fourier") {
    check_keys(p, {"terms", "offset"}, where);
    std::vector<FourierTerm> terms;
    if (p.contains("terms")) {
      if (!p.at("terms").is_array()) throw ConfigError(where + ": terms must be an array");
      for (const auto& t : p.at("terms")) {
        check_keys(t, {"amp", "kind", "k"}, where + " term");
        const auto kind = get_or<std::string>(t, "kind", "cos", where);
        if (kind != "cos" && kind != "sin") throw ConfigError(where + ": kind must be cos or sin");
        if (!t.contains("k")) throw ConfigError(where + ": term missing k");
        terms.push_back({get_or<double>(t, "amp", 0.0, where), kind == "cos", wavevector(t.at("k"), dim, where)});
      }
    }
    return ScalarField::fourier(dim, std::move(terms), get_or<double>(p, "offset", 0.0, where));
  }
  throw ConfigError("unknown scalar field '" + fc.name + "'");
}

MetricField build_metric(int dim, const MetricConfig& mc) {
  const std::string where = "metric '" + mc.name + "'";
  const Json& p = mc.params;
  if (mc.name == "flat") return MetricField::flat(dim);
  if (mc.name == "constant") {
    check_keys(p, {"g"}, where);
    std::vector<std::vector<double>> rows;
    try {
      rows = p.at("g").get<std::vector<std::vector<double>>>();
    } catch (const Json::exception&) {
      throw ConfigError(where + ": g must be a matrix");
    }
    if (static_cast<int>(rows.size()) != dim) throw ConfigError(where + ": g has the wrong size");
    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i) {
      if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != dim)
        throw ConfigError(where + ": g has the wrong size");
      for (int j = 0; j < dim; ++j) g(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 0.0) throw ConfigError(where + ": g must be symmetric");
    if (Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff() <= 0.0)
      throw ConfigError(where + ": g must be positive definite");
    return MetricField::constant(g);
  }
  if (mc.name == "conformal") {
    check_keys(p, {"lambda"}, where);
    if (!p.contains("lambda")) throw ConfigError(where + ": missing lambda");
    return MetricField::conformal(build_field(dim, parse_field(p.at("lambda"), where + ".lambda")));
  }
  if (mc.name == "diagonal") {
    check_keys(p, {"lambdas"}, where);
    if (!p.contains("lambdas") || !p.at("lambdas").is_array() || static_cast<int>(p.at("lambdas").size()) != dim)
      throw ConfigError(where + ": lambdas must list one field per dimension");
    std::vector<ScalarField> ls;
    for (const auto& l : p.at("lambdas")) ls.push_back(build_field(dim, parse_field(l, where + ".lambdas")));
    return MetricField::diagonal(std::move(ls));
  }
  throw ConfigError("unknown metric '" + mc.name + "'");
}

ExperimentConfig parse_config(const Json& j) {
  check_keys(j, {"schema", "experiment", "output_dir", "manifold", "lagrangian", "grid", "solver", "params"}, "config");
  if (j.contains("schema") && j.at("schema") != 1) throw ConfigError("unsupported schema version");
  ExperimentConfig cfg;
  cfg.experiment = get_or<std::string>(j, "experiment", cfg.experiment, "config");
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir, "config");
  if (j.contains("manifold")) {
    const Json& m = j.at("manifold");
    check_keys(m, {"dim", "metric"}, "manifold");
    cfg.dim = get_or<int>(m, "dim", cfg.dim, "manifold");
    if (m.contains("metric")) cfg.metric = parse_metric(m.at("metric"), "manifold.metric");
  }
  if (j.contains("lagrangian")) {
    const Json& l = j.at("lagrangian");
    check_keys(l, {"f", "omega", "c"}, "lagrangian");
    if (l.contains("f")) cfg.f = parse_field(l.at("f"), "lagrangian.f");
    cfg.c = get_or<double>(l, "c", cfg.c, "lagrangian");
    if (l.contains("omega")) {
      const Json& w = l.at("omega");
      check_keys(w, {"constants", "phi"}, "lagrangian.omega");
      cfg.omega_constants = get_or<std::vector<double>>(w, "constants", {}, "lagrangian.omega");
      if (w.contains("phi")) cfg.phi = parse_field(w.at("phi"), "lagrangian.omega.phi");
    }
  }
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    check_keys(g, {"N", "dt", "stencil_r"}, "grid");
    cfg.N = get_or<int>(g, "N", cfg.N, "grid");
    cfg.dt = get_or<double>(g, "dt", cfg.dt, "grid");
    cfg.stencil_r = get_or<int>(g, "stencil_r", cfg.stencil_r, "grid");
  }
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    check_keys(s, {"tol", "max_iters", "horizons"}, "solver");
    cfg.tol = get_or<double>(s, "tol", cfg.tol, "solver");
    cfg.max_iters = get_or<int>(s, "max_iters", cfg.max_iters, "solver");
    cfg.horizons = get_or<std::vector<double>>(s, "horizons", cfg.horizons, "solver");
  }
  if (j.contains("params")) {
    cfg.params = j.at("params");
    if (!cfg.params.is_object()) throw ConfigError("params must be an object");
  }

  if (cfg.dim < 2) throw ConfigError("manifold.dim must be at least 2");
  if (cfg.N < 16) throw ConfigError("grid.N must be at least 16");
  if (!(cfg.dt > 0.0)) throw ConfigError("grid.dt must be positive");
  if (cfg.stencil_r < 1) throw ConfigError("grid.stencil_r must be at least 1");
  if (!(cfg.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (cfg.max_iters < 1) throw ConfigError("solver.max_iters must be positive");
  if (cfg.horizons.empty()) throw ConfigError("solver.horizons must not be empty");
  for (double h : cfg.horizons)
    if (!(h > 0.0)) throw ConfigError("solver.horizons must be positive");
  if (!cfg.omega_constants.empty() && static_cast<int>(cfg.omega_constants.size()) != cfg.dim)
    throw ConfigError("lagrangian.omega.constants must have one entry per dimension");
  // Resolve names now so a bad config fails before any work.
  build_spec(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  return parse_config(j);
}

Json to_json(const ExperimentConfig& cfg) {
  Json omega = {{"constants", cfg.omega_constants}, {"phi", field_json(cfg.phi)}};
  return {{"schema", 1},
          {"experiment", cfg.experiment},
          {"output_dir", cfg.output_dir},
          {"manifold", {{"dim", cfg.dim}, {"metric", {{"name", cfg.metric.name}, {"params", cfg.metric.params}}}}},
          {"lagrangian", {{"f", field_json(cfg.f)}, {"omega", omega}, {"c", cfg.c}}},
          {"grid", {{"N", cfg.N}, {"dt", cfg.dt}, {"stencil_r", cfg.stencil_r}}},
          {"solver", {{"tol", cfg.tol}, {"max_iters", cfg.max_iters}, {"horizons", cfg.horizons}}},
          {"params", cfg.params}};
}

Vec param_vec(const ExperimentConfig& cfg, const std::string& key, const Vec& fallback) {
  const auto v = param_or<std::vector<double>>(cfg, key, {});
  if (v.empty()) return fallback;
  if (static_cast<int>(v.size()) != cfg.dim)
    throw ConfigError("params." + key + " must have one entry per dimension");
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

LagrangianSpec build_spec(const ExperimentConfig& cfg) {
  const int n = cfg.dim;
  Vec c = Vec::Zero(n);
  for (std::size_t i = 0; i < cfg.omega_constants.size(); ++i) c[static_cast<Eigen::Index>(i)] = cfg.omega_constants[i];
  return {build_metric(n, cfg.metric), build_field(n, cfg.f), ClosedOneForm{c, build_field(n, cfg.phi)}, cfg.c};
}

}  // namespace wkam
