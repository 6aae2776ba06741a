#pragma once

#include "wkam/dynamics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace wkam {

using Json = nlohmann::json;

// Built-in scalar fields: zero, constant{value}, cosine/sine{amp, k},
// fourier{terms: [{amp, kind: "cos"|"sin", k}], offset}.
struct FieldConfig {
  std::string name = "zero";
  Json params = Json::object();
};

// Built-in metrics: flat, constant{g}, conformal{lambda}, diagonal{lambdas}.
struct MetricConfig {
  std::string name = "flat";
  Json params = Json::object();
};

struct ExperimentConfig {
  std::string experiment = "unnamed";
  std::string output_dir = "out";
  int dim = 2;
  MetricConfig metric;
  FieldConfig f;
  std::vector<double> omega_constants;  // empty means zero
  FieldConfig phi;
  double c = 0.0;
  int N = 64;
  double dt = 0.05;
  int stencil_r = 3;
  double tol = 1e-9;
  int max_iters = 20000;
  std::vector<double> horizons{5.0, 10.0, 20.0, 40.0};
  Json params = Json::object();  // experiment-specific inputs
};

// Throws ConfigError on schema or range violations.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);
Json to_json(const ExperimentConfig& cfg);

// Typed access to cfg.params; type errors become ConfigError.
template <class T>
T param_or(const ExperimentConfig& cfg, const std::string& key, T fallback) {
  if (!cfg.params.contains(key)) return fallback;
  try {
    return cfg.params.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("params." + key + ": " + e.what());
  }
}
// Vector parameter with exactly dim entries.
Vec param_vec(const ExperimentConfig& cfg, const std::string& key, const Vec& fallback);

ScalarField build_field(int dim, const FieldConfig& fc);
MetricField build_metric(int dim, const MetricConfig& mc);
LagrangianSpec build_spec(const ExperimentConfig& cfg);

}  // namespace wkam
