#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wkam {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Errors are grouped so the CLI can map them to exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateMetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

// Reduce a chart coordinate into [0,1).
inline double wrap01(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

inline Vec wrap01(const Vec& x) {
  Vec r(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) r[i] = wrap01(x[i]);
  return r;
}

// Shortest periodic displacement from a to b, componentwise in [-1/2, 1/2).
inline Vec periodic_delta(const Vec& a, const Vec& b) {
  Vec d = b - a;
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] -= std::floor(d[i] + 0.5);
  return d;
}

}  // namespace wkam
