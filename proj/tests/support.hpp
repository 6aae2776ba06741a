#pragma once

#include "wkam/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace test {

inline constexpr double kPi = std::numbers::pi;

inline wkam::Vec vec2(double a, double b) {
  wkam::Vec v(2);
  v << a, b;
  return v;
}

inline wkam::ScalarField sine(double amp, int k1, int k2) { return wkam::ScalarField::fourier(2, {{amp, false, {k1, k2}}}); }
inline wkam::ScalarField cosine(double amp, int k1, int k2) { return wkam::ScalarField::fourier(2, {{amp, true, {k1, k2}}}); }

inline wkam::LagrangianSpec flat_harmonic(double a = 0.3, double b = 0.4) {
  return {wkam::MetricField::flat(2), wkam::ScalarField::zero(2), wkam::ClosedOneForm::harmonic(vec2(a, b)), 0.0};
}

inline wkam::LagrangianSpec mechanical(double eps = 0.05, int k = 1) {
  return {wkam::MetricField::flat(2), cosine(eps, k, 0), wkam::ClosedOneForm::zero(2), 0.0};
}

// Conformal metric e^{2λ}δ with λ = 0.1 sin 2πx₁, a Fourier potential and a closed form.
inline wkam::LagrangianSpec curved() {
  return {wkam::MetricField::conformal(sine(0.1, 1, 0)),
          wkam::ScalarField::fourier(2, {{0.05, true, {1, 0}}, {0.03, false, {1, 1}}}),
          wkam::ClosedOneForm{vec2(0.2, -0.1), sine(0.05, 0, 1)}, 0.0};
}

inline double max_abs(const wkam::Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace test
