#pragma once

#include "wkam/dynamics.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wkam {

// Orthonormal frame transported along a curve; E[k] has columns e_i(s_k).
struct ParallelFrame {
  std::vector<double> s;
  std::vector<Mat> E;
};

// Transports along the Hermite interpolant of the trajectory. The default
// initial frame is the Cholesky-orthonormalized chart basis.
ParallelFrame parallel_transport(const MetricField& metric, const Trajectory& traj,
                                 const std::optional<Mat>& E0 = std::nullopt);

// Orthonormal basis at x (columns), E^T g E = I.
Mat orthonormal_frame(const MetricField& metric, const Vec& x);

// Curvature and potential Hessian in the parallel frame.
struct FrameCoefficients {
  Mat R;
  Mat H;
};
using SyntheticCurvature = std::function<FrameCoefficients(double s)>;

// One joint state of the frame ODE. x, v, E are unused in synthetic mode.
struct FrameState {
  Vec x, v;
  Mat E, A, Adot;
};

struct JacobiFrame {
  double dt = 0.0;
  std::vector<double> s;
  std::vector<FrameState> states;
  std::vector<double> detA;
  bool synthetic = false;
  std::string diagnostic;  // set when the frame ODE blew up
  double last_valid_s = 0.0;

  std::size_t size() const { return s.size(); }
  const Mat& A(std::size_t k) const { return states[k].A; }
  const Mat& Adot(std::size_t k) const { return states[k].Adot; }
  // Dense evaluation by one RK4 substep from the preceding sample.
  FrameState state_at(double s) const;
  FrameCoefficients coefficients_at(const FrameState& st, double s) const;
  // Chart components of the Jacobi fields J_i (columns) at sample k.
  Mat jacobi_chart(std::size_t k) const { return states[k].E * states[k].A.transpose(); }

  std::optional<LagrangianSpec> spec;
  SyntheticCurvature synthetic_curvature;
};

// Ȧ(0) = B (identity by default), A(0) = 0.
JacobiFrame propagate_jacobi_frame(const LagrangianSpec& spec, const Trajectory& traj,
                                   const std::optional<Mat>& B = std::nullopt);
JacobiFrame propagate_synthetic_frame(int n, SyntheticCurvature curvature, double T, double dt,
                                      const std::optional<Mat>& B = std::nullopt);

struct ConjugateOptions {
  double tol_s = 1e-8;           // bisection width
  double window = 0.05;          // scale window for tangential zeros
  double tangential_rel = 1e-6;  // |det| / local scale below this is a zero
  double undetermined_rel = 1e-2;
};

struct ConjugateReport {
  std::vector<double> points;
  std::vector<double> undetermined;  // near-tangential minima that are not resolvable zeros
};

ConjugateReport conjugate_points(const JacobiFrame& frame, const ConjugateOptions& opts = {});

struct ReverseConjugacyReport {
  std::vector<double> forward;
  std::vector<double> matched;  // reversed-side parameter per forward point (NaN if none)
  std::vector<double> reversed_from_end;
  bool ok = true;
};

ReverseConjugacyReport reverse_conjugacy_check(const LagrangianSpec& spec, const Trajectory& traj,
                                               double tol = 1e-4);
ReverseConjugacyReport reverse_conjugacy_check_synthetic(int n, const SyntheticCurvature& curvature, double T,
                                                         double dt, double tol = 1e-4);

// Second-order coefficients of L along a curve; Lvx(i,j) = ∂²L/∂v_i∂x_j.
struct SecondVariationCoefficients {
  Mat Lvv, Lvx, Lxx;
  Vec Lv;
};
using CoefficientPath = std::function<SecondVariationCoefficients(double t)>;

SecondVariationCoefficients second_variation_coefficients(const LagrangianSpec& spec, const Vec& x, const Vec& v);
CoefficientPath coefficients_along(const LagrangianSpec& spec, const Trajectory& traj);

struct FieldValue {
  Vec value;
  Vec derivative;
};

// Piecewise-smooth field on [breakpoints.front(), breakpoints.back()].
struct PiecewiseField {
  std::vector<double> breakpoints;
  std::vector<std::function<FieldValue(double)>> pieces;

  static PiecewiseField smooth(double t0, double t1, std::function<FieldValue(double)> fn) {
    return {{t0, t1}, {std::move(fn)}};
  }
  FieldValue eval(double t, std::size_t piece) const { return pieces[piece](t); }
};

struct IndexFormValue {
  double value = 0.0;
  std::vector<double> partition;
};

IndexFormValue index_form(const CoefficientPath& coeffs, const PiecewiseField& eta, const PiecewiseField& theta,
                          int panels_per_piece = 64);
IndexFormValue index_form(const LagrangianSpec& spec, const Trajectory& traj, const PiecewiseField& eta,
                          const PiecewiseField& theta, int panels_per_piece = 64);

struct SecondVariationReport {
  std::vector<double> steps;
  std::vector<double> finite_difference;
  double index_value = 0.0;
  double boundary = 0.0;
  double predicted = 0.0;
  double max_rel_error = 0.0;
  bool ok = false;
};

// α(t,s) = ρ(t) + s V(t) + s² W(t)
SecondVariationReport second_variation_check(const LagrangianSpec& spec, const Trajectory& traj,
                                             const PiecewiseField& V,
                                             const std::optional<PiecewiseField>& W = std::nullopt,
                                             double rel_tol = 1e-3);

// A_τ(x, y) supplied by an external oracle. time_step > 0 means τ must be a
// multiple of it; resolution is the oracle's own error bound.
struct ActionOracle {
  std::function<double(double tau, const Vec& y)> value;
  double time_step = 0.0;
  double resolution = 0.0;
};

struct ShootingSolution {
  Vec v0;
  Vec lift;  // lifted endpoint reached
  double action = 0.0;
};

// Extremals from x reaching y (mod 1) in time t, distinct by initial velocity,
// sorted by action.
std::vector<ShootingSolution> shoot_minimizers(const LagrangianSpec& spec, const Vec& x, const Vec& y, double t,
                                               int starts = 32, unsigned long long seed = 1,
                                               double flow_dt = 1e-3);

enum class CutClass { not_cut, cut_conjugate, cut_multiple_minimizer, undetermined };
std::string to_string(CutClass c);

struct CutOptions {
  double delta_t = 0.05;
  double tol = 1e-3;
  int starts = 32;
  unsigned long long seed = 1;
  double flow_dt = 1e-3;
  std::optional<JacobiFrame> frame_override;
};

struct CutReport {
  CutClass verdict = CutClass::undetermined;
  double gap_at_t = 0.0;
  double gap_after = 0.0;
  double tau_after = 0.0;
  std::string diagnostic;
};

CutReport is_cut_point(const LagrangianSpec& spec, const Vec& x, const Vec& v, double t, const ActionOracle& oracle,
                       const CutOptions& opts = {});

void dump_frame_csv(const JacobiFrame& frame, std::ostream& os);

}  // namespace wkam
