#pragma once

#include "wkam/weakkam.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace wkam {

// Staggered 1-cochain: edge[a][i] = ∫ω over the edge from node i to i + e_a.
struct EdgeCochain {
  Grid grid;
  std::vector<std::vector<double>> edge;

  // Node covector from the average of the two adjacent edges per axis.
  Vec covector_at(std::size_t node) const;
  // Loop sums along each axis through node 0.
  Vec loop_class() const;
};

EdgeCochain sample_form(const Grid& grid, const ClosedOneForm& omega);

struct HarmonicCheck {
  bool harmonic = false;
  double sup_div = 0.0;
};

// Pointwise div ω♯ at the grid nodes.
HarmonicCheck is_harmonic(const MetricField& metric, const ClosedOneForm& omega, const Grid& grid, double tol_h);

// Discrete operators: flux F = √g g^{ab} ω_b on edges, node divergence
// D(F) = Σ_a (F_a[i] − F_a[i − e_a]) / Δx, which is the √g-weighted div.
class DiscreteHodge {
 public:
  DiscreteHodge(const MetricField& metric, const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::vector<std::vector<double>> flux(const EdgeCochain& w) const;
  std::vector<double> divergence(const std::vector<std::vector<double>>& flux) const;
  EdgeCochain d(const std::vector<double>& psi) const;
  // √g at nodes
  const std::vector<double>& volume() const { return vol_; }

 private:
  Grid grid_;
  std::vector<std::vector<double>> diag_;  // diag_[a][i]
  // cross_[a][b][k][i] for the k-th of the four b-edges around a-edge i
  std::vector<std::vector<std::vector<std::vector<double>>>> cross_;
  std::vector<double> vol_;
  std::vector<std::vector<std::size_t>> plus_, minus_;  // node ± e_a
  std::vector<std::vector<std::vector<std::vector<std::size_t>>>> cross_node_;
};

struct HodgeOptions {
  double tol = 1e-10;  // relative CG residual
  int max_iters = 20000;
};

struct HodgeDecomposition {
  EdgeCochain omega;
  EdgeCochain harmonic;
  std::vector<double> psi;
  Vec harmonic_class;      // loop sums of the harmonic part
  Vec harmonic_mean;       // grid mean of the harmonic covector
  double solver_residual = 0.0;  // ‖A ψ − b‖ / ‖b‖
  double stokes_sum = 0.0;       // Σ D(Fω) Δx^n
  double harmonic_div_sup = 0.0;  // sup |div harm♯|
  double div_tolerance = 0.0;     // CG residual target over min √g, bounds harmonic_div_sup
  int iterations = 0;
  bool converged = false;
};

HodgeDecomposition harmonic_representative(const MetricField& metric, const EdgeCochain& omega,
                                           const HodgeOptions& opts = {});
HodgeDecomposition harmonic_representative(const MetricField& metric, const ClosedOneForm& omega, const Grid& grid,
                                           const HodgeOptions& opts = {});

enum class BochnerStatus { pass, fail, not_applicable };
std::string to_string(BochnerStatus s);

struct BochnerReport {
  BochnerStatus status = BochnerStatus::not_applicable;
  double spread = 0.0;       // sup − inf of g(ω♯, ω♯)
  double min_ricci = 0.0;    // min eigenvalue of Ric relative to g
  std::string diagnostic;
};

// Throws DomainError when ω_h is not harmonic within tol_h.
BochnerReport bochner_check(const MetricField& metric, const ClosedOneForm& omega_h, const Grid& grid, double tol_h,
                            double ricci_tol = 1e-8);

void dump_decomposition_csv(const HodgeDecomposition& dec, std::ostream& os);

}  // namespace wkam
