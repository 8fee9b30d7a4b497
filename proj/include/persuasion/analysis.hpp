#ifndef PERSUASION_ANALYSIS_HPP
#define PERSUASION_ANALYSIS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "persuasion/equilibria.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/model.hpp"

// Equilibrium verification against the discretized best-response LP,
// necessary-condition screens, and price-of-stability computation.

namespace persuasion::analysis {

// Necessary-condition screens for symmetric equilibria. These rule policies
// out; they never prove equilibrium. The marginal checks require a strictly
// monotone utility and are reported as disabled otherwise.
struct StructuralDiagnostics {
  bool marginal_checks_enabled = true;
  bool interior_atom_present = false;    // atom away from the all-ones point
  bool marginal_atom_below_one = false;  // some marginal has mass below 1
  bool marginal_support_gap = false;     // marginal support is not [0, qhat] (+ {1})
  std::vector<std::string> notes;

  bool any_violation() const {
    return interior_atom_present ||
           (marginal_checks_enabled && (marginal_atom_below_one || marginal_support_gap));
  }
};

StructuralDiagnostics structural_diagnostics(const SignalingPolicy& G, const UtilityFunction& V);

struct OptimalWelfare {
  double value = 0.0;
  std::uint32_t split = 0;  // S achieving max V(S) + V([n] \ S)
};

OptimalWelfare optimal_welfare(const UtilityFunction& V);

struct VerifyOptions {
  int K = 512;
  lp::SimplexOptions lp;
  double tol_grid_coeff = 2.0;  // tol = c1 * h * Vmax + c2 * Vmax / K
  double tol_disc_coeff = 2.0;
  const lp::HyperplaneCertificate* closed_form_certificate = nullptr;
  const std::vector<double>* objective = nullptr;  // cached grid payoffs for (G, V, grid, K)
};

struct EquilibriumReport {
  lp::LpStatus lp_status = lp::LpStatus::stalled;
  double payoff_vs_self = 0.0;       // Π of G against its own discretization
  double best_response_value = 0.0;  // LP optimum on the grid
  double gap = 0.0;                  // best_response_value - payoff_vs_self
  lp::HyperplaneCertificate certificate;  // LP duals (alpha, beta)
  double max_envelope_violation = 0.0;    // max over grid of Π(q) - (alpha.q + beta)
  double support_slack = 0.0;             // envelope slack on the LP support
  double cert_self_slack = 0.0;           // envelope slack on G's own support atoms
  StructuralDiagnostics diagnostics;
  int grid_points_per_axis = 0;
  int K = 0;
  double tol = 0.0;
  bool equilibrium_consistent = false;  // gap <= tol
  // closed-form certificate cross-check (when one is supplied)
  double closed_form_disagreement = 0.0;
  bool red_alert = false;
  std::size_t lp_iterations = 0;
};

// Verdicts are tolerance based: tol(grid, K) = c1*h*Vmax + c2*Vmax/K. The gap
// of an exact equilibrium vanishes as h -> 0 and K -> inf.
EquilibriumReport verify_equilibrium(const SignalingPolicy& G, const Prior& prior,
                                     const UtilityFunction& V, const Grid& grid,
                                     const VerifyOptions& opts = {});

struct PoSResult {
  std::string family;
  double lambda = 0.0;
  double shape = 0.0;  // rho for two-receiver families, tau for power sweeps
  int n = 0;
  double mu = 0.0;
  double optimal_welfare = 0.0;
  double eq_welfare = 0.0;
  double ratio = 0.0;              // optimal_welfare / eq_welfare
  double closed_form_bound = 0.0;  // the family's published bound
};

// Closed-form price-of-stability bound of a named family. Exactly 1 for
// lambda <= 1/2. Throws equilibria::RegionError when the parameters fall
// outside the family's feasibility region.
// Families: sup-small, sub-small, sup-large, sub-large, sup-multi,
// sub-multi-even, independent.
PoSResult pos_bound(const std::string& family, const Prior& prior, const UtilityFunction& V);

}  // namespace persuasion::analysis

#endif  // PERSUASION_ANALYSIS_HPP
