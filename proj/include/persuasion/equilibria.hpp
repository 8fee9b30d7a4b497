#ifndef PERSUASION_EQUILIBRIA_HPP
#define PERSUASION_EQUILIBRIA_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "persuasion/lp.hpp"
#include "persuasion/model.hpp"

// Closed-form symmetric-equilibrium constructors for anonymous supermodular
// and submodular utilities, the scalar machinery behind them (mass quadratics,
// binomial utility averages, feasibility intervals), and the worked example
// policies used as verification fixtures.

namespace persuasion::equilibria {

// Requested parameters fall outside the feasibility region of the family.
struct RegionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binomial utility averages for n receivers. The half/bar/s fields need an
// even receiver count. t_full sums to n; t_half and t_bar sum to n/2 (the two
// ranges are distinct quantities and are kept under distinct names).
struct MultiReceiverScalars {
  int n = 0;
  double t_full = 0.0;  // sum_{j=1..n}   C(n,j)/2^n     * v(j)
  double t_half = 0.0;  // sum_{j=1..n/2} C(n/2,j)/2^n/2 * v(j)
  double t_bar = 0.0;   // sum_{j=1..n/2} C(n/2,j)/2^n/2 * v(j+n/2)
  double r = 0.0;       // 2*t_full - v(n);  <= 0 for supermodular v
  double s = 0.0;       // t_half + t_bar + v(n/2)*(2^{-n/2} - 2);  <= 0 for submodular v
  bool has_half = false;
};

MultiReceiverScalars multi_scalars(const UtilityFunction& V);

// One certificate or feasibility condition in residual form. Equality
// conditions should be ~0; inequality conditions should be <= 0.
struct NamedResidual {
  std::string name;
  double value = 0.0;
  bool equality = true;
};

double max_equality_residual(const std::vector<NamedResidual>& conditions);
double max_inequality_violation(const std::vector<NamedResidual>& conditions);

struct ConstructedEquilibrium {
  SignalingPolicy policy;
  lp::HyperplaneCertificate certificate;  // closed-form supporting hyperplane
  double welfare_closed_form = 0.0;
  std::vector<NamedResidual> conditions;
};

// --- small prior (lambda <= 1/2), welfare-optimal equilibria ---------------

// Diagonal segment 0 -> (2*lambda)*1 of weight 1. Welfare v(n).
ConstructedEquilibrium construct_sup_small(const Prior& prior, int n, const UtilityFunction& V);

// Split-half anti-correlated segment; the first floor(n/2) coordinates ascend
// 0 -> 2*lambda while the rest descend. Welfare 2 v(n/2) for even n and
// v((n-1)/2) + v((n+1)/2) for odd n.
ConstructedEquilibrium construct_sub_small(const Prior& prior, int n, const UtilityFunction& V);

// --- supermodular, large prior ---------------------------------------------

// Mass on the all-ones posterior for the two-receiver supermodular family:
// the smaller-root branch of  mu^2 (2t-r) + mu lambda (3r-2t) + r(2-4lambda),
// written in the cancellation-free form  2(4lambda-2) / (lambda(3-2rho) + sqrt(disc)),
// which also covers the rho = 1/2 limit (2lambda-1)/lambda.
double solve_mu_sup(double lambda, double rho);

struct SupLargePriorParams {
  double mu = 0.0;
  double alpha = 0.0;  // per-coordinate slope; beta = 0
  double p_hat = 0.0;
};

struct SupLargeResult {
  ConstructedEquilibrium eq;
  SupLargePriorParams params;
};

// Two receivers, lambda > 1/2: diagonal segment 0 -> (p_hat, p_hat) of weight
// 1-mu plus an atom at (1,1) of weight mu.
SupLargeResult construct_sup_large(const Prior& prior, const UtilityFunction& V);

// Any n >= 2, lambda > 1/2: diagonal 0 -> p_hat*1 plus mass at the all-ones
// point. Reduces to construct_sup_large at n = 2.
SupLargeResult construct_sup_large_multi(const Prior& prior, const UtilityFunction& V);

// --- submodular, large prior -------------------------------------------------

struct MassInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<NamedResidual> endpoint_conditions;
};

// Admissible interval [mu_lb, mu_ub] of the marginal mass at posterior 1 for
// the two-receiver submodular family; mu_lb is the smaller root of the
// Pi((1,1)) envelope condition and mu_ub the smaller root of the Pi((l,l))
// condition. Empty when the interval is empty or escapes (0, 1/2].
// rho = 1/2 admits exactly mu = (2lambda-1)/lambda, and only for lambda < 2/3.
std::optional<MassInterval> sub_feasible_interval(double lambda, double rho);

struct SubLargePriorParams {
  double mu = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double ell = 0.0;
  double p_hat = 0.0;
};

struct SubLargeResult {
  ConstructedEquilibrium eq;
  SubLargePriorParams params;
};

// Two receivers, lambda > 1/2, mu in the feasible interval (default: interval
// minimum, which maximizes welfare). Policy: axis segments pairing q in [0,l]
// with the other receiver pinned at posterior 1 (weight mu each) plus the
// anti-diagonal segment (l,p_hat) -> (p_hat,l) of weight 1-2mu.
SubLargeResult construct_sub_large(const Prior& prior, const UtilityFunction& V,
                                   std::optional<double> mu = {});

struct InfeasibleSubProbe {
  bool certifiable = false;
  std::string violated_condition;  // set when not certifiable
  double mu = 0.0, alpha = 0.0, beta = 0.0, p_hat = 0.0;
};

// Tests whether the plain anti-diagonal-plus-(1,1)-mass layout admits a
// nonnegative supporting hyperplane. It does only at rho = 1/2, where
// mu = (2lambda-1)/lambda, alpha = t/(2lambda), beta = 0, p_hat = 2(1-lambda).
InfeasibleSubProbe probe_infeasible_sub(double lambda, double rho);

// Even n: feasible mass interval for the split-half large-prior submodular
// construction. Boundary roots are located from the (quadratic in mu)
// envelope and nonnegativity conditions, then verified against the full
// condition set. Reduces to sub_feasible_interval at n = 2.
std::optional<MassInterval> sub_feasible_interval_multi(const Prior& prior,
                                                        const UtilityFunction& V);

SubLargeResult construct_sub_large_multi_even(const Prior& prior, const UtilityFunction& V,
                                              std::optional<double> mu = {});

// Odd n: the construction solves an 8-parameter nonlinear system (two
// Bayes-plausibility rows plus envelope equalities at the six support
// corners) by damped Newton, given the first-group mass mu1. Equilibrium
// status is reported by the verifier, not asserted here.
struct SubOddParams {
  double mu1 = 0.0, mu2 = 0.0;
  double ell1 = 0.0, ell2 = 0.0;
  double p_hat1 = 0.0, p_hat2 = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0, beta = 0.0;
};

struct SubOddResult {
  std::optional<SignalingPolicy> policy;
  lp::HyperplaneCertificate certificate;
  SubOddParams params;
  std::vector<double> residuals;
  double residual_norm = 0.0;
  int newton_iterations = 0;
  bool converged = false;
};

SubOddResult construct_sub_large_multi_odd(const Prior& prior, const UtilityFunction& V,
                                           double mu1);

// --- independent signaling (additive utility) -------------------------------

// The unique equilibrium of independent per-receiver signaling, which exists
// iff V is additive: each marginal is uniform on [0, 2*lambda] (lambda <= 1/2)
// or uniform on [0, 2-2*lambda] plus mass (2*lambda-1)/lambda at 1.
struct IndependentPolicy {
  int n = 0;
  double lambda = 0.0;
  SignalingPolicy marginal;  // one-dimensional, identical across receivers

  // Product policy over all receivers, each marginal discretized with
  // atoms_per_marginal atoms per segment. Atom count grows as K^n.
  SignalingPolicy joint_discretized(int atoms_per_marginal) const;
};

IndependentPolicy construct_independent_additive(const Prior& prior, int n,
                                                 const UtilityFunction& V);

// --- worked example fixtures -------------------------------------------------

struct FixtureOptions {
  double c = 0.5;          // ex31 half-width
  double epsilon = 0.01;   // near-degenerate utility parameter of ex42/ex43
  int pieces = 64;         // ex43b piecewise-uniform resolution
  std::optional<double> lambda;  // override the example's default prior
};

struct Fixture {
  std::string id;
  double lambda = 0.0;
  SignalingPolicy policy;
  UtilityFunction utility;
};

// ids: ex31 (anti-diagonal family under V(S)=1), ex42a/ex42b (supermodular
// non-uniqueness pair), ex43a/ex43b (submodular non-uniqueness pair). ex43b
// carries a linear density and is represented by a piecewise-uniform
// approximation preserving per-piece mass and marginal means exactly.
Fixture example_fixture(const std::string& id, const FixtureOptions& opts = {});

}  // namespace persuasion::equilibria

#endif  // PERSUASION_EQUILIBRIA_HPP
