#ifndef PERSUASION_PAYOFF_HPP
#define PERSUASION_PAYOFF_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "persuasion/model.hpp"

// Win-set probabilities and expected sender payoff against a fixed opponent
// policy. Receivers choose the sender with the higher posterior; ties are
// resolved per receiver by an independent fair coin.

namespace persuasion::payoff {

inline constexpr double kTieTol = 1e-12;

// Per-receiver statuses of own signal q against one opponent signal p,
// packed as bitmasks. Exactly one status per receiver.
struct WinOutcome {
  std::uint32_t wins = 0;    // p_j < q_j (beyond tie_tol)
  std::uint32_t ties = 0;    // |p_j - q_j| <= tie_tol
  std::uint32_t losses = 0;  // p_j > q_j (beyond tie_tol)
};

WinOutcome classify(std::span<const double> q, std::span<const double> p, double tie_tol = kTieTol);

// E[v(wins + Binomial(ties, 1/2))] lookup for an anonymous utility.
class AnonymousPayoffTable {
 public:
  AnonymousPayoffTable() : stride_(0) {}
  explicit AnonymousPayoffTable(const UtilityFunction& V);
  double operator()(int wins, int ties) const { return table_[wins * stride_ + ties]; }

 private:
  int stride_;
  std::vector<double> table_;
};

// Probability that the realized win set equals S when playing q against the
// atomic policy F: each opponent atom contributes weight * (1/2)^{#ties} for
// every tie assignment T' with wins ∪ T' = S. Sums to 1 over all S.
double win_set_probability(std::span<const double> q, std::uint32_t S, const SignalingPolicy& F,
                           double tie_tol = kTieTol);

// Expected utility of signal q against the atomic policy F. Weakly increasing
// in every coordinate of q and nonnegative for monotone V.
double expected_payoff(std::span<const double> q, const SignalingPolicy& F,
                       const UtilityFunction& V, double tie_tol = kTieTol);

// Expected utility of q against a symbolic atoms+segments policy, integrating
// segments in closed form. Along a segment, coordinates that vary cross q_j at
// a single parameter value (measure zero, no tie mass); constant coordinates
// equal to q_j tie with the full segment weight.
double expected_payoff_exact(std::span<const double> q, const SignalingPolicy& F,
                             const UtilityFunction& V, double tie_tol = kTieTol);

// As above but over raw atom/segment lists that need not form a normalized
// policy (used by equation solvers mid-iteration).
double expected_payoff_exact(std::span<const double> q, const std::vector<Atom>& atoms,
                             const std::vector<Segment>& segments, const UtilityFunction& V,
                             double tie_tol = kTieTol);

// Evaluates Π(q, discretize(F, K)) for arbitrary queries without
// materializing the discretization: each segment's K midpoint atoms are
// counted analytically per coordinate (anonymous utilities; general ones fall
// back to the atom list). Matches the atom-path value for the same K.
class DiscretizedPayoff {
 public:
  DiscretizedPayoff(const SignalingPolicy& F, const UtilityFunction& V, int K,
                    double tie_tol = kTieTol);
  double operator()(std::span<const double> q) const;

 private:
  SignalingPolicy policy_;  // original for the counting path, atoms for the fallback
  UtilityFunction utility_;
  AnonymousPayoffTable table_;
  int K_;
  double tie_tol_;
  bool counting_path_;
};

// Sum of both senders' expected utilities, each policy discretized with K
// atoms per segment. A symmetric call welfare(G, G, ...) shares one
// discretization for both roles, so self-ties at shared atoms are counted.
double welfare(const SignalingPolicy& G, const SignalingPolicy& F, const UtilityFunction& V,
               int K = 512);

struct GridObjectiveOptions {
  int threads = 0;  // 0 = hardware concurrency
  double tie_tol = kTieTol;
};

// Π(grid point, discretize(F, K)) for every point of the grid. Equals the
// atom-enumeration path value for the same discretization; segments of F are
// counted analytically instead of looped when V is anonymous. Results do not
// depend on the thread count.
std::vector<double> grid_objective(const Grid& grid, const SignalingPolicy& F,
                                   const UtilityFunction& V, int K,
                                   const GridObjectiveOptions& opts = {});

}  // namespace persuasion::payoff

#endif  // PERSUASION_PAYOFF_HPP
