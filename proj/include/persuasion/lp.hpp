#ifndef PERSUASION_LP_HPP
#define PERSUASION_LP_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "persuasion/model.hpp"

// Two-phase revised simplex for equality-form LPs
//   max c.x  s.t.  A x = b,  x >= 0
// with a dense m x m basis inverse and matrix-free column access, plus the
// best-response LP assembly and dual (supporting hyperplane) extraction.

namespace persuasion::lp {

enum class PivotRule { dantzig, bland };

enum class LpStatus { optimal, infeasible, unbounded, stalled };

const char* to_string(LpStatus status);

struct SimplexOptions {
  PivotRule pivot_rule = PivotRule::dantzig;  // Bland fallback kicks in on stall
  double tol = 1e-9;
  std::size_t max_iterations = 100000;
};

// Column access abstraction; the best-response LP generates its columns from
// grid indices instead of storing them.
class ColumnSource {
 public:
  virtual ~ColumnSource() = default;
  virtual std::size_t num_columns() const = 0;
  virtual int num_rows() const = 0;
  virtual double objective(std::size_t j) const = 0;
  virtual void column(std::size_t j, double* out) const = 0;

  struct PriceResult {
    bool found = false;
    std::size_t best_j = 0;
    double best_reduced_cost = 0.0;
    double max_reduced_cost = 0.0;  // over all columns, also when not entering
  };
  // Scans reduced costs c_j - y.A_j (c_j treated as 0 when phase1 is set).
  // bland returns the first column above tol; otherwise the largest.
  virtual PriceResult price(std::span<const double> y, double tol, bool bland, bool phase1) const;
};

// Dense equality-form LP, columns stored column-major. m = b.size().
class LinearProgram : public ColumnSource {
 public:
  LinearProgram(std::vector<double> c, std::vector<double> a_column_major, std::vector<double> b);

  std::size_t num_columns() const override { return c_.size(); }
  int num_rows() const override { return static_cast<int>(b_.size()); }
  double objective(std::size_t j) const override { return c_[j]; }
  void column(std::size_t j, double* out) const override;
  const std::vector<double>& rhs() const { return b_; }

 private:
  std::vector<double> c_;
  std::vector<double> a_;  // column-major, m * num_columns
  std::vector<double> b_;
};

struct SimplexSolution {
  LpStatus status = LpStatus::stalled;
  double value = 0.0;
  std::vector<std::pair<std::size_t, double>> support;  // basic variables, index ascending
  std::vector<double> duals;                            // one per row
  double max_reduced_cost = 0.0;                        // over all columns at termination
  double primal_residual = 0.0;                         // ||Ax - b||_inf over the support
  double duality_gap = 0.0;                             // |c.x - b.y|
  std::size_t iterations = 0;
  bool used_bland_fallback = false;

  std::vector<double> dense_solution(std::size_t num_columns) const;
};

SimplexSolution solve(const ColumnSource& columns, std::span<const double> b,
                      const SimplexOptions& opts = {});

inline SimplexSolution solve_lp(const LinearProgram& p, const SimplexOptions& opts = {}) {
  return solve(p, p.rhs(), opts);
}

// Dual witness of best-response optimality: Π(q) <= alpha.q + beta on the
// grid with equality on the returned support. Nonnegativity of alpha and beta
// is a structural property of the model, checked by callers rather than
// assumed (equality-form duals are sign-free a priori).
struct HyperplaneCertificate {
  std::vector<double> alpha;
  double beta = 0.0;

  double evaluate(std::span<const double> q) const;
};

struct BestResponse {
  LpStatus status = LpStatus::stalled;
  std::optional<SignalingPolicy> policy;  // atomic, support size <= n+1
  double value = 0.0;
  HyperplaneCertificate certificate;
  double max_envelope_violation = 0.0;  // max over grid of Π(q) - (alpha.q + beta)
  double support_slack = 0.0;           // max |Π(q) - (alpha.q + beta)| on the support
  double duality_gap = 0.0;             // |c.x - b.y| of the underlying solve
  std::size_t lp_iterations = 0;
};

// Assembles the best-response LP over the grid: variables g(q) >= 0 per grid
// point, objective Π(q, discretize(F, K)), constraints Σ g(q) q_j = lambda and
// Σ g(q) = 1. `objective` may carry a precomputed payoff vector for this
// (F, V, grid, K) combination; it is computed on demand otherwise.
BestResponse best_response(const SignalingPolicy& F, const Prior& prior, const UtilityFunction& V,
                           const Grid& grid, int K, const SimplexOptions& opts = {},
                           const std::vector<double>* objective = nullptr);

inline constexpr std::size_t kMaxLpColumns = 10'000'000;

}  // namespace persuasion::lp

#endif  // PERSUASION_LP_HPP
