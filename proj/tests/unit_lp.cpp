#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/payoff.hpp"

using namespace persuasion;

TEST_CASE("simplex solves a one-constraint toy") {
  lp::LinearProgram p({1.0, 0.0}, {1.0, 1.0}, {1.0});  // max x1 s.t. x1 + x2 = 1
  const auto sol = lp::solve_lp(p);
  REQUIRE(sol.status == lp::LpStatus::optimal);
  CHECK(sol.value == doctest::Approx(1.0));
  const auto x = sol.dense_solution(2);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(0.0));
  CHECK(sol.duality_gap <= 1e-9);
}

TEST_CASE("simplex reports infeasibility as a status") {
  lp::LinearProgram p({0.0}, {1.0}, {-1.0});  // x1 = -1, x1 >= 0
  CHECK(lp::solve_lp(p).status == lp::LpStatus::infeasible);
}

TEST_CASE("simplex reports unboundedness as a status") {
  lp::LinearProgram p({1.0, 0.0}, {1.0, -1.0}, {0.0});  // max x1 s.t. x1 = x2
  CHECK(lp::solve_lp(p).status == lp::LpStatus::unbounded);
}

TEST_CASE("zero-valued artificials cannot grow in phase 2") {
  // max x2 s.t. -x2 = 0, x1 + x2 = 1. Phase 1 ends with the first row's
  // artificial basic at zero; entering x2 moves through that row with a
  // negative coefficient and must be blocked at step zero.
  lp::LinearProgram p({0.0, 1.0}, {0.0, 1.0, -1.0, 1.0}, {0.0, 1.0});
  const auto sol = lp::solve_lp(p);
  REQUIRE(sol.status == lp::LpStatus::optimal);
  CHECK(sol.value == doctest::Approx(0.0));
  CHECK(sol.primal_residual <= 1e-9);
}

TEST_CASE("simplex survives degenerate and duplicated instances") {
  test::Rng rng(37);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = rng.uniform_int(1, 3);
    const int cols = rng.uniform_int(m + 1, 14);
    std::vector<double> c(cols), a(static_cast<std::size_t>(cols) * m), b(m);
    for (int j = 0; j < cols; ++j) {
      if (j < m) {
        // identity block keeps the rows full rank, so basis enumeration is a
        // sound oracle
        c[j] = rng.uniform(-1.0, 1.0);
        a[j * m + j] = 1.0;
        continue;
      }
      if (rng.uniform_int(0, 3) == 0) {
        // duplicate an earlier column (degenerate bases)
        const int src = rng.uniform_int(0, j - 1);
        c[j] = c[src];
        for (int i = 0; i < m; ++i) a[j * m + i] = a[src * m + i];
        continue;
      }
      c[j] = rng.uniform(-1.0, 1.0);
      for (int i = 0; i < m; ++i)
        a[j * m + i] = rng.uniform_int(0, 4) == 0 ? 0.0 : rng.uniform(-1.0, 1.0);
    }
    for (int i = 0; i < m; ++i) b[i] = rng.uniform_int(0, 3) == 0 ? 0.0 : rng.uniform(-1.0, 1.0);

    lp::LinearProgram p(c, a, b);
    const auto sol = lp::solve_lp(p);
    const auto oracle = test::lp_support_enumeration_oracle({c, a, b, m});
    CAPTURE(trial);
    if (sol.status == lp::LpStatus::optimal) {
      REQUIRE(oracle.feasible);
      CHECK(sol.value == doctest::Approx(oracle.value).epsilon(1e-9));
      CHECK(sol.primal_residual <= 1e-8);
      CHECK(sol.duality_gap <= 1e-9 * (1.0 + std::abs(sol.value)));
    } else if (sol.status == lp::LpStatus::infeasible) {
      CHECK_FALSE(oracle.feasible);
    }
    // unbounded instances have no finite oracle value to compare
  }
}

TEST_CASE("both pivot rules agree") {
  lp::LinearProgram p({2.0, 1.0, 3.0, 0.5}, {1, 1, 2, 1, 1, 0, 3, 2}, {2.0, 1.5});
  const auto dantzig = lp::solve_lp(p);
  lp::SimplexOptions opts;
  opts.pivot_rule = lp::PivotRule::bland;
  const auto bland = lp::solve_lp(p, opts);
  REQUIRE(dantzig.status == lp::LpStatus::optimal);
  REQUIRE(bland.status == lp::LpStatus::optimal);
  CHECK(dantzig.value == doctest::Approx(bland.value).epsilon(1e-12));
}

TEST_CASE("simplex matches the support-enumeration oracle on random instances") {
  test::Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = rng.uniform_int(1, 2);
    const int points = n == 1 ? rng.uniform_int(5, 60) : rng.uniform_int(3, 13);
    Grid grid(n, points);
    const auto F = test::random_atomic_policy(rng, n, rng.uniform_int(1, 6));
    const auto V = test::random_utility(rng, n, trial % 2 == 0);
    const double lambda = rng.uniform(0.05, 0.95);
    const int K = 16;

    const auto objective = payoff::grid_objective(grid, F, V, K);
    const auto br = lp::best_response(F, Prior(lambda), V, grid, K, {}, &objective);
    REQUIRE(br.status == lp::LpStatus::optimal);

    const auto oracle =
        test::lp_support_enumeration_oracle(test::best_response_lp_data(grid, objective, lambda));
    REQUIRE(oracle.feasible);
    CHECK(br.value == doctest::Approx(oracle.value).epsilon(1e-9));
    CHECK(br.max_envelope_violation <= 1e-9);
    CHECK(br.support_slack <= 1e-9);
    CHECK(br.duality_gap <= 1e-9 * (1.0 + std::abs(br.value)));
  }
}

TEST_CASE("best response to a near-uniform diagonal opponent earns about half") {
  // single receiver, lambda 0.3: the symmetric-equilibrium payoff is 1/2
  const int K = 61;
  std::vector<Atom> atoms(K);
  for (int k = 0; k < K; ++k) atoms[k] = {1.0 / K, {0.6 * k / (K - 1)}};
  SignalingPolicy F(1, std::move(atoms), {});
  const auto V = UtilityFunction::anonymous(1, {0.0, 1.0});
  Grid grid(1, 11);
  const auto br = lp::best_response(F, Prior(0.3), V, grid, 1);
  REQUIRE(br.status == lp::LpStatus::optimal);
  CHECK(std::abs(br.value - 0.5) <= 0.01);

  const auto objective = payoff::grid_objective(grid, F, V, 1);
  const auto oracle =
      test::lp_support_enumeration_oracle(test::best_response_lp_data(grid, objective, 0.3));
  CHECK(br.value == doctest::Approx(oracle.value).epsilon(1e-9));
}

TEST_CASE("best response against a single interior atom") {
  // Opponent mass at 0.3; on the 11-point grid the optimum mixes 0.4 (beats
  // the atom) with 0, giving value 0.75 = (0.3/0.4) * v(1). Frozen from the
  // support-enumeration oracle.
  SignalingPolicy F(1, {{1.0, {0.3}}}, {});
  const auto V = UtilityFunction::anonymous(1, {0.0, 1.0});
  Grid grid(1, 11);
  const auto br = lp::best_response(F, Prior(0.3), V, grid, 1);
  REQUIRE(br.status == lp::LpStatus::optimal);
  CHECK(br.value == doctest::Approx(0.75).epsilon(1e-9));

  const auto objective = payoff::grid_objective(grid, F, V, 1);
  const auto oracle =
      test::lp_support_enumeration_oracle(test::best_response_lp_data(grid, objective, 0.3));
  CHECK(br.value == doctest::Approx(oracle.value).epsilon(1e-9));
}

TEST_CASE("best responses are Bayes-plausible with small support") {
  test::Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(1, 2);
    Grid grid(n, 21);
    const auto F = test::random_atomic_policy(rng, n, 4);
    const auto V = test::random_utility(rng, n, true);
    const double lambda = rng.uniform(0.1, 0.9);
    const auto br = lp::best_response(F, Prior(lambda), V, grid, 8);
    REQUIRE(br.status == lp::LpStatus::optimal);
    REQUIRE(br.policy.has_value());
    CHECK(br.policy->atoms().size() <= static_cast<std::size_t>(n) + 1);
    for (double r : check_bayes_plausible(*br.policy, Prior(lambda)))
      CHECK(std::abs(r) <= 1e-9);
  }
}

TEST_CASE("best-response value never drops when the grid is refined") {
  test::Rng rng(34);
  const auto V = UtilityFunction::anonymous(2, {0.0, 0.4, 1.0});
  for (int trial = 0; trial < 5; ++trial) {
    const auto F = test::random_atomic_policy(rng, 2, 5);
    const double lambda = rng.uniform(0.2, 0.8);
    double prev = -1.0;
    for (int points : {26, 51, 101}) {
      Grid grid(2, points);
      const auto br = lp::best_response(F, Prior(lambda), V, grid, 1);
      REQUIRE(br.status == lp::LpStatus::optimal);
      CHECK(br.value >= prev - 1e-9);
      prev = br.value;
    }
  }
}

TEST_CASE("certificate evaluates the affine envelope") {
  lp::HyperplaneCertificate cert{{0.5, 0.25}, 0.125};
  const std::vector<double> q{1.0, 1.0};
  CHECK(cert.evaluate(q) == doctest::Approx(0.875));
}
