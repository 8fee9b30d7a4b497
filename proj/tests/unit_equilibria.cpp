#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "persuasion/equilibria.hpp"
#include "persuasion/payoff.hpp"

using namespace persuasion;
using namespace persuasion::equilibria;

namespace {

double sup_mass_quadratic(double mu, double lambda, double t, double r) {
  return mu * mu * (2.0 * t - r) + mu * lambda * (3.0 * r - 2.0 * t) + r * (2.0 - 4.0 * lambda);
}

}  // namespace

TEST_CASE("multi-receiver scalars reduce to the two-receiver formulas") {
  test::Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const double t = rng.uniform(0.1, 1.0);
    const double r = t + rng.uniform(0.01, 1.0);
    const auto sc = multi_scalars(UtilityFunction::anonymous(2, {0.0, t, r}));
    CHECK(std::abs(sc.r - (t - 0.5 * r)) <= 1e-15);
    CHECK(std::abs(sc.s - (0.5 * r - t)) <= 1e-15);
  }
}

TEST_CASE("additive utilities zero both scalars") {
  for (int n : {2, 4, 6, 8}) {
    const auto sc = multi_scalars(UtilityFunction::additive(n, 0.7));
    CHECK(std::abs(sc.r) <= 1e-12);
    CHECK(std::abs(sc.s) <= 1e-12);
  }
}

TEST_CASE("quadratic-growth scalars at n=4") {
  const auto sc = multi_scalars(UtilityFunction::power(4, 2.0));
  CHECK(sc.t_full == doctest::Approx(5.0).epsilon(1e-14));  // (4+24+36+16)/16
  CHECK(sc.r == doctest::Approx(-6.0).epsilon(1e-14));
}

TEST_CASE("signs of R and S track the modularity class") {
  CHECK(multi_scalars(UtilityFunction::power(4, 1.7)).r < 0.0);
  CHECK(multi_scalars(UtilityFunction::power(4, 0.6)).s < 0.0);
}

TEST_CASE("mu_sup closed form") {
  SUBCASE("rho = 1/2 limit is (2 lambda - 1)/lambda, exactly 2/3 at 0.75") {
    CHECK(solve_mu_sup(0.75, 0.5) == 2.0 / 3.0);
  }
  SUBCASE("boundary prior gives zero mass") { CHECK(solve_mu_sup(0.5, 0.3) == 0.0); }
  SUBCASE("agrees with the bisection oracle") {
    const double mu = solve_mu_sup(0.8, 0.25);
    CHECK(mu == doctest::Approx(0.73508893593264846).epsilon(1e-14));
    const double oracle = test::bisect_root(
        [&](double m) { return sup_mass_quadratic(m, 0.8, 0.25, 1.0); }, 0.0, 1.0);
    CHECK(std::abs(mu - oracle) <= 1e-10);
  }
  SUBCASE("quadratic residual below 1e-12 across the sampled region") {
    for (double lambda : {0.51, 0.6, 0.75, 0.9, 0.99}) {
      for (double rho : {0.05, 0.1, 0.3, 0.5}) {
        const double mu = solve_mu_sup(lambda, rho);
        CHECK(mu >= 0.0);
        CHECK(mu <= 1.0);
        CHECK(std::abs(sup_mass_quadratic(mu, lambda, rho, 1.0)) <= 1e-12);
      }
    }
  }
  SUBCASE("nondecreasing in lambda; a more supermodular v carries less mass") {
    for (double rho : {0.1, 0.3, 0.5}) {
      double prev = 0.0;
      for (double lambda = 0.51; lambda < 0.995; lambda += 0.01) {
        const double mu = solve_mu_sup(lambda, rho);
        CHECK(mu >= prev - 1e-12);
        prev = mu;
      }
    }
    for (double lambda : {0.6, 0.75, 0.9}) {
      double prev = 0.0;
      for (double rho = 0.05; rho <= 0.5; rho += 0.05) {
        const double mu = solve_mu_sup(lambda, rho);
        CHECK(mu >= prev - 1e-12);
        prev = mu;
      }
    }
  }
}

TEST_CASE("fully-correlated small-prior equilibrium") {
  const auto V = UtilityFunction::anonymous(2, {0.0, 0.4, 1.0});
  const auto eq = construct_sup_small(Prior(0.3), 2, V);
  REQUIRE(eq.policy.segments().size() == 1);
  CHECK(eq.policy.segments()[0].a == std::vector<double>{0.0, 0.0});
  CHECK(eq.policy.segments()[0].b == std::vector<double>{0.6, 0.6});
  CHECK(is_bayes_plausible(eq.policy, Prior(0.3)));
  CHECK(eq.welfare_closed_form == 1.0);
  CHECK(max_equality_residual(eq.conditions) <= 1e-12);

  const auto v3 = UtilityFunction::anonymous(3, {0.0, 0.2, 0.6, 1.5});
  const auto eq3 = construct_sup_small(Prior(0.5), 3, v3);
  CHECK(eq3.policy.segments()[0].b == std::vector<double>{1.0, 1.0, 1.0});

  CHECK_THROWS_AS(construct_sup_small(Prior(0.51), 2, V), RegionError);
}

TEST_CASE("small-prior welfare matches the closed form within v(n)/K") {
  const auto V = UtilityFunction::anonymous(2, {0.0, 0.4, 1.0});
  const auto eq = construct_sup_small(Prior(0.3), 2, V);
  const double numeric = payoff::welfare(eq.policy, eq.policy, V, 512);
  CHECK(std::abs(numeric - eq.welfare_closed_form) <= V.v(2) / 512.0);
}

TEST_CASE("anti-correlated small-prior equilibrium") {
  const auto V = UtilityFunction::anonymous(2, {0.0, 1.0, 1.001});
  const auto eq = construct_sub_small(Prior(0.1), 2, V);
  REQUIRE(eq.policy.segments().size() == 1);
  CHECK(eq.policy.segments()[0].a == std::vector<double>{0.0, 0.2});
  CHECK(eq.policy.segments()[0].b == std::vector<double>{0.2, 0.0});
  CHECK(max_equality_residual(eq.conditions) <= 1e-12);

  const auto v4 = UtilityFunction::power(4, 0.5);
  const auto eq4 = construct_sub_small(Prior(0.4), 4, v4);
  CHECK(eq4.policy.segments()[0].a == std::vector<double>{0.0, 0.0, 0.8, 0.8});
  CHECK(eq4.policy.segments()[0].b == std::vector<double>{0.8, 0.8, 0.0, 0.0});
  CHECK(eq4.welfare_closed_form == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
  // payoff of any support point is v(n/2)
  const std::vector<double> support_point{0.3, 0.3, 0.5, 0.5};
  CHECK(payoff::expected_payoff_exact(support_point, eq4.policy, v4) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const auto v3 = UtilityFunction::power(3, 0.5);
  const auto eq3 = construct_sub_small(Prior(0.25), 3, v3);
  CHECK(eq3.policy.segments()[0].a == std::vector<double>{0.0, 0.5, 0.5});
  CHECK(eq3.welfare_closed_form == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));
  CHECK(max_equality_residual(eq3.conditions) <= 1e-12);
}

TEST_CASE("large-prior supermodular equilibrium fixture at (0.75, 0.5)") {
  const auto V = UtilityFunction::anonymous(2, {0.0, 0.5, 1.0});
  const auto res = construct_sup_large(Prior(0.75), V);
  CHECK(res.params.mu == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // alpha = (1/2 - 3mu/8) r + mu t / 4 = 1/4 + 1/12 = 1/3, p_hat = (1-mu)r/(2 alpha)
  CHECK(res.params.alpha == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(res.params.p_hat == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(res.eq.welfare_closed_form == doctest::Approx(1.0).epsilon(1e-14));  // rho = 1/2
  CHECK(max_equality_residual(res.eq.conditions) <= 1e-9);
  CHECK(max_inequality_violation(res.eq.conditions) <= 1e-9);
  CHECK(is_bayes_plausible(res.eq.policy, Prior(0.75)));
}

TEST_CASE("large-prior supermodular certificate conditions hold on the 3x3 grid") {
  for (double lambda : {0.6, 0.75, 0.9}) {
    for (double rho : {0.1, 0.3, 0.5}) {
      const auto V = UtilityFunction::anonymous(2, {0.0, rho, 1.0});
      const auto res = construct_sup_large(Prior(lambda), V);
      CAPTURE(lambda);
      CAPTURE(rho);
      CHECK(res.params.mu >= 0.0);
      CHECK(res.params.mu <= 1.0);
      CHECK(max_equality_residual(res.eq.conditions) <= 1e-9);
      CHECK(max_inequality_violation(res.eq.conditions) <= 1e-9);
    }
  }
}

TEST_CASE("large-prior supermodular policy converges to the small-prior one") {
  const auto V = UtilityFunction::anonymous(2, {0.0, 0.3, 1.0});
  const auto res = construct_sup_large(Prior(0.5 + 1e-9), V);
  CHECK(res.params.mu <= 1e-7);
  CHECK(res.params.p_hat == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("large-prior supermodular welfare against the numeric evaluation") {
  const auto V = UtilityFunction::anonymous(2, {0.0, 0.25, 1.0});
  const auto res = construct_sup_large(Prior(0.8), V);
  const double numeric = payoff::welfare(res.eq.policy, res.eq.policy, V, 1024);
  CHECK(std::abs(numeric - res.eq.welfare_closed_form) <= 1.0 / 512.0);

  // at rho = 1/2 the mass correction vanishes and welfare is exactly r
  const auto Vhalf = UtilityFunction::anonymous(2, {0.0, 0.5, 1.0});
  const auto half = construct_sup_large(Prior(0.75), Vhalf);
  CHECK(half.eq.welfare_closed_form == 1.0);
  CHECK(std::abs(payoff::welfare(half.eq.policy, half.eq.policy, Vhalf, 1024) - 1.0) <=
        1.0 / 512.0);
}

TEST_CASE("submodular feasibility interval") {
  SUBCASE("rho = 1/2 pins mu = (2 lambda - 1)/lambda below 2/3") {
    const auto interval = sub_feasible_interval(0.55, 0.5);
    REQUIRE(interval.has_value());
    CHECK(std::abs(interval->lo - 2.0 / 11.0) <= 1e-12);
    CHECK(interval->lo == interval->hi);
    CHECK_FALSE(sub_feasible_interval(0.7, 0.5).has_value());
  }
  SUBCASE("far corner of the parameter square is infeasible") {
    CHECK_FALSE(sub_feasible_interval(0.95, 0.99).has_value());
  }
  SUBCASE("interior fixture (0.55, 0.7), endpoints frozen from the quadratics") {
    const auto interval = sub_feasible_interval(0.55, 0.7);
    REQUIRE(interval.has_value());
    CHECK(interval->lo == doctest::Approx(0.091846867910082494).epsilon(1e-13));
    CHECK(interval->hi == doctest::Approx(0.17994334459480746).epsilon(1e-13));
    CHECK(max_inequality_violation(interval->endpoint_conditions) <= 1e-9);
  }
}

TEST_CASE("large-prior submodular equilibrium at (0.55, 0.5)") {
  const auto V = UtilityFunction::anonymous(2, {0.0, 0.5, 1.0});
  const auto res = construct_sub_large(Prior(0.55), V, {});
  CHECK(std::abs(res.params.mu - 2.0 / 11.0) <= 1e-12);
  CHECK(res.params.alpha == doctest::Approx(0.5 / 1.1).epsilon(1e-12));  // t/(2 lambda)
  CHECK(std::abs(res.params.beta) <= 1e-12);
  CHECK(res.eq.welfare_closed_form ==
        doctest::Approx(1.0 - res.params.mu * res.params.mu * 0.0).epsilon(1e-12));
  CHECK(max_equality_residual(res.eq.conditions) <= 1e-9);
  CHECK(max_inequality_violation(res.eq.conditions) <= 1e-9);
  CHECK(is_bayes_plausible(res.eq.policy, Prior(0.55)));
}

TEST_CASE("large-prior submodular equilibrium on an interior point") {
  const auto V = UtilityFunction::anonymous(2, {0.0, 0.7, 1.0});
  const auto res = construct_sub_large(Prior(0.55), V, {});
  CHECK(max_equality_residual(res.eq.conditions) <= 1e-9);
  CHECK(max_inequality_violation(res.eq.conditions) <= 1e-9);
  CHECK(res.eq.welfare_closed_form ==
        doctest::Approx(1.4 - res.params.mu * res.params.mu * 0.4).epsilon(1e-12));
  // requesting a mass outside the interval is rejected
  CHECK_THROWS_AS(construct_sub_large(Prior(0.55), V, 0.4), RegionError);
}

TEST_CASE("the plain anti-diagonal layout is certifiable only at rho = 1/2") {
  for (double rho : {0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0}) {
    const auto probe = probe_infeasible_sub(0.6, rho);
    CHECK_FALSE(probe.certifiable);
    CHECK(probe.violated_condition == "2t <= r");
  }
  const auto ok = probe_infeasible_sub(0.6, 0.5);
  REQUIRE(ok.certifiable);
  CHECK(ok.mu == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(ok.p_hat == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(ok.beta == 0.0);

  const auto boundary = probe_infeasible_sub(0.5 + 1e-9, 0.5);
  REQUIRE(boundary.certifiable);
  CHECK(boundary.mu <= 5e-9);
}

TEST_CASE("multi-receiver supermodular constructor reduces at n=2") {
  for (double lambda : {0.6, 0.8}) {
    for (double rho : {0.2, 0.5}) {
      const auto V = UtilityFunction::anonymous(2, {0.0, rho, 1.0});
      const auto two = construct_sup_large(Prior(lambda), V);
      const auto multi = construct_sup_large_multi(Prior(lambda), V);
      CHECK(std::abs(two.params.mu - multi.params.mu) <= 1e-12);
      CHECK(std::abs(two.params.alpha - multi.params.alpha) <= 1e-12);
      CHECK(std::abs(two.params.p_hat - multi.params.p_hat) <= 1e-12);
      CHECK(std::abs(two.eq.welfare_closed_form - multi.eq.welfare_closed_form) <= 1e-12);
    }
  }
}

TEST_CASE("multi-receiver supermodular fixture n=4, v=k^2, lambda=0.7") {
  const auto V = UtilityFunction::power(4, 2.0);
  const auto res = construct_sup_large_multi(Prior(0.7), V);
  CHECK(res.params.mu == doctest::Approx(0.52157367453157066).epsilon(1e-13));
  const double oracle = test::bisect_root(
      [&](double mu) {
        return mu * mu * (2.0 * 5.0 - 16.0) + mu * 2.0 * 0.7 * (16.0 - 5.0) +
               16.0 * (1.0 - 2.0 * 0.7);
      },
      0.0, 1.0);
  CHECK(std::abs(res.params.mu - oracle) <= 1e-10);
  CHECK(max_equality_residual(res.eq.conditions) <= 1e-9);
  CHECK(max_inequality_violation(res.eq.conditions) <= 1e-9);
}

TEST_CASE("multi-receiver submodular interval reduces at n=2") {
  const auto V = UtilityFunction::anonymous(2, {0.0, 0.65, 1.0});
  const auto two = sub_feasible_interval(0.55, 0.65);
  const auto multi = sub_feasible_interval_multi(Prior(0.55), V);
  REQUIRE(two.has_value());
  REQUIRE(multi.has_value());
  CHECK(std::abs(two->lo - multi->lo) <= 1e-12);
  CHECK(std::abs(two->hi - multi->hi) <= 1e-12);

  const auto a = construct_sub_large(Prior(0.55), V, {});
  const auto b = construct_sub_large_multi_even(Prior(0.55), V, {});
  CHECK(std::abs(a.params.mu - b.params.mu) <= 1e-12);
  CHECK(std::abs(a.params.alpha - b.params.alpha) <= 1e-12);
  CHECK(std::abs(a.params.beta - b.params.beta) <= 1e-12);
  CHECK(std::abs(a.params.ell - b.params.ell) <= 1e-12);
  CHECK(std::abs(a.params.p_hat - b.params.p_hat) <= 1e-12);
}

TEST_CASE("multi-receiver submodular fixture n=4, v=sqrt(k), lambda=0.55") {
  const auto V = UtilityFunction::power(4, 0.5);
  const auto interval = sub_feasible_interval_multi(Prior(0.55), V);
  REQUIRE(interval.has_value());
  CHECK(interval->lo == doctest::Approx(0.10998630175823805).epsilon(1e-10));
  CHECK(interval->hi == doctest::Approx(0.21023173185596788).epsilon(1e-10));

  // independent route: scan the same condition set at 1e-4 and bisect
  const auto res = construct_sub_large_multi_even(Prior(0.55), V, {});
  CHECK(max_equality_residual(res.eq.conditions) <= 1e-9);
  CHECK(max_inequality_violation(res.eq.conditions) <= 1e-9);
  CHECK(is_bayes_plausible(res.eq.policy, Prior(0.55)));
  CHECK(res.eq.welfare_closed_form ==
        doctest::Approx(2.0 * (std::sqrt(2.0) +
                               interval->lo * interval->lo * multi_scalars(V).s))
            .epsilon(1e-12));
}

TEST_CASE("additive utilities admit exactly the single-receiver mass") {
  for (int n : {2, 4, 6, 8}) {
    const auto V = UtilityFunction::additive(n);
    const auto interval = sub_feasible_interval_multi(Prior(0.6), V);
    REQUIRE(interval.has_value());
    CHECK(std::abs(interval->lo - (2.0 * 0.6 - 1.0) / 0.6) <= 1e-12);
    CHECK(interval->lo == interval->hi);
  }
}

TEST_CASE("odd-receiver submodular system solves to tiny residuals") {
  const auto V = UtilityFunction::power(3, 0.5);
  const auto res = construct_sub_large_multi_odd(Prior(0.55), V, 0.15);
  REQUIRE(res.converged);
  CHECK(res.residual_norm <= 1e-8);
  REQUIRE(res.policy.has_value());
  CHECK(is_bayes_plausible(*res.policy, Prior(0.55)));
  // blocks share their coordinates by construction
  for (const Segment& s : res.policy->segments()) {
    CHECK(s.a[0] == s.a[1]);
    CHECK(s.b[0] == s.b[1]);
  }
  // the solved envelope matches the exact payoff at the support corners
  const std::vector<double> corner{res.params.ell1, res.params.ell1, 1.0};
  const double pi = payoff::expected_payoff_exact(corner, *res.policy, V);
  CHECK(pi == doctest::Approx(res.certificate.evaluate(corner)).epsilon(1e-8));
}

TEST_CASE("independent additive policy marginals") {
  const auto V2 = UtilityFunction::additive(2);
  const auto low = construct_independent_additive(Prior(0.3), 2, V2);
  REQUIRE(low.marginal.segments().size() == 1);
  CHECK(low.marginal.segments()[0].b == std::vector<double>{0.6});
  CHECK(low.marginal.atoms().empty());

  const auto high = construct_independent_additive(Prior(0.75), 2, V2);
  REQUIRE(high.marginal.atoms().size() == 1);
  CHECK(high.marginal.atoms()[0].weight == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(high.marginal.segments()[0].b == std::vector<double>{0.5});
  CHECK(high.marginal.segments()[0].weight == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const auto joint = high.joint_discretized(16);
  CHECK(is_bayes_plausible(joint, Prior(0.75)));
  CHECK(joint.atoms().size() == 17 * 17);

  const auto Vsup = UtilityFunction::anonymous(2, {0.0, 0.3, 1.0});
  CHECK_THROWS_AS(construct_independent_additive(Prior(0.3), 2, Vsup), std::invalid_argument);
}

TEST_CASE("worked example fixtures") {
  SUBCASE("ex31 anti-diagonal family") {
    const auto fx = example_fixture("ex31", {.c = 0.5});
    REQUIRE(fx.policy.segments().size() == 1);
    CHECK(fx.policy.segments()[0].a == std::vector<double>{0.0, 1.0});
    CHECK(fx.policy.segments()[0].b == std::vector<double>{1.0, 0.0});
    CHECK(is_bayes_plausible(fx.policy, Prior(fx.lambda)));
    CHECK_FALSE(fx.utility.is_strictly_monotone());

    const auto narrow = example_fixture("ex31", {.c = 0.1});
    CHECK(narrow.policy.segments()[0].a == std::vector<double>{0.4, 0.6});
    // payoff is the indicator of q1 + q2 >= 2 lambda
    const std::vector<double> above{0.8, 0.4};
    const std::vector<double> below{0.3, 0.4};
    CHECK(payoff::expected_payoff_exact(above, narrow.policy, narrow.utility) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(payoff::expected_payoff_exact(below, narrow.policy, narrow.utility) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("ex42 supermodular pair") {
    const auto a = example_fixture("ex42a", {});
    CHECK(a.policy.segments()[0].b == std::vector<double>{0.8, 0.8});
    CHECK(is_bayes_plausible(a.policy, Prior(0.4)));

    const auto b = example_fixture("ex42b", {});
    REQUIRE(b.policy.segments().size() == 2);
    CHECK(b.policy.segments()[0].b[0] == 3.0 / 10.0);
    CHECK(b.policy.segments()[0].b[1] == (227.0 / 237.0) * (3.0 / 10.0));
    CHECK(b.policy.segments()[1].b[0] == 79.0 / 100.0);
    CHECK(b.policy.segments()[0].weight == doctest::Approx(29.0 / 79.0).epsilon(1e-14));
    CHECK(b.policy.segments()[1].weight == doctest::Approx(50.0 / 79.0).epsilon(1e-14));
    CHECK(is_bayes_plausible(b.policy, Prior(0.4)));
  }
  SUBCASE("ex43 submodular pair") {
    const auto a = example_fixture("ex43a", {});
    CHECK(a.policy.segments()[0].a == std::vector<double>{0.0, 0.2});
    CHECK(is_bayes_plausible(a.policy, Prior(0.1)));

    for (int pieces : {1, 7, 64}) {
      const auto b = example_fixture("ex43b", {.pieces = pieces});
      CHECK(is_bayes_plausible(b.policy, Prior(0.1)));
      CHECK(b.policy.segments().size() == static_cast<std::size_t>(pieces));
    }
  }
  SUBCASE("fixture utilities are valid model utilities") {
    for (const char* id : {"ex31", "ex42a", "ex42b", "ex43a", "ex43b"}) {
      const auto fx = example_fixture(id, {});
      CHECK(validate_utility(fx.utility).valid());
    }
  }
  SUBCASE("unknown ids are rejected") {
    CHECK_THROWS_AS(example_fixture("ex99", {}), std::invalid_argument);
  }
}
