#include "persuasion/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "persuasion/payoff.hpp"

namespace persuasion::equilibria {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double binomial(int n, int k) {
  double acc = 1.0;
  for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
  return acc;
}

// Smaller real root of a x^2 + b x + c = 0 (the linear root when a ~ 0),
// computed without cancellation.
std::optional<double> smaller_root(double a, double b, double c) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1.0});
  if (std::abs(a) <= 1e-14 * scale) {
    if (b == 0.0) return std::nullopt;
    return -c / b;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  if (a > 0.0) return b >= 0.0 ? (-b - sq) / (2.0 * a) : (2.0 * c) / (-b + sq);
  return b >= 0.0 ? (2.0 * c) / (-b - sq) : (-b + sq) / (2.0 * a);
}

std::vector<double> uniform_point(int n, double x) { return std::vector<double>(n, x); }

std::vector<double> block_point(int n, int head, double x_head, double x_tail) {
  std::vector<double> q(n, x_tail);
  for (int j = 0; j < head; ++j) q[j] = x_head;
  return q;
}

void append_bayes_conditions(std::vector<NamedResidual>& out, const SignalingPolicy& g,
                             const Prior& prior) {
  const auto residuals = check_bayes_plausible(g, prior);
  for (std::size_t j = 0; j < residuals.size(); ++j)
    out.push_back({"bayes[" + std::to_string(j) + "]", residuals[j], true});
}

// Envelope residual Pi(q) - (alpha.q + beta) of the closed-form certificate,
// evaluated with the exact segment payoff.
NamedResidual envelope_residual(const std::string& name, const std::vector<double>& q,
                                const SignalingPolicy& g, const UtilityFunction& V,
                                const lp::HyperplaneCertificate& cert, bool equality) {
  const double pi = payoff::expected_payoff_exact(q, g, V);
  return {name, pi - cert.evaluate(q), equality};
}

bool anonymous_in(const UtilityFunction& V, std::initializer_list<Modularity> allowed) {
  if (!V.is_anonymous()) return false;
  const Modularity m = V.modularity();
  for (Modularity a : allowed)
    if (a == m) return true;
  return false;
}

}  // namespace

double max_equality_residual(const std::vector<NamedResidual>& conditions) {
  double worst = 0.0;
  for (const NamedResidual& c : conditions)
    if (c.equality) worst = std::max(worst, std::abs(c.value));
  return worst;
}

double max_inequality_violation(const std::vector<NamedResidual>& conditions) {
  double worst = 0.0;
  for (const NamedResidual& c : conditions)
    if (!c.equality) worst = std::max(worst, c.value);
  return worst;
}

MultiReceiverScalars multi_scalars(const UtilityFunction& V) {
  require(V.is_anonymous(), "multi_scalars needs an anonymous utility");
  MultiReceiverScalars sc;
  const int n = V.n();
  sc.n = n;
  for (int j = 1; j <= n; ++j) sc.t_full += binomial(n, j) * std::ldexp(1.0, -n) * V.v(j);
  sc.r = 2.0 * sc.t_full - V.v(n);
  if (n % 2 == 0) {
    const int m = n / 2;
    for (int j = 1; j <= m; ++j) {
      const double w = binomial(m, j) * std::ldexp(1.0, -m);
      sc.t_half += w * V.v(j);
      sc.t_bar += w * V.v(j + m);
    }
    sc.s = sc.t_half + sc.t_bar + V.v(m) * (std::ldexp(1.0, -m) - 2.0);
    sc.has_half = true;
  }
  return sc;
}

// --- small prior -------------------------------------------------------------

ConstructedEquilibrium construct_sup_small(const Prior& prior, int n, const UtilityFunction& V) {
  const double lambda = prior.lambda();
  if (lambda > 0.5) throw RegionError("the fully-correlated equilibrium needs lambda <= 1/2");
  require(V.n() == n, "utility dimension mismatch");
  require(anonymous_in(V, {Modularity::strictly_supermodular}),
          "needs an anonymous strictly supermodular utility");

  std::vector<Segment> segments{{1.0, uniform_point(n, 0.0), uniform_point(n, 2.0 * lambda)}};
  SignalingPolicy policy(n, {}, std::move(segments));

  lp::HyperplaneCertificate cert;
  cert.alpha.assign(n, V.v(n) / (2.0 * n * lambda));
  cert.beta = 0.0;

  ConstructedEquilibrium out{std::move(policy), std::move(cert), V.v(n), {}};
  append_bayes_conditions(out.conditions, out.policy, prior);
  out.conditions.push_back(envelope_residual("support@0", uniform_point(n, 0.0), out.policy, V,
                                             out.certificate, true));
  out.conditions.push_back(envelope_residual("support@mid", uniform_point(n, lambda), out.policy,
                                             V, out.certificate, true));
  out.conditions.push_back(envelope_residual("support@top", uniform_point(n, 2.0 * lambda),
                                             out.policy, V, out.certificate, true));
  return out;
}

ConstructedEquilibrium construct_sub_small(const Prior& prior, int n, const UtilityFunction& V) {
  const double lambda = prior.lambda();
  if (lambda > 0.5) throw RegionError("the anti-correlated equilibrium needs lambda <= 1/2");
  require(n >= 2, "the split-half construction needs n >= 2");
  require(V.n() == n, "utility dimension mismatch");
  require(anonymous_in(V, {Modularity::strictly_submodular}),
          "needs an anonymous strictly submodular utility");

  const int head = (n % 2 == 0) ? n / 2 : (n - 1) / 2;  // ascending block
  std::vector<Segment> segments{{1.0, block_point(n, head, 0.0, 2.0 * lambda),
                                 block_point(n, head, 2.0 * lambda, 0.0)}};
  SignalingPolicy policy(n, {}, std::move(segments));

  lp::HyperplaneCertificate cert;
  double welfare = 0.0;
  if (n % 2 == 0) {
    cert.alpha.assign(n, V.v(n / 2) / (n * lambda));
    welfare = 2.0 * V.v(n / 2);
  } else {
    cert.alpha.assign(n, V.v((n + 1) / 2) / (lambda * (n + 1)));
    for (int j = 0; j < head; ++j) cert.alpha[j] = V.v((n - 1) / 2) / (lambda * (n - 1));
    welfare = V.v((n - 1) / 2) + V.v((n + 1) / 2);
  }
  cert.beta = 0.0;

  ConstructedEquilibrium out{std::move(policy), std::move(cert), welfare, {}};
  append_bayes_conditions(out.conditions, out.policy, prior);
  out.conditions.push_back(envelope_residual("support@a", block_point(n, head, 0.0, 2.0 * lambda),
                                             out.policy, V, out.certificate, true));
  out.conditions.push_back(envelope_residual("support@mid", uniform_point(n, lambda), out.policy,
                                             V, out.certificate, true));
  out.conditions.push_back(envelope_residual("support@b", block_point(n, head, 2.0 * lambda, 0.0),
                                             out.policy, V, out.certificate, true));
  return out;
}

// --- supermodular, large prior ----------------------------------------------

double solve_mu_sup(double lambda, double rho) {
  require(lambda >= 0.5 && lambda < 1.0, "needs lambda in [1/2, 1)");
  require(rho > 0.0 && rho <= 0.5, "needs rho in (0, 1/2]");
  const double b = lambda * (3.0 - 2.0 * rho);
  const double disc = b * b - 4.0 * (2.0 * rho - 1.0) * (2.0 - 4.0 * lambda);
  if (disc < 0.0) throw std::logic_error("mass quadratic has no real root");
  return 2.0 * (4.0 * lambda - 2.0) / (b + std::sqrt(disc));
}

namespace {

SupLargeResult build_sup_large(const Prior& prior, const UtilityFunction& V, double mu,
                               double alpha, double p_hat, bool two_receiver_conditions) {
  const int n = V.n();
  const double lambda = prior.lambda();

  std::vector<Atom> atoms;
  std::vector<Segment> segments;
  segments.push_back({1.0 - mu, uniform_point(n, 0.0), uniform_point(n, p_hat)});
  if (mu >= kWeightTol) atoms.push_back({mu, uniform_point(n, 1.0)});
  SignalingPolicy policy(n, std::move(atoms), std::move(segments));

  lp::HyperplaneCertificate cert;
  cert.alpha.assign(n, alpha);
  cert.beta = 0.0;

  SupLargeResult out{{std::move(policy), std::move(cert), 0.0, {}}, {mu, alpha, p_hat}};
  ConstructedEquilibrium& eq = out.eq;
  append_bayes_conditions(eq.conditions, eq.policy, prior);
  eq.conditions.push_back({"mass@bayes", 0.5 * p_hat * (1.0 - mu) + mu - lambda, true});

  if (two_receiver_conditions) {
    const double t = V.v(1), r = V.v(2);
    eq.conditions.push_back({"quadratic",
                             mu * mu * (2.0 * t - r) + mu * lambda * (3.0 * r - 2.0 * t) +
                                 r * (2.0 - 4.0 * lambda),
                             true});
    eq.conditions.push_back({"bind@p_hat", (1.0 - mu) * r - (2.0 * alpha * p_hat), true});
    eq.conditions.push_back(
        {"bind@ones", 0.5 * mu * t + (1.0 - 0.75 * mu) * r - 2.0 * alpha, true});
    // dominance along the p_hat edge and the q1 = 1 edge, linear in q2, so
    // endpoint checks suffice
    eq.conditions.push_back({"edge@p_hat,0", (1.0 - mu) * t - alpha * p_hat, false});
    eq.conditions.push_back(
        {"edge@p_hat,p_hat", (1.0 - mu) * r - alpha * (2.0 * p_hat), false});
    eq.conditions.push_back({"edge@1,0", (1.0 - 0.5 * mu) * t - alpha, false});
    eq.conditions.push_back(
        {"edge@1,p_hat", (1.0 - mu) * r + 0.5 * mu * t - alpha * (1.0 + p_hat), false});
  } else {
    const MultiReceiverScalars sc = multi_scalars(V);
    eq.conditions.push_back({"quadratic",
                             mu * mu * (2.0 * sc.t_full - V.v(n)) +
                                 mu * 2.0 * lambda * (V.v(n) - sc.t_full) +
                                 V.v(n) * (1.0 - 2.0 * lambda),
                             true});
    eq.conditions.push_back({"bind@p_hat", (1.0 - mu) * V.v(n) - n * alpha * p_hat, true});
    eq.conditions.push_back(
        {"bind@ones", mu * sc.t_full + (1.0 - mu) * V.v(n) - n * alpha, true});
  }

  // independent spot checks of the hyperplane against the exact payoff
  eq.conditions.push_back(envelope_residual("support@diag_mid", uniform_point(n, 0.5 * p_hat),
                                            eq.policy, V, eq.certificate, true));
  eq.conditions.push_back(envelope_residual("env@ones", uniform_point(n, 1.0), eq.policy, V,
                                            eq.certificate, true));
  std::vector<double> corner = uniform_point(n, p_hat);
  corner[0] = 1.0;
  eq.conditions.push_back(
      envelope_residual("env@1,p_hat", corner, eq.policy, V, eq.certificate, false));
  return out;
}

}  // namespace

SupLargeResult construct_sup_large(const Prior& prior, const UtilityFunction& V) {
  const double lambda = prior.lambda();
  if (lambda <= 0.5) throw RegionError("the large-prior family needs lambda > 1/2");
  require(V.n() == 2, "two-receiver constructor");
  // rho = 1/2 (additive) is the boundary of the supermodular family
  require(anonymous_in(V, {Modularity::strictly_supermodular, Modularity::additive}),
          "needs an anonymous supermodular utility");

  const double t = V.v(1), r = V.v(2);
  const double rho = t / r;
  const double mu = solve_mu_sup(lambda, rho);
  const double alpha = (0.5 - 0.375 * mu) * r + 0.25 * mu * t;
  const double p_hat = (1.0 - mu) * r / (2.0 * alpha);

  SupLargeResult out = build_sup_large(prior, V, mu, alpha, p_hat, true);
  out.eq.welfare_closed_form = r * (1.0 - mu * mu * (0.5 - rho));
  return out;
}

SupLargeResult construct_sup_large_multi(const Prior& prior, const UtilityFunction& V) {
  const double lambda = prior.lambda();
  if (lambda <= 0.5) throw RegionError("the large-prior family needs lambda > 1/2");
  const int n = V.n();
  require(n >= 2, "needs n >= 2");
  require(anonymous_in(V, {Modularity::strictly_supermodular, Modularity::additive}),
          "needs an anonymous supermodular utility");

  const MultiReceiverScalars sc = multi_scalars(V);
  const double vn = V.v(n);
  const double a = 2.0 * sc.t_full - vn;  // = R(n) <= 0
  const double b = 2.0 * lambda * (vn - sc.t_full);
  const double c = vn * (1.0 - 2.0 * lambda);
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) throw std::logic_error("multi-receiver mass quadratic has no real root");
  const double mu = -2.0 * c / (b + std::sqrt(disc));
  require(mu >= 0.0 && mu <= 1.0, "mass outside [0,1]");

  const double alpha = (mu * sc.t_full + (1.0 - mu) * vn) / n;
  const double p_hat = (1.0 - mu) * vn / (n * alpha);

  SupLargeResult out = build_sup_large(prior, V, mu, alpha, p_hat, false);
  out.eq.welfare_closed_form = vn + mu * mu * sc.r;
  return out;
}

// --- submodular, large prior -------------------------------------------------

namespace {

// The four reduced feasibility conditions of the two-receiver submodular
// family, in residual form (<= 0 when satisfied). r and t are v(2) and v(1).
std::vector<NamedResidual> sub2_conditions(double mu, double lambda, double t, double r) {
  const double a = 2.0 * t - r;
  return {
      {"p_hat<=1", mu * a - (2.0 * lambda * t - 2.0 * r * (2.0 * lambda - 1.0)), false},
      {"beta>=0", -(mu * mu * a - mu * 2.0 * t * lambda + t * (4.0 * lambda - 2.0)), false},
      {"env@ones",
       mu * mu * a - mu * (2.0 * t * (1.0 - lambda) + (4.0 * lambda - 2.0) * (r - t)) +
           (r - t) * (4.0 * lambda - 2.0),
       false},
      {"env@ell",
       -(mu * mu * a - mu * ((4.0 * lambda - 2.0) * (2.5 * t - r) + t) +
         t * (4.0 * lambda - 2.0)),
       false},
      {"alpha>=0", mu * a - t, false},
  };
}

constexpr double kConditionTol = 1e-9;

}  // namespace

std::optional<MassInterval> sub_feasible_interval(double lambda, double rho) {
  require(lambda > 0.5 && lambda < 1.0, "needs lambda in (1/2, 1)");
  require(rho >= 0.5 && rho <= 1.0, "needs rho in [1/2, 1]");
  const double t = rho, r = 1.0;
  const double a = 2.0 * t - r;

  MassInterval interval;
  if (std::abs(a) <= 1e-14) {
    // rho = 1/2: the conditions pin mu = (2*lambda-1)/lambda, feasible only
    // for lambda < 2/3
    if (!(lambda < 2.0 / 3.0)) return std::nullopt;
    interval.lo = interval.hi = (2.0 * lambda - 1.0) / lambda;
  } else {
    const auto mu_lb = smaller_root(
        a, -(2.0 * t * (1.0 - lambda) + (4.0 * lambda - 2.0) * (r - t)),
        (r - t) * (4.0 * lambda - 2.0));
    const auto mu_ub = smaller_root(a, -((4.0 * lambda - 2.0) * (2.5 * t - r) + t),
                                    t * (4.0 * lambda - 2.0));
    if (!mu_lb || !mu_ub) return std::nullopt;
    // the mass itself must lie in (0, 1/2]
    interval.lo = std::max(*mu_lb, 1e-12);
    interval.hi = std::min(*mu_ub, 0.5);
    if (interval.lo > interval.hi) return std::nullopt;
  }

  for (double mu : {interval.lo, interval.hi}) {
    for (NamedResidual cond : sub2_conditions(mu, lambda, t, r)) {
      cond.name += mu == interval.lo ? "@lo" : "@hi";
      interval.endpoint_conditions.push_back(cond);
    }
  }
  if (max_inequality_violation(interval.endpoint_conditions) > kConditionTol)
    return std::nullopt;
  return interval;
}

namespace {

struct SubParams {
  double alpha, beta, ell, p_hat;
};

SubParams sub2_params(double mu, double lambda, double t, double r) {
  SubParams p;
  p.alpha = (t * mu - mu * mu * (2.0 * t - r)) / (4.0 * lambda - 2.0);
  p.beta = (1.0 - 0.5 * mu) * t - p.alpha;
  p.ell = mu * r / (2.0 * p.alpha);
  p.p_hat = (2.0 * p.alpha - mu * (r - t)) / (2.0 * p.alpha);
  return p;
}

// Split-half policy of the large-prior submodular family for even n (n = 2
// included): axis pieces pair coordinates on [0, ell] with the complementary
// block pinned at posterior 1.
SignalingPolicy sub_split_policy(int n, double mu, double ell, double p_hat) {
  const int m = n / 2;
  std::vector<Segment> segments;
  segments.push_back({mu, block_point(n, m, 0.0, 1.0), block_point(n, m, ell, 1.0)});
  if (1.0 - 2.0 * mu >= kWeightTol)
    segments.push_back(
        {1.0 - 2.0 * mu, block_point(n, m, ell, p_hat), block_point(n, m, p_hat, ell)});
  segments.push_back({mu, block_point(n, m, 1.0, 0.0), block_point(n, m, 1.0, ell)});
  return SignalingPolicy(n, {}, std::move(segments));
}

}  // namespace

SubLargeResult construct_sub_large(const Prior& prior, const UtilityFunction& V,
                                   std::optional<double> mu_opt) {
  const double lambda = prior.lambda();
  if (lambda <= 0.5) throw RegionError("the large-prior family needs lambda > 1/2");
  require(V.n() == 2, "two-receiver constructor");
  require(anonymous_in(V, {Modularity::strictly_submodular, Modularity::additive}),
          "needs an anonymous submodular utility");

  const double t = V.v(1), r = V.v(2);
  const auto interval = sub_feasible_interval(lambda, t / r);
  if (!interval)
    throw RegionError("no admissible mass: (lambda, rho) outside the feasibility region");
  const double mu = mu_opt.value_or(interval->lo);
  if (mu < interval->lo - 1e-12 || mu > interval->hi + 1e-12)
    throw RegionError("mu outside the admissible interval");

  const SubParams p = sub2_params(mu, lambda, t, r);
  SignalingPolicy policy = sub_split_policy(2, mu, p.ell, p.p_hat);

  lp::HyperplaneCertificate cert;
  cert.alpha.assign(2, p.alpha);
  cert.beta = p.beta;

  SubLargeResult out{{std::move(policy), std::move(cert), 2.0 * t - mu * mu * (2.0 * t - r), {}},
                     {mu, p.alpha, p.beta, p.ell, p.p_hat}};
  ConstructedEquilibrium& eq = out.eq;
  append_bayes_conditions(eq.conditions, eq.policy, prior);
  for (const NamedResidual& cond : sub2_conditions(mu, lambda, t, r))
    eq.conditions.push_back(cond);
  for (const auto& [name, point] : std::initializer_list<std::pair<const char*, std::vector<double>>>{
           {"support@1,0", {1.0, 0.0}},
           {"support@1,ell", {1.0, p.ell}},
           {"support@p_hat,ell", {p.p_hat, p.ell}},
           {"support@ell,p_hat", {p.ell, p.p_hat}},
           {"support@0,1", {0.0, 1.0}},
           {"support@mid", {0.5 * (p.ell + p.p_hat), 0.5 * (p.ell + p.p_hat)}}})
    eq.conditions.push_back(envelope_residual(name, point, eq.policy, V, eq.certificate, true));
  eq.conditions.push_back(
      envelope_residual("exact_env@ones", {1.0, 1.0}, eq.policy, V, eq.certificate, false));
  eq.conditions.push_back(
      envelope_residual("exact_env@ell", {p.ell, p.ell}, eq.policy, V, eq.certificate, false));
  return out;
}

InfeasibleSubProbe probe_infeasible_sub(double lambda, double rho) {
  require(lambda > 0.5 && lambda < 1.0, "needs lambda in (1/2, 1)");
  require(rho >= 0.5 && rho <= 1.0, "needs rho in [1/2, 1]");
  InfeasibleSubProbe probe;
  if (std::abs(2.0 * rho - 1.0) > 1e-12) {
    // the three binding conditions force 2 mu t <= mu r, impossible for a
    // strictly submodular utility with positive mass
    probe.certifiable = false;
    probe.violated_condition = "2t <= r";
    return probe;
  }
  probe.certifiable = true;
  probe.mu = (2.0 * lambda - 1.0) / lambda;
  probe.alpha = rho / (2.0 * lambda);  // t/(2 lambda) with r = 1
  probe.beta = 0.0;
  probe.p_hat = 2.0 * (1.0 - lambda);
  return probe;
}

// --- submodular multi-receiver (even n) -------------------------------------

namespace {

struct SubMultiContext {
  int n = 0, m = 0;
  double lambda = 0.0, vh = 0.0, vn = 0.0, pow2m = 0.0;
  MultiReceiverScalars sc;

  SubParams params(double mu) const {
    // alpha = mu * g / ((2 lambda - 1) m) with g = (vh - T) + mu S; ell and
    // p_hat are written with the mu/alpha ratio cancelled so that mu -> 0 is
    // regular (needed when interpolating the conditions in mu).
    const double g = (vh - sc.t_half) + mu * sc.s;
    SubParams p;
    p.alpha = mu * g / ((2.0 * lambda - 1.0) * m);
    p.beta = mu * sc.t_half + (1.0 - mu) * vh - p.alpha * m;
    p.ell = (2.0 * lambda - 1.0) * (vh / pow2m + sc.t_bar - sc.t_half) / g;
    p.p_hat = 1.0 + (2.0 * lambda - 1.0) * (vh - sc.t_half) / g - p.ell;
    return p;
  }

  // All feasibility conditions in residual form (<= 0 feasible).
  std::vector<NamedResidual> conditions(double mu) const {
    const SubParams p = params(mu);
    std::vector<NamedResidual> out;
    out.push_back({"alpha>=0", (sc.t_half - vh) - mu * sc.s, false});
    out.push_back({"beta>=0",
                   mu * mu * sc.s + mu * 2.0 * lambda * (vh - sc.t_half) -
                       (2.0 * lambda - 1.0) * vh,
                   false});
    out.push_back({"ell<1",
                   (sc.t_half - vh) +
                       (2.0 * lambda - 1.0) * (sc.t_bar - sc.t_half + vh / pow2m) - mu * sc.s,
                   false});
    out.push_back({"p_hat<=1",
                   (sc.t_half - vh) +
                       (2.0 * lambda - 1.0) *
                           (2.0 * sc.t_bar - sc.t_half + vh * (2.0 - pow2m) / pow2m) -
                       mu * sc.s,
                   false});
    out.push_back({"ell<p_hat", p.ell - p.p_hat, false});
    out.push_back({"env@ones",
                   (1.0 - 2.0 * mu) * vn + 2.0 * mu * (sc.t_bar + vh / pow2m) -
                       (n * p.alpha + p.beta),
                   false});
    out.push_back({"env@ell", 2.0 * mu * vh - (n * p.alpha * p.ell + p.beta), false});
    return out;
  }

  double margin(double mu) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const NamedResidual& c : conditions(mu)) worst = std::max(worst, c.value);
    return worst;  // feasible iff <= 0
  }
};

SubMultiContext make_sub_multi_context(const Prior& prior, const UtilityFunction& V) {
  require(V.n() >= 2 && V.n() % 2 == 0, "even receiver count required");
  require(anonymous_in(V, {Modularity::strictly_submodular, Modularity::additive}),
          "needs an anonymous submodular utility");
  if (prior.lambda() <= 0.5) throw RegionError("the large-prior family needs lambda > 1/2");
  SubMultiContext ctx;
  ctx.n = V.n();
  ctx.m = ctx.n / 2;
  ctx.lambda = prior.lambda();
  ctx.vh = V.v(ctx.m);
  ctx.vn = V.v(ctx.n);
  ctx.pow2m = std::ldexp(1.0, ctx.m);
  ctx.sc = multi_scalars(V);
  return ctx;
}

// Quadratic coefficients through exact interpolation at mu = 0, 1/4, 1/2.
struct Quad {
  double a, b, c;
};

Quad fit_quadratic(const std::function<double(double)>& f) {
  const double f0 = f(0.0), f1 = f(0.25), f2 = f(0.5);
  Quad q;
  q.c = f0;
  q.a = (f2 - 2.0 * f1 + f0) / (2.0 * 0.25 * 0.25);
  q.b = (f1 - f0) / 0.25 - q.a * 0.25;
  return q;
}

void push_roots(const Quad& q, std::vector<double>& out) {
  if (!std::isfinite(q.a) || !std::isfinite(q.b) || !std::isfinite(q.c)) return;
  const double scale = std::max({std::abs(q.a), std::abs(q.b), std::abs(q.c), 1.0});
  if (std::abs(q.a) <= 1e-13 * scale) {
    if (q.b != 0.0) out.push_back(-q.c / q.b);
    return;
  }
  const double disc = q.b * q.b - 4.0 * q.a * q.c;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  const double r1 = q.b >= 0.0 ? (-q.b - sq) / (2.0 * q.a) : (2.0 * q.c) / (-q.b + sq);
  const double r2 = q.b >= 0.0 ? (2.0 * q.c) / (-q.b - sq) : (-q.b + sq) / (2.0 * q.a);
  if (std::isfinite(r1)) out.push_back(r1);
  if (std::isfinite(r2)) out.push_back(r2);
}

// Bisects the margin sign change between an infeasible and a feasible point.
double refine_boundary(const SubMultiContext& ctx, double infeasible_at, double feasible_at) {
  for (int i = 0; i < 120; ++i) {
    const double mid = 0.5 * (infeasible_at + feasible_at);
    if (mid == infeasible_at || mid == feasible_at) break;
    (ctx.margin(mid) > 0.0 ? infeasible_at : feasible_at) = mid;
  }
  return feasible_at;
}

}  // namespace

std::optional<MassInterval> sub_feasible_interval_multi(const Prior& prior,
                                                        const UtilityFunction& V) {
  const SubMultiContext ctx = make_sub_multi_context(prior, V);
  const double scale = std::max(1.0, ctx.vn);
  const double lambda = ctx.lambda;

  MassInterval interval;
  if (std::abs(ctx.sc.s) <= 1e-13 * scale) {
    // additive boundary: all conditions pin mu = (2 lambda - 1)/lambda
    const double mu = (2.0 * lambda - 1.0) / lambda;
    if (mu > 0.5 + 1e-15 || ctx.margin(mu) > kConditionTol * scale) return std::nullopt;
    interval.lo = interval.hi = mu;
  } else {
    // boundary candidates: roots of the condition margins (all polynomial in
    // mu except the ell<p_hat shape bound, whose fitted roots are only
    // separators), plus a coarse sign scan so no feasible stretch wider than
    // the scan step can hide between candidates
    std::vector<double> candidates{1e-9, 0.5};
    for (int which = 0; which < 7; ++which) {
      push_roots(fit_quadratic([&](double mu) { return ctx.conditions(mu)[which].value; }),
                 candidates);
    }
    for (int i = 1; i < 50; ++i) candidates.push_back(0.01 * i);
    std::vector<double> pts;
    for (double c : candidates)
      if (c > 0.0 && c <= 0.5 + 1e-12) pts.push_back(std::clamp(c, 1e-12, 0.5));
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-13; }),
              pts.end());

    // midpoint feasibility over the candidate partition of (0, 1/2]
    std::vector<double> edges{1e-12};
    edges.insert(edges.end(), pts.begin(), pts.end());
    if (edges.back() < 0.5) edges.push_back(0.5);
    std::vector<double> mids;
    std::vector<bool> feasible;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      const double mid = 0.5 * (edges[i] + edges[i + 1]);
      mids.push_back(mid);
      feasible.push_back(ctx.margin(mid) <= 0.0);
    }
    std::size_t first = 0;
    while (first < mids.size() && !feasible[first]) ++first;
    if (first == mids.size()) {
      // possibly a single admissible point
      double found = std::numeric_limits<double>::quiet_NaN();
      for (double c : pts) {
        if (ctx.margin(c) <= kConditionTol * scale) {
          found = c;
          break;
        }
      }
      if (std::isnan(found)) return std::nullopt;
      interval.lo = interval.hi = found;
    } else {
      std::size_t last = first;
      while (last + 1 < mids.size() && feasible[last + 1]) ++last;
      // the boundaries are the margin's sign changes next to the stretch
      if (first == 0)
        interval.lo = ctx.margin(edges.front()) <= 0.0
                          ? edges.front()
                          : refine_boundary(ctx, edges.front(), mids[first]);
      else
        interval.lo = refine_boundary(ctx, mids[first - 1], mids[first]);
      if (last + 1 == mids.size())
        interval.hi =
            ctx.margin(0.5) <= 0.0 ? 0.5 : refine_boundary(ctx, 0.5, mids[last]);
      else
        interval.hi = refine_boundary(ctx, mids[last + 1], mids[last]);
    }
  }

  if (!(interval.lo > 0.0) || interval.hi > 0.5 + 1e-12) return std::nullopt;
  for (double mu : {interval.lo, interval.hi}) {
    for (NamedResidual cond : ctx.conditions(mu)) {
      cond.name += mu == interval.lo ? "@lo" : "@hi";
      interval.endpoint_conditions.push_back(cond);
    }
  }
  if (max_inequality_violation(interval.endpoint_conditions) > kConditionTol * scale)
    return std::nullopt;
  return interval;
}

SubLargeResult construct_sub_large_multi_even(const Prior& prior, const UtilityFunction& V,
                                              std::optional<double> mu_opt) {
  const SubMultiContext ctx = make_sub_multi_context(prior, V);
  const auto interval = sub_feasible_interval_multi(prior, V);
  if (!interval)
    throw RegionError("no admissible mass: (lambda, v, n) outside the feasibility region");
  const double mu = mu_opt.value_or(interval->lo);
  if (mu < interval->lo - 1e-12 || mu > interval->hi + 1e-12)
    throw RegionError("mu outside the admissible interval");
  if (ctx.sc.s > 0.0) throw RegionError("S(n) > 0: utility is not submodular");

  const SubParams p = ctx.params(mu);
  SignalingPolicy policy = sub_split_policy(ctx.n, mu, p.ell, p.p_hat);

  lp::HyperplaneCertificate cert;
  cert.alpha.assign(ctx.n, p.alpha);
  cert.beta = p.beta;

  SubLargeResult out{
      {std::move(policy), std::move(cert), 2.0 * (ctx.vh + mu * mu * ctx.sc.s), {}},
      {mu, p.alpha, p.beta, p.ell, p.p_hat}};
  ConstructedEquilibrium& eq = out.eq;
  append_bayes_conditions(eq.conditions, eq.policy, prior);
  for (const NamedResidual& cond : ctx.conditions(mu)) eq.conditions.push_back(cond);
  const int n = ctx.n, m = ctx.m;
  for (const auto& [name, point] :
       std::initializer_list<std::pair<const char*, std::vector<double>>>{
           {"support@0|1", block_point(n, m, 0.0, 1.0)},
           {"support@ell|1", block_point(n, m, p.ell, 1.0)},
           {"support@1|0", block_point(n, m, 1.0, 0.0)},
           {"support@1|ell", block_point(n, m, 1.0, p.ell)},
           {"support@ell|p_hat", block_point(n, m, p.ell, p.p_hat)},
           {"support@p_hat|ell", block_point(n, m, p.p_hat, p.ell)}})
    eq.conditions.push_back(envelope_residual(name, point, eq.policy, V, eq.certificate, true));
  eq.conditions.push_back(envelope_residual("exact_env@ones", uniform_point(n, 1.0), eq.policy,
                                            V, eq.certificate, false));
  eq.conditions.push_back(envelope_residual("exact_env@ell", uniform_point(n, p.ell), eq.policy,
                                            V, eq.certificate, false));
  return out;
}

// --- submodular multi-receiver (odd n) ---------------------------------------

namespace {

struct OddSystem {
  int n, nbar, nund;
  double lambda, mu1;
  const UtilityFunction& V;

  // theta = [mu2, ell1, ell2, p_hat1, p_hat2, alpha1, alpha2, beta]
  static constexpr int kDim = 8;

  std::vector<Segment> segments(const double* th) const {
    const double mu2 = th[0], ell1 = th[1], ell2 = th[2], p1 = th[3], p2 = th[4];
    std::vector<Segment> segs;
    segs.push_back({mu1, block_point(n, nbar, 0.0, 1.0), block_point(n, nbar, ell1, 1.0)});
    segs.push_back({1.0 - mu1 - mu2, block_point(n, nbar, ell1, p2),
                    block_point(n, nbar, p1, ell2)});
    segs.push_back({mu2, block_point(n, nbar, 1.0, 0.0), block_point(n, nbar, 1.0, ell2)});
    return segs;
  }

  void residuals(const double* th, double* r) const {
    const double mu2 = th[0], ell1 = th[1], ell2 = th[2], p1 = th[3], p2 = th[4];
    const double a1 = th[5], a2 = th[6], beta = th[7];
    const double w_mid = 1.0 - mu1 - mu2;
    r[0] = 0.5 * ell1 * mu1 + 0.5 * (p1 + ell1) * w_mid + mu2 - lambda;
    r[1] = 0.5 * ell2 * mu2 + 0.5 * (p2 + ell2) * w_mid + mu1 - lambda;

    const auto segs = segments(th);
    const auto envelope = [&](const std::vector<double>& q) {
      double v = beta;
      for (int j = 0; j < nbar; ++j) v += a1 * q[j];
      for (int j = nbar; j < n; ++j) v += a2 * q[j];
      return v;
    };
    const std::vector<double> corners[6] = {
        block_point(n, nbar, 0.0, 1.0),  block_point(n, nbar, ell1, 1.0),
        block_point(n, nbar, ell1, p2),  block_point(n, nbar, p1, ell2),
        block_point(n, nbar, 1.0, 0.0),  block_point(n, nbar, 1.0, ell2)};
    for (int i = 0; i < 6; ++i)
      r[2 + i] = payoff::expected_payoff_exact(corners[i], {}, segs, V) - envelope(corners[i]);
  }
};

}  // namespace

SubOddResult construct_sub_large_multi_odd(const Prior& prior, const UtilityFunction& V,
                                           double mu1) {
  const int n = V.n();
  require(n >= 3 && n % 2 == 1, "odd receiver count required");
  require(anonymous_in(V, {Modularity::strictly_submodular}),
          "needs an anonymous strictly submodular utility");
  if (prior.lambda() <= 0.5) throw RegionError("the large-prior family needs lambda > 1/2");
  require(mu1 > 0.0 && mu1 < 0.5, "mu1 must lie in (0, 1/2)");

  OddSystem sys{n, (n + 1) / 2, (n - 1) / 2, prior.lambda(), mu1, V};

  // seed from the even-(n-1) solution when available
  double theta[OddSystem::kDim] = {mu1, 0.2, 0.2, 0.6, 0.6, V.v(sys.nbar) / n,
                                   V.v(sys.nbar) / n, 0.25 * V.v(sys.nund)};
  try {
    std::vector<double> v_even(V.anonymous_values().begin(),
                               V.anonymous_values().begin() + n);
    const UtilityFunction Veven = UtilityFunction::anonymous(n - 1, std::move(v_even));
    if (const auto ival = sub_feasible_interval_multi(prior, Veven)) {
      const double mu_seed = std::clamp(mu1, ival->lo, ival->hi);
      const SubLargeResult even = construct_sub_large_multi_even(prior, Veven, mu_seed);
      theta[0] = mu_seed;
      theta[1] = theta[2] = even.params.ell;
      theta[3] = theta[4] = even.params.p_hat;
      theta[5] = theta[6] = even.params.alpha;
      theta[7] = even.params.beta;
    }
  } catch (const std::exception&) {
    // heuristic seed stays
  }

  constexpr int kDim = OddSystem::kDim;
  double r[kDim], r_trial[kDim];
  double jac[kDim][kDim];
  double nu = 1e-8;
  SubOddResult out;

  auto norm_inf = [&](const double* v) {
    double m = 0.0;
    for (int i = 0; i < kDim; ++i) m = std::max(m, std::abs(v[i]));
    return m;
  };

  sys.residuals(theta, r);
  double err = norm_inf(r);
  int iter = 0;
  for (; iter < 200 && err > 1e-12; ++iter) {
    // forward-difference Jacobian
    for (int j = 0; j < kDim; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(theta[j]));
      double bumped[kDim];
      std::copy(theta, theta + kDim, bumped);
      bumped[j] += h;
      sys.residuals(bumped, r_trial);
      for (int i = 0; i < kDim; ++i) jac[i][j] = (r_trial[i] - r[i]) / h;
    }

    // Levenberg step: (J^T J + nu I) delta = -J^T r
    double jtj[kDim][kDim], jtr[kDim];
    for (int i = 0; i < kDim; ++i) {
      jtr[i] = 0.0;
      for (int k = 0; k < kDim; ++k) jtr[i] += jac[k][i] * r[k];
      for (int j = 0; j < kDim; ++j) {
        double acc = 0.0;
        for (int k = 0; k < kDim; ++k) acc += jac[k][i] * jac[k][j];
        jtj[i][j] = acc;
      }
    }

    bool improved = false;
    for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
      double m[kDim][kDim + 1];
      for (int i = 0; i < kDim; ++i) {
        for (int j = 0; j < kDim; ++j) m[i][j] = jtj[i][j] + (i == j ? nu : 0.0);
        m[i][kDim] = -jtr[i];
      }
      // gaussian elimination with partial pivoting
      bool singular = false;
      for (int c = 0; c < kDim && !singular; ++c) {
        int piv = c;
        for (int i = c + 1; i < kDim; ++i)
          if (std::abs(m[i][c]) > std::abs(m[piv][c])) piv = i;
        if (std::abs(m[piv][c]) < 1e-300) {
          singular = true;
          break;
        }
        if (piv != c)
          for (int k = c; k <= kDim; ++k) std::swap(m[piv][k], m[c][k]);
        for (int i = c + 1; i < kDim; ++i) {
          const double f = m[i][c] / m[c][c];
          for (int k = c; k <= kDim; ++k) m[i][k] -= f * m[c][k];
        }
      }
      if (singular) {
        nu *= 10.0;
        continue;
      }
      double delta[kDim];
      for (int i = kDim - 1; i >= 0; --i) {
        double acc = m[i][kDim];
        for (int k = i + 1; k < kDim; ++k) acc -= m[i][k] * delta[k];
        delta[i] = acc / m[i][i];
      }
      double trial[kDim];
      for (int i = 0; i < kDim; ++i) trial[i] = theta[i] + delta[i];
      sys.residuals(trial, r_trial);
      if (norm_inf(r_trial) < err) {
        std::copy(trial, trial + kDim, theta);
        std::copy(r_trial, r_trial + kDim, r);
        err = norm_inf(r);
        nu = std::max(nu * 0.3, 1e-12);
        improved = true;
      } else {
        nu *= 10.0;
      }
    }
    if (!improved) break;
  }

  out.params = {mu1,      theta[0], theta[1], theta[2], theta[3],
                theta[4], theta[5], theta[6], theta[7]};
  out.residuals.assign(r, r + kDim);
  out.residual_norm = err;
  out.newton_iterations = iter;
  out.converged = err <= 1e-8;
  out.certificate.alpha.assign(n, out.params.alpha2);
  for (int j = 0; j < sys.nbar; ++j) out.certificate.alpha[j] = out.params.alpha1;
  out.certificate.beta = out.params.beta;

  const double mu2 = out.params.mu2;
  const bool valid_shape = out.converged && mu2 > 0.0 && mu1 + mu2 < 1.0 &&
                           out.params.ell1 > 0.0 && out.params.ell1 <= 1.0 &&
                           out.params.ell2 > 0.0 && out.params.ell2 <= 1.0 &&
                           out.params.p_hat1 > out.params.ell1 && out.params.p_hat1 <= 1.0 &&
                           out.params.p_hat2 > out.params.ell2 && out.params.p_hat2 <= 1.0;
  if (valid_shape) {
    double th[kDim];
    th[0] = mu2;
    th[1] = out.params.ell1;
    th[2] = out.params.ell2;
    th[3] = out.params.p_hat1;
    th[4] = out.params.p_hat2;
    th[5] = out.params.alpha1;
    th[6] = out.params.alpha2;
    th[7] = out.params.beta;
    out.policy.emplace(n, std::vector<Atom>{}, sys.segments(th));
  }
  return out;
}

// --- independent signaling ----------------------------------------------------

IndependentPolicy construct_independent_additive(const Prior& prior, int n,
                                                 const UtilityFunction& V) {
  require(V.n() == n, "utility dimension mismatch");
  require(V.is_additive(),
          "independent signaling forms an equilibrium only for additive utilities");
  const double lambda = prior.lambda();

  std::vector<Atom> atoms;
  std::vector<Segment> segments;
  if (lambda <= 0.5) {
    segments.push_back({1.0, {0.0}, {2.0 * lambda}});
  } else {
    segments.push_back({(1.0 - lambda) / lambda, {0.0}, {2.0 - 2.0 * lambda}});
    atoms.push_back({(2.0 * lambda - 1.0) / lambda, {1.0}});
  }
  return IndependentPolicy{n, lambda, SignalingPolicy(1, std::move(atoms), std::move(segments))};
}

SignalingPolicy IndependentPolicy::joint_discretized(int atoms_per_marginal) const {
  const SignalingPolicy marg = discretize_policy(marginal, atoms_per_marginal);
  std::vector<Atom> joint{{1.0, {}}};
  for (int d = 0; d < n; ++d) {
    std::vector<Atom> next;
    next.reserve(joint.size() * marg.atoms().size());
    for (const Atom& partial : joint) {
      for (const Atom& a : marg.atoms()) {
        Atom combined = partial;
        combined.weight *= a.weight;
        combined.q.push_back(a.q[0]);
        next.push_back(std::move(combined));
      }
    }
    joint = std::move(next);
  }
  double total = 0.0;
  for (const Atom& a : joint) total += a.weight;
  for (Atom& a : joint) a.weight /= total;
  return SignalingPolicy(n, std::move(joint), {});
}

// --- worked example fixtures ----------------------------------------------------

Fixture example_fixture(const std::string& id, const FixtureOptions& opts) {
  if (id == "ex31") {
    const double lambda = opts.lambda.value_or(0.5);
    const double c = opts.c;
    require(c > 0.0 && lambda - c >= 0.0 && lambda + c <= 1.0,
            "ex31 needs 0 < c <= min(lambda, 1-lambda)");
    SignalingPolicy policy(2, {},
                           {{1.0, {lambda - c, lambda + c}, {lambda + c, lambda - c}}});
    return {id, lambda, std::move(policy), UtilityFunction::anonymous(2, {0.0, 1.0, 1.0})};
  }
  const double eps = opts.epsilon;
  require(eps > 0.0 && eps < 0.5, "fixture epsilon must lie in (0, 1/2)");
  if (id == "ex42a") {
    const double lambda = opts.lambda.value_or(0.4);
    require(lambda <= 0.5, "ex42a needs lambda <= 1/2");
    SignalingPolicy policy(2, {}, {{1.0, {0.0, 0.0}, {2.0 * lambda, 2.0 * lambda}}});
    return {id, lambda, std::move(policy), UtilityFunction::anonymous(2, {0.0, eps, 1.0})};
  }
  if (id == "ex42b") {
    // two-piece increasing curve; constants 3/10, 227/237 and 79/100 are the
    // breakpoint abscissa, first-piece slope and endpoint abscissa
    const double lambda = 0.4;
    const double bx = 3.0 / 10.0;
    const double by = (227.0 / 237.0) * bx;
    const double ex = 79.0 / 100.0;
    const double ey = by + (4129.0 / 3871.0) * (ex - bx);
    const double w1 = (290.0 / 237.0) * bx;
    const double w2 = (5000.0 / 3871.0) * (ex - bx);
    SignalingPolicy policy(2, {}, {{w1, {0.0, 0.0}, {bx, by}}, {w2, {bx, by}, {ex, ey}}});
    return {id, lambda, std::move(policy), UtilityFunction::anonymous(2, {0.0, eps, 1.0})};
  }
  if (id == "ex43a") {
    const double lambda = opts.lambda.value_or(0.1);
    require(lambda <= 0.5, "ex43a needs lambda <= 1/2");
    SignalingPolicy policy(2, {}, {{1.0, {0.0, 2.0 * lambda}, {2.0 * lambda, 0.0}}});
    return {id, lambda, std::move(policy),
            UtilityFunction::anonymous(2, {0.0, 1.0, 1.0 + eps})};
  }
  if (id == "ex43b") {
    // density 8 q1 / (9 lambda^2) on the line q1 + q2/2 = 3 lambda / 2,
    // approximated by `pieces` uniform sub-segments that preserve each
    // piece's mass and marginal means (linear density => matching the
    // conditional mean suffices)
    const double lambda = opts.lambda.value_or(0.1);
    require(lambda > 0.0 && 3.0 * lambda <= 1.0, "ex43b needs 3*lambda <= 1");
    const int M = opts.pieces;
    require(M >= 1, "ex43b needs at least one piece");
    const double top = 1.5 * lambda;
    std::vector<Segment> segments;
    double total = 0.0;
    for (int i = 0; i < M; ++i) {
      const double a = top * i / M;
      const double b = top * (i + 1) / M;
      const double mass = 4.0 * (b * b - a * a) / (9.0 * lambda * lambda);
      const double mean = (8.0 / 27.0) * (b * b * b - a * a * a) / (lambda * lambda) / mass;
      const double left = 2.0 * mean - b;  // uniform piece [left, b] has mean `mean`
      segments.push_back({mass,
                          {left, 3.0 * lambda - 2.0 * left},
                          {b, 3.0 * lambda - 2.0 * b}});
      total += mass;
    }
    for (Segment& s : segments) s.weight /= total;
    return {id, lambda, SignalingPolicy(2, {}, std::move(segments)),
            UtilityFunction::anonymous(2, {0.0, 1.0, 1.0 + eps})};
  }
  throw std::invalid_argument("unknown example id '" + id + "'");
}

}  // namespace persuasion::equilibria
