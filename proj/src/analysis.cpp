#include "persuasion/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "persuasion/payoff.hpp"

namespace persuasion::analysis {

namespace {

constexpr double kOne = 1.0 - 1e-12;

struct MarginalSupport {
  std::vector<std::pair<double, double>> intervals;  // from varying segment coordinates
  std::vector<double> points;                        // atoms and constant coordinates
};

MarginalSupport marginal_support(const SignalingPolicy& g, int j) {
  MarginalSupport s;
  for (const Atom& a : g.atoms()) s.points.push_back(a.q[j]);
  for (const Segment& seg : g.segments()) {
    if (seg.a[j] == seg.b[j])
      s.points.push_back(seg.a[j]);
    else
      s.intervals.emplace_back(std::min(seg.a[j], seg.b[j]), std::max(seg.a[j], seg.b[j]));
  }
  return s;
}

}  // namespace

StructuralDiagnostics structural_diagnostics(const SignalingPolicy& G, const UtilityFunction& V) {
  StructuralDiagnostics d;
  d.marginal_checks_enabled = V.is_strictly_monotone();
  if (!d.marginal_checks_enabled)
    d.notes.push_back("marginal screens disabled: utility is not strictly monotone");

  for (const Atom& a : G.atoms()) {
    const bool all_ones = std::all_of(a.q.begin(), a.q.end(), [](double x) { return x >= kOne; });
    if (!all_ones) {
      d.interior_atom_present = true;
      d.notes.push_back("joint mass point away from the all-ones posterior");
      break;
    }
  }

  for (int j = 0; j < G.n(); ++j) {
    MarginalSupport s = marginal_support(G, j);
    for (double p : s.points) {
      if (p < kOne && !d.marginal_atom_below_one) {
        d.marginal_atom_below_one = true;
        d.notes.push_back("marginal mass point below 1 in dimension " + std::to_string(j));
      }
    }
    // support below 1 must merge into one interval anchored at 0
    std::vector<std::pair<double, double>> pieces = s.intervals;
    for (double p : s.points)
      if (p < kOne) pieces.emplace_back(p, p);
    if (pieces.empty()) {
      d.marginal_support_gap = true;
      d.notes.push_back("dimension " + std::to_string(j) + " has no support below 1");
      continue;
    }
    std::sort(pieces.begin(), pieces.end());
    double lo = pieces[0].first, hi = pieces[0].second;
    bool gap = false;
    for (const auto& [a, b] : pieces) {
      if (a > hi + kBayesTol) {
        gap = true;
        break;
      }
      hi = std::max(hi, b);
    }
    if (gap || lo > kBayesTol) {
      d.marginal_support_gap = true;
      d.notes.push_back("marginal support of dimension " + std::to_string(j) +
                        " is not a single interval [0, qhat]");
    }
  }
  return d;
}

OptimalWelfare optimal_welfare(const UtilityFunction& V) {
  const int n = V.n();
  OptimalWelfare best;
  if (V.is_anonymous()) {
    int best_k = 0;
    best.value = V.v(0) + V.v(n);
    for (int k = 1; k <= n; ++k) {
      const double w = V.v(k) + V.v(n - k);
      if (w > best.value) {
        best.value = w;
        best_k = k;
      }
    }
    best.split = (best_k == 0) ? 0u : ((std::uint32_t{1} << best_k) - 1u);
    return best;
  }
  const std::uint32_t full = (std::uint32_t{1} << n) - 1u;
  best.value = V.value(0) + V.value(full);
  best.split = 0;
  for (std::uint32_t s = 1; s <= full; ++s) {
    const double w = V.value(s) + V.value(full & ~s);
    if (w > best.value) {
      best.value = w;
      best.split = s;
    }
  }
  return best;
}

EquilibriumReport verify_equilibrium(const SignalingPolicy& G, const Prior& prior,
                                     const UtilityFunction& V, const Grid& grid,
                                     const VerifyOptions& opts) {
  if (G.n() != V.n() || G.n() != grid.n()) throw std::invalid_argument("dimension mismatch");
  if (!is_bayes_plausible(G, prior))
    throw std::invalid_argument("policy is not Bayes-plausible for this prior");

  EquilibriumReport report;
  report.grid_points_per_axis = grid.points_per_axis();
  report.K = opts.K;

  const SignalingPolicy Gd = discretize_policy(G, opts.K);
  const payoff::DiscretizedPayoff vs_self(G, V, opts.K);
  double self = 0.0;
  for (const Atom& a : Gd.atoms()) self += a.weight * vs_self(a.q);
  report.payoff_vs_self = self;

  std::vector<double> local_objective;
  const std::vector<double>* objective = opts.objective;
  if (objective == nullptr) {
    local_objective = payoff::grid_objective(grid, G, V, opts.K);
    objective = &local_objective;
  }
  const lp::BestResponse br = lp::best_response(G, prior, V, grid, opts.K, opts.lp, objective);
  report.lp_status = br.status;
  report.lp_iterations = br.lp_iterations;
  if (br.status != lp::LpStatus::optimal) return report;

  report.best_response_value = br.value;
  report.gap = br.value - self;
  report.certificate = br.certificate;
  report.max_envelope_violation = br.max_envelope_violation;
  report.support_slack = br.support_slack;

  double self_slack = 0.0;
  for (const Atom& a : Gd.atoms()) {
    const double pi = vs_self(a.q);
    self_slack = std::max(self_slack, std::abs(report.certificate.evaluate(a.q) - pi));
  }
  report.cert_self_slack = self_slack;

  report.diagnostics = structural_diagnostics(G, V);

  const double vmax = V.vmax();
  report.tol = opts.tol_grid_coeff * grid.step() * vmax + opts.tol_disc_coeff * vmax / opts.K;
  report.equilibrium_consistent = report.gap <= report.tol;

  if (opts.closed_form_certificate != nullptr) {
    const lp::HyperplaneCertificate& cf = *opts.closed_form_certificate;
    double worst = std::abs(cf.beta - report.certificate.beta);
    for (int j = 0; j < grid.n(); ++j)
      worst = std::max(worst, std::abs(cf.alpha[j] - report.certificate.alpha[j]));
    report.closed_form_disagreement = worst;
    report.red_alert = worst > 1e-6;
  }
  return report;
}

namespace {

PoSResult small_prior_result(const std::string& family, const Prior& prior,
                             const UtilityFunction& V) {
  PoSResult out;
  out.family = family;
  out.lambda = prior.lambda();
  out.n = V.n();
  out.mu = 0.0;
  out.optimal_welfare = optimal_welfare(V).value;
  out.eq_welfare = out.optimal_welfare;
  out.ratio = 1.0;
  out.closed_form_bound = 1.0;
  return out;
}

}  // namespace

PoSResult pos_bound(const std::string& family, const Prior& prior, const UtilityFunction& V) {
  const double lambda = prior.lambda();
  const int n = V.n();

  // below the half prior every family attains the optimal-outcome welfare
  if (lambda <= 0.5) {
    if (family == "sup-small" || family == "sub-small" || family == "sup-large" ||
        family == "sub-large" || family == "sup-multi" || family == "sub-multi-even" ||
        family == "independent")
      return small_prior_result(family, prior, V);
    throw std::invalid_argument("unknown family '" + family + "'");
  }

  PoSResult out;
  out.family = family;
  out.lambda = lambda;
  out.n = n;
  out.optimal_welfare = optimal_welfare(V).value;

  if (family == "sup-small" || family == "sub-small")
    throw equilibria::RegionError("small-prior families need lambda <= 1/2");

  if (family == "independent") {
    if (!V.is_additive())
      throw equilibria::RegionError("independent family needs an additive utility");
    out.mu = (2.0 * lambda - 1.0) / lambda;
    out.eq_welfare = out.optimal_welfare;
    out.ratio = 1.0;
    out.closed_form_bound = 1.0;
    return out;
  }

  if (family == "sup-large") {
    if (n != 2) throw std::invalid_argument("sup-large is the two-receiver family");
    const double t = V.v(1), r = V.v(2), rho = t / r;
    out.shape = rho;
    out.mu = equilibria::solve_mu_sup(lambda, rho);
    out.eq_welfare = r * (1.0 - out.mu * out.mu * (0.5 - rho));
    out.ratio = out.optimal_welfare / out.eq_welfare;
    out.closed_form_bound = 1.0 / (1.0 - out.mu * out.mu * (0.5 - rho));
    return out;
  }
  if (family == "sub-large") {
    if (n != 2) throw std::invalid_argument("sub-large is the two-receiver family");
    const double t = V.v(1), r = V.v(2), rho = t / r;
    out.shape = rho;
    const auto interval = equilibria::sub_feasible_interval(lambda, rho);
    if (!interval)
      throw equilibria::RegionError("(lambda, rho) outside the submodular feasibility region");
    out.mu = interval->lo;
    out.eq_welfare = 2.0 * t - out.mu * out.mu * (2.0 * t - r);
    out.ratio = out.optimal_welfare / out.eq_welfare;
    out.closed_form_bound = 1.0 / (1.0 - out.mu * out.mu * (1.0 - 1.0 / (2.0 * rho)));
    return out;
  }
  if (family == "sup-multi") {
    const auto result = equilibria::construct_sup_large_multi(prior, V);
    const auto sc = equilibria::multi_scalars(V);
    out.mu = result.params.mu;
    out.eq_welfare = result.eq.welfare_closed_form;
    out.ratio = out.optimal_welfare / out.eq_welfare;
    out.closed_form_bound = V.v(n) / (V.v(n) + out.mu * out.mu * sc.r);
    return out;
  }
  if (family == "sub-multi-even") {
    const auto interval = equilibria::sub_feasible_interval_multi(prior, V);
    if (!interval)
      throw equilibria::RegionError("(lambda, v, n) outside the submodular feasibility region");
    const auto sc = equilibria::multi_scalars(V);
    out.mu = interval->lo;
    out.eq_welfare = 2.0 * (V.v(n / 2) + out.mu * out.mu * sc.s);
    out.ratio = out.optimal_welfare / out.eq_welfare;
    out.closed_form_bound = V.v(n / 2) / (V.v(n / 2) + out.mu * out.mu * sc.s);
    return out;
  }
  if (family == "sub-multi-odd")
    throw equilibria::RegionError("no closed-form bound for odd receiver counts");
  throw std::invalid_argument("unknown family '" + family + "'");
}

}  // namespace persuasion::analysis
