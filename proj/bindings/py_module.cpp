// Python bindings for the core operations: domain types, payoff evaluation,
// best responses, equilibrium constructors and verification.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "persuasion/analysis.hpp"
#include "persuasion/equilibria.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/model.hpp"
#include "persuasion/payoff.hpp"

namespace py = pybind11;
using namespace persuasion;

namespace {

const char* modularity_name(Modularity m) {
  switch (m) {
    case Modularity::strictly_supermodular: return "strictly_supermodular";
    case Modularity::strictly_submodular: return "strictly_submodular";
    case Modularity::additive: return "additive";
    case Modularity::mixed: return "mixed";
  }
  return "unknown";
}

}  // namespace

PYBIND11_MODULE(competitive_persuasion, m) {
  m.doc() = "Symmetric equilibria of the two-sender multi-receiver persuasion game";

  py::register_exception<equilibria::RegionError>(m, "RegionError");

  py::class_<Prior>(m, "Prior")
      .def(py::init<double>(), py::arg("lambda_"))
      .def_property_readonly("lambda_", &Prior::lambda)
      .def("__repr__", [](const Prior& p) {
        return "Prior(" + format_double(p.lambda()) + ")";
      });

  py::class_<UtilityFunction>(m, "UtilityFunction")
      .def_static("anonymous", &UtilityFunction::anonymous, py::arg("n"), py::arg("v"))
      .def_static("general", &UtilityFunction::general, py::arg("n"), py::arg("table"))
      .def_static("power", &UtilityFunction::power, py::arg("n"), py::arg("tau"))
      .def_static("additive", &UtilityFunction::additive, py::arg("n"),
                  py::arg("per_receiver") = 1.0)
      .def_property_readonly("n", &UtilityFunction::n)
      .def("value", &UtilityFunction::value, py::arg("subset"))
      .def("v", &UtilityFunction::v, py::arg("k"))
      .def_property_readonly("is_anonymous", &UtilityFunction::is_anonymous)
      .def_property_readonly("vmax", &UtilityFunction::vmax)
      .def_property_readonly("is_additive", &UtilityFunction::is_additive)
      .def_property_readonly("is_strictly_monotone", &UtilityFunction::is_strictly_monotone)
      .def_property_readonly("modularity", [](const UtilityFunction& V) {
        return std::string(modularity_name(V.modularity()));
      });

  py::class_<Atom>(m, "Atom")
      .def(py::init([](double w, std::vector<double> q) {
             return Atom{w, std::move(q)};
           }),
           py::arg("weight"), py::arg("q"))
      .def_readonly("weight", &Atom::weight)
      .def_readonly("q", &Atom::q);

  py::class_<Segment>(m, "Segment")
      .def(py::init([](double w, std::vector<double> a, std::vector<double> b) {
             return Segment{w, std::move(a), std::move(b)};
           }),
           py::arg("weight"), py::arg("a"), py::arg("b"))
      .def_readonly("weight", &Segment::weight)
      .def_readonly("a", &Segment::a)
      .def_readonly("b", &Segment::b);

  py::class_<SignalingPolicy>(m, "SignalingPolicy")
      .def(py::init<int, std::vector<Atom>, std::vector<Segment>>(), py::arg("n"),
           py::arg("atoms"), py::arg("segments"))
      .def_property_readonly("n", &SignalingPolicy::n)
      .def_property_readonly("atoms", &SignalingPolicy::atoms)
      .def_property_readonly("segments", &SignalingPolicy::segments)
      .def("marginal_mean", &SignalingPolicy::marginal_mean, py::arg("j"))
      .def("__repr__", [](const SignalingPolicy& g) {
        std::ostringstream os;
        os << "SignalingPolicy(n=" << g.n() << ", atoms=" << g.atoms().size()
           << ", segments=" << g.segments().size() << ")";
        return os.str();
      });

  py::class_<Grid>(m, "Grid")
      .def(py::init<int, int>(), py::arg("n"), py::arg("points_per_axis"))
      .def_property_readonly("n", &Grid::n)
      .def_property_readonly("points_per_axis", &Grid::points_per_axis)
      .def_property_readonly("step", &Grid::step)
      .def("__len__", &Grid::size)
      .def("point", py::overload_cast<std::size_t>(&Grid::point, py::const_), py::arg("index"));

  m.def("check_bayes_plausible", &check_bayes_plausible, py::arg("policy"), py::arg("prior"));
  m.def("is_bayes_plausible", &is_bayes_plausible, py::arg("policy"), py::arg("prior"),
        py::arg("tol") = kBayesTol);
  m.def("discretize_policy", &discretize_policy, py::arg("policy"),
        py::arg("atoms_per_segment"));
  m.def("validate_utility", [](const UtilityFunction& V) {
    const auto report = validate_utility(V);
    py::dict out;
    out["valid"] = report.valid();
    out["strictly_monotone"] = report.strictly_monotone;
    if (report.classification)
      out["classification"] = std::string(modularity_name(*report.classification));
    py::list violations;
    for (const auto& v : report.violations) {
      py::dict item;
      item["property"] = v.property;
      item["subset_a"] = v.subset_a;
      item["subset_b"] = v.subset_b;
      item["detail"] = v.detail;
      violations.append(item);
    }
    out["violations"] = violations;
    return out;
  });
  m.def("write_policy_file", &write_policy_file, py::arg("path"), py::arg("policy"),
        py::arg("lambda_"));
  m.def("read_policy_file", [](const std::string& path) {
    const auto pf = read_policy_file(path);
    return py::make_tuple(pf.lambda, pf.policy);
  });

  m.def(
      "win_set_probability",
      [](const std::vector<double>& q, std::uint32_t S, const SignalingPolicy& F,
         double tie_tol) { return payoff::win_set_probability(q, S, F, tie_tol); },
      py::arg("q"), py::arg("S"), py::arg("F"), py::arg("tie_tol") = payoff::kTieTol);
  m.def(
      "expected_payoff",
      [](const std::vector<double>& q, const SignalingPolicy& F, const UtilityFunction& V,
         double tie_tol) { return payoff::expected_payoff(q, F, V, tie_tol); },
      py::arg("q"), py::arg("F"), py::arg("V"), py::arg("tie_tol") = payoff::kTieTol);
  m.def(
      "expected_payoff_exact",
      [](const std::vector<double>& q, const SignalingPolicy& F, const UtilityFunction& V,
         double tie_tol) { return payoff::expected_payoff_exact(q, F, V, tie_tol); },
      py::arg("q"), py::arg("F"), py::arg("V"), py::arg("tie_tol") = payoff::kTieTol);
  m.def("welfare", &payoff::welfare, py::arg("G"), py::arg("F"), py::arg("V"), py::arg("K"));

  py::class_<lp::HyperplaneCertificate>(m, "HyperplaneCertificate")
      .def_readonly("alpha", &lp::HyperplaneCertificate::alpha)
      .def_readonly("beta", &lp::HyperplaneCertificate::beta)
      .def("evaluate", [](const lp::HyperplaneCertificate& c, const std::vector<double>& q) {
        return c.evaluate(q);
      });

  py::class_<lp::BestResponse>(m, "BestResponse")
      .def_property_readonly("status",
                             [](const lp::BestResponse& b) {
                               return std::string(lp::to_string(b.status));
                             })
      .def_readonly("value", &lp::BestResponse::value)
      .def_readonly("policy", &lp::BestResponse::policy)
      .def_readonly("certificate", &lp::BestResponse::certificate)
      .def_readonly("max_envelope_violation", &lp::BestResponse::max_envelope_violation)
      .def_readonly("support_slack", &lp::BestResponse::support_slack);

  m.def(
      "best_response",
      [](const SignalingPolicy& F, const Prior& prior, const UtilityFunction& V,
         const Grid& grid, int K) { return lp::best_response(F, prior, V, grid, K); },
      py::arg("F"), py::arg("prior"), py::arg("V"), py::arg("grid"), py::arg("K") = 512);

  py::class_<equilibria::NamedResidual>(m, "NamedResidual")
      .def_readonly("name", &equilibria::NamedResidual::name)
      .def_readonly("value", &equilibria::NamedResidual::value)
      .def_readonly("equality", &equilibria::NamedResidual::equality);

  py::class_<equilibria::ConstructedEquilibrium>(m, "ConstructedEquilibrium")
      .def_readonly("policy", &equilibria::ConstructedEquilibrium::policy)
      .def_readonly("certificate", &equilibria::ConstructedEquilibrium::certificate)
      .def_readonly("welfare_closed_form",
                    &equilibria::ConstructedEquilibrium::welfare_closed_form)
      .def_readonly("conditions", &equilibria::ConstructedEquilibrium::conditions);

  py::class_<equilibria::SupLargePriorParams>(m, "SupLargePriorParams")
      .def_readonly("mu", &equilibria::SupLargePriorParams::mu)
      .def_readonly("alpha", &equilibria::SupLargePriorParams::alpha)
      .def_readonly("p_hat", &equilibria::SupLargePriorParams::p_hat);

  py::class_<equilibria::SubLargePriorParams>(m, "SubLargePriorParams")
      .def_readonly("mu", &equilibria::SubLargePriorParams::mu)
      .def_readonly("alpha", &equilibria::SubLargePriorParams::alpha)
      .def_readonly("beta", &equilibria::SubLargePriorParams::beta)
      .def_readonly("ell", &equilibria::SubLargePriorParams::ell)
      .def_readonly("p_hat", &equilibria::SubLargePriorParams::p_hat);

  py::class_<equilibria::SupLargeResult>(m, "SupLargeResult")
      .def_readonly("eq", &equilibria::SupLargeResult::eq)
      .def_readonly("params", &equilibria::SupLargeResult::params);

  py::class_<equilibria::SubLargeResult>(m, "SubLargeResult")
      .def_readonly("eq", &equilibria::SubLargeResult::eq)
      .def_readonly("params", &equilibria::SubLargeResult::params);

  py::class_<equilibria::MassInterval>(m, "MassInterval")
      .def_readonly("lo", &equilibria::MassInterval::lo)
      .def_readonly("hi", &equilibria::MassInterval::hi);

  m.def("solve_mu_sup", &equilibria::solve_mu_sup, py::arg("lambda_"), py::arg("rho"));
  m.def("construct_sup_small", &equilibria::construct_sup_small, py::arg("prior"), py::arg("n"),
        py::arg("V"));
  m.def("construct_sub_small", &equilibria::construct_sub_small, py::arg("prior"), py::arg("n"),
        py::arg("V"));
  m.def("construct_sup_large", &equilibria::construct_sup_large, py::arg("prior"), py::arg("V"));
  m.def("construct_sup_large_multi", &equilibria::construct_sup_large_multi, py::arg("prior"),
        py::arg("V"));
  m.def("construct_sub_large", &equilibria::construct_sub_large, py::arg("prior"), py::arg("V"),
        py::arg("mu") = std::optional<double>());
  m.def("construct_sub_large_multi_even", &equilibria::construct_sub_large_multi_even,
        py::arg("prior"), py::arg("V"), py::arg("mu") = std::optional<double>());
  m.def("sub_feasible_interval", &equilibria::sub_feasible_interval, py::arg("lambda_"),
        py::arg("rho"));
  m.def("sub_feasible_interval_multi", &equilibria::sub_feasible_interval_multi,
        py::arg("prior"), py::arg("V"));
  m.def(
      "probe_infeasible_sub",
      [](double lambda, double rho) {
        const auto probe = equilibria::probe_infeasible_sub(lambda, rho);
        py::dict out;
        out["certifiable"] = probe.certifiable;
        out["violated_condition"] = probe.violated_condition;
        out["mu"] = probe.mu;
        out["alpha"] = probe.alpha;
        out["beta"] = probe.beta;
        out["p_hat"] = probe.p_hat;
        return out;
      },
      py::arg("lambda_"), py::arg("rho"));
  m.def(
      "multi_scalars",
      [](const UtilityFunction& V) {
        const auto sc = equilibria::multi_scalars(V);
        py::dict out;
        out["t_full"] = sc.t_full;
        out["t_half"] = sc.t_half;
        out["t_bar"] = sc.t_bar;
        out["R"] = sc.r;
        out["S"] = sc.s;
        return out;
      },
      py::arg("V"));
  m.def(
      "example_fixture",
      [](const std::string& id, double c, double epsilon, int pieces) {
        equilibria::FixtureOptions opts;
        opts.c = c;
        opts.epsilon = epsilon;
        opts.pieces = pieces;
        const auto fx = equilibria::example_fixture(id, opts);
        return py::make_tuple(fx.lambda, fx.policy, fx.utility);
      },
      py::arg("id"), py::arg("c") = 0.5, py::arg("epsilon") = 0.01, py::arg("pieces") = 64);
  m.def(
      "construct_independent_additive",
      [](const Prior& prior, int n, const UtilityFunction& V) {
        const auto ind = equilibria::construct_independent_additive(prior, n, V);
        return ind.marginal;
      },
      py::arg("prior"), py::arg("n"), py::arg("V"));

  py::class_<analysis::EquilibriumReport>(m, "EquilibriumReport")
      .def_readonly("payoff_vs_self", &analysis::EquilibriumReport::payoff_vs_self)
      .def_readonly("best_response_value", &analysis::EquilibriumReport::best_response_value)
      .def_readonly("gap", &analysis::EquilibriumReport::gap)
      .def_readonly("tol", &analysis::EquilibriumReport::tol)
      .def_readonly("certificate", &analysis::EquilibriumReport::certificate)
      .def_readonly("max_envelope_violation",
                    &analysis::EquilibriumReport::max_envelope_violation)
      .def_readonly("equilibrium_consistent",
                    &analysis::EquilibriumReport::equilibrium_consistent);

  m.def(
      "verify_equilibrium",
      [](const SignalingPolicy& G, const Prior& prior, const UtilityFunction& V,
         const Grid& grid, int K) {
        analysis::VerifyOptions opts;
        opts.K = K;
        return analysis::verify_equilibrium(G, prior, V, grid, opts);
      },
      py::arg("G"), py::arg("prior"), py::arg("V"), py::arg("grid"), py::arg("K") = 512);
  m.def(
      "optimal_welfare",
      [](const UtilityFunction& V) {
        const auto r = analysis::optimal_welfare(V);
        return py::make_tuple(r.value, r.split);
      },
      py::arg("V"));
  m.def(
      "pos_bound",
      [](const std::string& family, const Prior& prior, const UtilityFunction& V) {
        const auto r = analysis::pos_bound(family, prior, V);
        py::dict out;
        out["family"] = r.family;
        out["lambda"] = r.lambda;
        out["n"] = r.n;
        out["mu"] = r.mu;
        out["optimal_welfare"] = r.optimal_welfare;
        out["eq_welfare"] = r.eq_welfare;
        out["ratio"] = r.ratio;
        out["pos_bound"] = r.closed_form_bound;
        return out;
      },
      py::arg("family"), py::arg("prior"), py::arg("V"));
}
