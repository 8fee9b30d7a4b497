// Command-line surface for the competitive-persuasion library:
// construct / verify / best-response / pos / region / sweep.
//
// Exit codes: 0 ok, 2 argument errors, 3 region/feasibility misses,
// 4 solver failures.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "persuasion/analysis.hpp"
#include "persuasion/equilibria.hpp"
#include "persuasion/model.hpp"
#include "persuasion/payoff.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace persuasion;

namespace {

constexpr int kExitArgs = 2;
constexpr int kExitRegion = 3;
constexpr int kExitSolver = 4;

struct CliError {
  int code;
  std::string message;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    out.push_back(std::stod(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

struct UtilitySpec {
  std::string v_list;  // comma separated v(0..n)
  double rho = -1.0;   // two-receiver shape v = (0, rho, 1)
  double tau = -1.0;   // power family v(k) = k^tau
  std::string file;    // utility file
};

UtilityFunction resolve_utility(const UtilitySpec& spec, int n) {
  int provided = 0;
  provided += !spec.v_list.empty();
  provided += spec.rho >= 0.0;
  provided += spec.tau >= 0.0;
  provided += !spec.file.empty();
  if (provided != 1)
    throw CliError{kExitArgs, "exactly one of --v / --rho / --tau / --utility-file is required"};
  if (!spec.file.empty()) {
    auto V = read_utility_file(spec.file);
    if (V.n() != n) throw CliError{kExitArgs, "utility file dimension differs from --n"};
    return V;
  }
  if (!spec.v_list.empty()) return UtilityFunction::anonymous(n, parse_double_list(spec.v_list));
  if (spec.tau >= 0.0) return UtilityFunction::power(n, spec.tau);
  if (n != 2)
    throw CliError{kExitArgs, "--rho describes the two-receiver families; use --v or --tau"};
  return UtilityFunction::anonymous(2, {0.0, spec.rho, 1.0});
}

double shape_of(const UtilitySpec& spec) {
  if (spec.rho >= 0.0) return spec.rho;
  if (spec.tau >= 0.0) return spec.tau;
  return 0.0;
}

void write_csv_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << fields[i];
  }
  os << '\n';
}

// appends a row, writing the header first when the file is empty or new
void append_csv(const std::string& path, const std::string& header,
                const std::vector<std::string>& row) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) throw CliError{kExitArgs, "cannot open '" + path + "'"};
  if (fresh) os << header << '\n';
  write_csv_line(os, row);
}

// --- construct ---------------------------------------------------------------

struct ConstructArgs {
  std::string family;
  double lambda = 0.5;
  bool lambda_set = false;
  int n = 2;
  UtilitySpec utility;
  double mu = -1.0;
  double c = 0.5;
  double epsilon = 0.01;
  int pieces = 64;
  int product_k = 32;
  std::string out;
};

int run_construct(const ConstructArgs& args) {
  std::optional<SignalingPolicy> policy;
  double lambda = args.lambda;
  std::ostringstream echo;
  echo << "family=" << args.family;

  const auto mu_opt = args.mu >= 0.0 ? std::optional<double>(args.mu) : std::optional<double>();

  if (args.family.rfind("example:", 0) == 0) {
    equilibria::FixtureOptions opts;
    opts.c = args.c;
    opts.epsilon = args.epsilon;
    opts.pieces = args.pieces;
    if (args.lambda_set) opts.lambda = args.lambda;
    const auto fx = equilibria::example_fixture(args.family.substr(8), opts);
    lambda = fx.lambda;
    policy = fx.policy;
    echo << " lambda=" << fmt(lambda);
  } else {
    const Prior prior(lambda);
    const auto V = resolve_utility(args.utility, args.n);
    echo << " lambda=" << fmt(lambda) << " n=" << args.n;
    if (args.family == "sup-small") {
      policy = equilibria::construct_sup_small(prior, args.n, V).policy;
    } else if (args.family == "sub-small") {
      policy = equilibria::construct_sub_small(prior, args.n, V).policy;
    } else if (args.family == "sup-large") {
      const auto res = equilibria::construct_sup_large(prior, V);
      policy = res.eq.policy;
      echo << " mu=" << fmt(res.params.mu) << " alpha=" << fmt(res.params.alpha)
           << " p_hat=" << fmt(res.params.p_hat);
    } else if (args.family == "sub-large") {
      const auto res = equilibria::construct_sub_large(prior, V, mu_opt);
      policy = res.eq.policy;
      echo << " mu=" << fmt(res.params.mu) << " alpha=" << fmt(res.params.alpha)
           << " beta=" << fmt(res.params.beta) << " ell=" << fmt(res.params.ell)
           << " p_hat=" << fmt(res.params.p_hat);
    } else if (args.family == "sup-multi") {
      const auto res = equilibria::construct_sup_large_multi(prior, V);
      policy = res.eq.policy;
      echo << " mu=" << fmt(res.params.mu) << " alpha=" << fmt(res.params.alpha)
           << " p_hat=" << fmt(res.params.p_hat);
    } else if (args.family == "sub-multi-even") {
      const auto res = equilibria::construct_sub_large_multi_even(prior, V, mu_opt);
      policy = res.eq.policy;
      echo << " mu=" << fmt(res.params.mu) << " alpha=" << fmt(res.params.alpha)
           << " beta=" << fmt(res.params.beta) << " ell=" << fmt(res.params.ell)
           << " p_hat=" << fmt(res.params.p_hat);
    } else if (args.family == "sub-multi-odd") {
      if (args.mu < 0.0)
        throw CliError{kExitArgs, "sub-multi-odd needs --mu (the first-block mass)"};
      const auto res = equilibria::construct_sub_large_multi_odd(prior, V, args.mu);
      if (!res.converged || !res.policy)
        throw CliError{kExitSolver,
                       "odd-n system did not converge (residual " + fmt(res.residual_norm) + ")"};
      policy = res.policy;
      echo << " mu1=" << fmt(res.params.mu1) << " mu2=" << fmt(res.params.mu2)
           << " residual=" << fmt(res.residual_norm);
    } else if (args.family == "independent") {
      const auto ind = equilibria::construct_independent_additive(prior, args.n, V);
      policy = args.n == 1 ? ind.marginal : ind.joint_discretized(args.product_k);
      echo << " product_k=" << args.product_k;
    } else {
      throw CliError{kExitArgs, "unknown family '" + args.family + "'"};
    }
  }

  write_policy_file(args.out, *policy, lambda);
  std::cerr << echo.str() << "\n";
  return 0;
}

// --- verify --------------------------------------------------------------------

const char* kVerifyHeader =
    "policy,lambda,n,grid,K,payoff_self,best_response,gap,cert_alpha_min,cert_beta,"
    "envelope_violation";

int run_verify(const std::string& policy_path, double prior_flag, const UtilitySpec& uspec,
               int grid_points, int K, double lp_tol, const std::string& csv_path) {
  const PolicyFile pf = read_policy_file(policy_path);
  const double lambda = prior_flag >= 0.0 ? prior_flag : pf.lambda;
  const Prior prior(lambda);
  const int n = pf.policy.n();
  const auto V = resolve_utility(uspec, n);

  Grid grid(n, grid_points);
  analysis::VerifyOptions opts;
  opts.K = K;
  opts.lp.tol = lp_tol;
  const auto report = analysis::verify_equilibrium(pf.policy, prior, V, grid, opts);
  if (report.lp_status != lp::LpStatus::optimal)
    throw CliError{kExitSolver,
                   std::string("best-response LP failed: ") + lp::to_string(report.lp_status)};

  double alpha_min = report.certificate.alpha.empty() ? 0.0 : report.certificate.alpha[0];
  for (double a : report.certificate.alpha) alpha_min = std::min(alpha_min, a);

  std::cout << "policy: " << policy_path << "\n"
            << "lambda: " << fmt(lambda) << "  n: " << n << "  grid: " << grid_points
            << "  K: " << K << "\n"
            << "payoff_vs_self:      " << fmt(report.payoff_vs_self) << "\n"
            << "best_response_value: " << fmt(report.best_response_value) << "\n"
            << "gap:                 " << fmt(report.gap) << "  (tol " << fmt(report.tol)
            << ")\n"
            << "verdict:             "
            << (report.equilibrium_consistent ? "consistent with equilibrium"
                                              : "gap exceeds tolerance")
            << "\n"
            << "certificate:         alpha_min=" << fmt(alpha_min)
            << " beta=" << fmt(report.certificate.beta)
            << " envelope_violation=" << fmt(report.max_envelope_violation)
            << " support_slack=" << fmt(report.support_slack) << "\n"
            << "self_support_slack:  " << fmt(report.cert_self_slack) << "\n";
  if (report.diagnostics.any_violation()) {
    std::cout << "structural_flags:\n";
    for (const auto& note : report.diagnostics.notes) std::cout << "  - " << note << "\n";
  } else if (!report.diagnostics.marginal_checks_enabled) {
    std::cout << "structural_flags:    marginal screens disabled (non-strict utility)\n";
  } else {
    std::cout << "structural_flags:    none\n";
  }

  const std::vector<std::string> row{policy_path,
                                     fmt(lambda),
                                     std::to_string(n),
                                     std::to_string(grid_points),
                                     std::to_string(K),
                                     fmt(report.payoff_vs_self),
                                     fmt(report.best_response_value),
                                     fmt(report.gap),
                                     fmt(alpha_min),
                                     fmt(report.certificate.beta),
                                     fmt(report.max_envelope_violation)};
  std::cout << kVerifyHeader << "\n";
  std::ostringstream line;
  write_csv_line(line, row);
  std::cout << line.str();
  if (!csv_path.empty()) append_csv(csv_path, kVerifyHeader, row);
  return 0;
}

// --- best-response ---------------------------------------------------------------

int run_best_response(const std::string& opponent_path, double prior_flag,
                      const UtilitySpec& uspec, int grid_points, int K, double lp_tol,
                      const std::string& out) {
  const PolicyFile pf = read_policy_file(opponent_path);
  const double lambda = prior_flag >= 0.0 ? prior_flag : pf.lambda;
  const Prior prior(lambda);
  const int n = pf.policy.n();
  const auto V = resolve_utility(uspec, n);

  Grid grid(n, grid_points);
  lp::SimplexOptions opts;
  opts.tol = lp_tol;
  const auto br = lp::best_response(pf.policy, prior, V, grid, K, opts);
  if (br.status != lp::LpStatus::optimal)
    throw CliError{kExitSolver, std::string("LP failed: ") + lp::to_string(br.status)};

  write_policy_file(out, *br.policy, lambda);
  std::cout << "value: " << fmt(br.value) << "\n";
  std::cout << "certificate_alpha:";
  for (double a : br.certificate.alpha) std::cout << ' ' << fmt(a);
  std::cout << "\ncertificate_beta: " << fmt(br.certificate.beta) << "\n"
            << "envelope_violation: " << fmt(br.max_envelope_violation) << "\n"
            << "support_size: " << br.policy->atoms().size() << "\n";
  return 0;
}

// --- pos -------------------------------------------------------------------------

const char* kPosHeader = "family,lambda,rho_or_tau,n,mu,optimal_welfare,eq_welfare,pos_bound";

std::vector<std::string> pos_row(const analysis::PoSResult& r, double shape) {
  return {r.family,           fmt(r.lambda), fmt(shape),
          std::to_string(r.n), fmt(r.mu),    fmt(r.optimal_welfare),
          fmt(r.eq_welfare),  fmt(r.closed_form_bound)};
}

int run_pos(const std::string& family, double lambda, const UtilitySpec& uspec, int n,
            const std::string& csv_path) {
  const auto V = resolve_utility(uspec, n);
  const auto result = analysis::pos_bound(family, Prior(lambda), V);
  const auto row = pos_row(result, shape_of(uspec));
  std::cout << kPosHeader << "\n";
  std::ostringstream line;
  write_csv_line(line, row);
  std::cout << line.str();
  if (!csv_path.empty()) append_csv(csv_path, kPosHeader, row);
  return 0;
}

// --- region ------------------------------------------------------------------------

const char* kRegionHeader = "lambda,n,rho,feasible,mu_lb,mu_ub";

int run_region(const std::string& target, double lambda, int n, double scan_step,
               const std::string& out) {
  if (scan_step <= 0.0) throw CliError{kExitArgs, "--scan-step must be positive"};
  const Prior prior(lambda);

  // feasibility of one scanned shape value (rho for sub2, tau for sub-multi)
  auto probe = [&](double shape) -> std::optional<equilibria::MassInterval> {
    if (target == "sub2") return equilibria::sub_feasible_interval(lambda, shape);
    const auto V = UtilityFunction::power(n, shape);
    return equilibria::sub_feasible_interval_multi(prior, V);
  };

  double shape_lo, shape_hi;
  if (target == "sub2") {
    shape_lo = 0.5;
    shape_hi = 1.0;
    n = 2;
  } else if (target == "sub-multi") {
    if (n < 2 || n % 2 != 0) throw CliError{kExitArgs, "--n must be even for sub-multi"};
    shape_lo = scan_step;  // tau in (0, 1]
    shape_hi = 1.0;
  } else {
    throw CliError{kExitArgs, "unknown region target '" + target + "'"};
  }

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw CliError{kExitArgs, "cannot open '" + out + "'"};
    os = &file;
  }
  *os << kRegionHeader << "\n";

  bool any_feasible = false;
  std::optional<bool> prev_feasible;
  double prev_shape = shape_lo;
  auto emit = [&](double shape, const std::optional<equilibria::MassInterval>& ival) {
    write_csv_line(*os, {fmt(lambda), std::to_string(n), fmt(shape), ival ? "1" : "0",
                         ival ? fmt(ival->lo) : "", ival ? fmt(ival->hi) : ""});
  };
  for (double shape = shape_lo; shape <= shape_hi + 1e-12; shape += scan_step) {
    const double s = std::min(shape, shape_hi);
    const auto ival = probe(s);
    // refine a feasibility boundary between consecutive scan points
    if (prev_feasible.has_value() && *prev_feasible != ival.has_value()) {
      double lo = prev_shape, hi = s;
      for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (probe(mid).has_value() == ival.has_value() ? hi : lo) = mid;
      }
      emit(hi, probe(hi));
    }
    emit(s, ival);
    any_feasible = any_feasible || ival.has_value();
    prev_feasible = ival.has_value();
    prev_shape = s;
  }
  if (!any_feasible)
    throw CliError{kExitRegion, "no feasible shape for this prior: region is empty"};
  return 0;
}

// --- sweep ---------------------------------------------------------------------------

std::vector<double> parse_range(const json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& x : j) out.push_back(x.get<double>());
    return out;
  }
  const double start = j.at("start").get<double>();
  const double stop = j.at("stop").get<double>();
  const double step = j.at("step").get<double>();
  if (step <= 0.0) throw CliError{kExitArgs, "sweep range step must be positive"};
  for (double x = start; x <= stop + 1e-12; x += step) out.push_back(std::min(x, stop));
  if (out.empty()) throw CliError{kExitArgs, "sweep range is empty"};
  return out;
}

int run_sweep(const std::string& spec_path, const std::string& out_dir) {
  std::ifstream is(spec_path);
  if (!is) throw CliError{kExitArgs, "cannot open sweep spec '" + spec_path + "'"};
  json spec = json::parse(is);
  if (!spec.is_array()) spec = json::array({spec});
  fs::create_directories(out_dir);

  for (const auto& job : spec) {
    const std::string family = job.at("family").get<std::string>();
    const std::string name = job.value("name", family);
    const fs::path path = fs::path(out_dir) / (name + ".csv");
    std::ofstream os(path);
    if (!os) throw CliError{kExitArgs, "cannot open '" + path.string() + "'"};

    const auto lambdas = parse_range(job.at("lambda"));

    if (family == "region-sub-multi") {
      os << kRegionHeader << "\n";
      const auto taus = parse_range(job.at("tau"));
      for (int n : job.at("n")) {
        for (double lambda : lambdas) {
          for (double tau : taus) {
            const auto ival = equilibria::sub_feasible_interval_multi(
                Prior(lambda), UtilityFunction::power(n, tau));
            write_csv_line(os, {fmt(lambda), std::to_string(n), fmt(tau), ival ? "1" : "0",
                                ival ? fmt(ival->lo) : "", ival ? fmt(ival->hi) : ""});
          }
        }
      }
      continue;
    }

    os << kPosHeader << "\n";
    std::vector<double> shapes;
    std::vector<int> ns;
    if (family == "sup-large" || family == "sub-large") {
      shapes = parse_range(job.at("rho"));
      ns = {2};
    } else {
      shapes = parse_range(job.at("tau"));
      for (int n : job.at("n")) ns.push_back(n);
    }
    for (int n : ns) {
      for (double lambda : lambdas) {
        for (double shape : shapes) {
          UtilityFunction V = (family == "sup-large" || family == "sub-large")
                                  ? UtilityFunction::anonymous(2, {0.0, shape, 1.0})
                                  : UtilityFunction::power(n, shape);
          try {
            const auto r = analysis::pos_bound(family, Prior(lambda), V);
            write_csv_line(os, pos_row(r, shape));
          } catch (const equilibria::RegionError&) {
            // outside the family's region: row kept, result columns empty
            write_csv_line(
                os, {family, fmt(lambda), fmt(shape), std::to_string(n), "", "", "", ""});
          }
        }
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"competitive Bayesian persuasion equilibria: construct, verify, analyze"};
  app.require_subcommand(1);

  // construct
  ConstructArgs cargs;
  auto* construct = app.add_subcommand("construct", "emit a closed-form equilibrium policy");
  construct
      ->add_option("--family", cargs.family,
                   "sup-small|sup-large|sub-small|sub-large|sup-multi|sub-multi-even|"
                   "sub-multi-odd|independent|example:<id>")
      ->required();
  auto* lam = construct->add_option("--lambda", cargs.lambda, "prior quality probability");
  construct->add_option("--n", cargs.n, "receiver count");
  construct->add_option("--rho", cargs.utility.rho, "two-receiver shape v=(0,rho,1)");
  construct->add_option("--v", cargs.utility.v_list, "anonymous utility v(0),...,v(n)");
  construct->add_option("--tau", cargs.utility.tau, "power utility v(k)=k^tau");
  construct->add_option("--utility-file", cargs.utility.file, "utility file");
  construct->add_option("--mu", cargs.mu, "mass at posterior 1 (submodular families)");
  construct->add_option("--c", cargs.c, "ex31 half-width");
  construct->add_option("--epsilon", cargs.epsilon, "ex42/ex43 utility epsilon");
  construct->add_option("--pieces", cargs.pieces, "ex43b piecewise resolution");
  construct->add_option("--product-k", cargs.product_k,
                        "independent family: atoms per marginal in the joint discretization");
  construct->add_option("-o,--out", cargs.out, "output policy file")->required();

  // verify
  std::string v_policy, v_csv;
  UtilitySpec v_uspec;
  double v_prior = -1.0, v_lp_tol = 1e-9;
  int v_grid = 51, v_K = 512;
  auto* verify = app.add_subcommand("verify", "verify a policy against the best-response LP");
  verify->add_option("--policy", v_policy, "policy file")->required();
  verify->add_option("--prior", v_prior, "prior (defaults to the policy file's lambda)");
  verify->add_option("--v", v_uspec.v_list, "anonymous utility v(0),...,v(n)");
  verify->add_option("--rho", v_uspec.rho, "two-receiver shape");
  verify->add_option("--tau", v_uspec.tau, "power utility");
  verify->add_option("--utility-file", v_uspec.file, "utility file");
  verify->add_option("--grid", v_grid, "grid points per axis");
  verify->add_option("--K", v_K, "atoms per segment in discretizations");
  verify->add_option("--lp-tol", v_lp_tol, "simplex tolerance");
  verify->add_option("--csv", v_csv, "append the verify.csv row to this file");

  // best-response
  std::string b_opponent, b_out;
  UtilitySpec b_uspec;
  double b_prior = -1.0, b_lp_tol = 1e-9;
  int b_grid = 51, b_K = 512;
  auto* bestr = app.add_subcommand("best-response", "grid best response and dual certificate");
  bestr->add_option("--opponent", b_opponent, "opponent policy file")->required();
  bestr->add_option("--prior", b_prior, "prior (defaults to the policy file's lambda)");
  bestr->add_option("--v", b_uspec.v_list, "anonymous utility");
  bestr->add_option("--rho", b_uspec.rho, "two-receiver shape");
  bestr->add_option("--tau", b_uspec.tau, "power utility");
  bestr->add_option("--utility-file", b_uspec.file, "utility file");
  bestr->add_option("--grid", b_grid, "grid points per axis");
  bestr->add_option("--K", b_K, "atoms per segment");
  bestr->add_option("--lp-tol", b_lp_tol, "simplex tolerance");
  bestr->add_option("-o,--out", b_out, "output policy file")->required();

  // pos
  std::string p_family, p_csv;
  UtilitySpec p_uspec;
  double p_lambda = 0.0;
  int p_n = 2;
  auto* pos = app.add_subcommand("pos", "closed-form price-of-stability bound");
  pos->add_option("--family", p_family, "family name")->required();
  pos->add_option("--lambda", p_lambda, "prior")->required();
  pos->add_option("--rho", p_uspec.rho, "two-receiver shape");
  pos->add_option("--tau", p_uspec.tau, "power utility");
  pos->add_option("--v", p_uspec.v_list, "anonymous utility");
  pos->add_option("--utility-file", p_uspec.file, "utility file");
  pos->add_option("--n", p_n, "receiver count");
  pos->add_option("--csv", p_csv, "append the pos.csv row to this file");

  // region
  std::string r_target, r_out;
  double r_lambda = 0.0, r_step = 1e-3;
  int r_n = 4;
  auto* region = app.add_subcommand("region", "feasibility region boundary scan");
  region->add_option("--target", r_target, "sub2|sub-multi")->required();
  region->add_option("--lambda", r_lambda, "prior")->required();
  region->add_option("--n", r_n, "receiver count (sub-multi)");
  region->add_option("--scan-step", r_step, "scan step over rho/tau");
  region->add_option("-o,--out", r_out, "output CSV (stdout when omitted)");

  // sweep
  std::string s_spec, s_out;
  auto* sweep = app.add_subcommand("sweep", "figure-data sweeps driven by a JSON spec");
  sweep->add_option("--spec", s_spec, "sweep spec JSON")->required();
  sweep->add_option("-o,--out", s_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return kExitArgs;
  }

  try {
    cargs.lambda_set = lam->count() > 0;
    if (construct->parsed()) return run_construct(cargs);
    if (verify->parsed())
      return run_verify(v_policy, v_prior, v_uspec, v_grid, v_K, v_lp_tol, v_csv);
    if (bestr->parsed())
      return run_best_response(b_opponent, b_prior, b_uspec, b_grid, b_K, b_lp_tol, b_out);
    if (pos->parsed()) return run_pos(p_family, p_lambda, p_uspec, p_n, p_csv);
    if (region->parsed()) return run_region(r_target, r_lambda, r_n, r_step, r_out);
    if (sweep->parsed()) return run_sweep(s_spec, s_out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const equilibria::RegionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRegion;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgs;
  }
  return 0;
}
