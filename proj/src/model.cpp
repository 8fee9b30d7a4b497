#include "persuasion/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace persuasion {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool in_unit_box(const std::vector<double>& q) {
  for (double x : q) {
    if (!(x >= -kCoordSlack && x <= 1.0 + kCoordSlack)) return false;
  }
  return true;
}

// Kahan-compensated accumulator so that weight sums stay accurate for
// policies with many atoms (fine discretizations).
class CompensatedSum {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

Prior::Prior(double lambda) : lambda_(lambda) {
  require(lambda > 0.0 && lambda < 1.0, "prior lambda must lie in (0,1)");
}

// --- UtilityFunction ----------------------------------------------------

UtilityFunction::UtilityFunction(int n, UtilityKind kind, std::vector<double> values)
    : n_(n), kind_(kind), values_(std::move(values)) {}

UtilityFunction UtilityFunction::anonymous(int n, std::vector<double> v) {
  require(n >= 1 && n <= 24, "anonymous utility needs 1 <= n <= 24");
  require(static_cast<int>(v.size()) == n + 1,
          "anonymous utility needs exactly n+1 values v(0..n)");
  return UtilityFunction(n, UtilityKind::anonymous, std::move(v));
}

UtilityFunction UtilityFunction::general(int n, std::vector<double> table) {
  require(n >= 1 && n <= 16, "general utility needs 1 <= n <= 16");
  require(table.size() == (std::size_t{1} << n),
          "general utility needs a full 2^n table");
  return UtilityFunction(n, UtilityKind::general, std::move(table));
}

UtilityFunction UtilityFunction::power(int n, double tau) {
  std::vector<double> v(n + 1, 0.0);
  for (int k = 1; k <= n; ++k) v[k] = std::pow(static_cast<double>(k), tau);
  return anonymous(n, std::move(v));
}

UtilityFunction UtilityFunction::additive(int n, double per_receiver) {
  std::vector<double> v(n + 1, 0.0);
  for (int k = 1; k <= n; ++k) v[k] = per_receiver * k;
  return anonymous(n, std::move(v));
}

double UtilityFunction::value(std::uint32_t subset) const {
  if (kind_ == UtilityKind::general) {
    require(subset < values_.size(), "subset out of range");
    return values_[subset];
  }
  require(subset < (std::uint32_t{1} << n_), "subset out of range");
  return values_[static_cast<std::size_t>(std::popcount(subset))];
}

double UtilityFunction::v(int k) const {
  require(kind_ == UtilityKind::anonymous, "v(k) is defined for anonymous utilities only");
  require(k >= 0 && k <= n_, "v(k) index out of range");
  return values_[static_cast<std::size_t>(k)];
}

const std::vector<double>& UtilityFunction::anonymous_values() const {
  require(kind_ == UtilityKind::anonymous, "not an anonymous utility");
  return values_;
}

double UtilityFunction::vmax() const {
  return kind_ == UtilityKind::anonymous ? values_.back()
                                         : values_[(std::size_t{1} << n_) - 1];
}

bool UtilityFunction::is_monotone() const {
  if (kind_ == UtilityKind::anonymous) {
    for (int k = 0; k < n_; ++k)
      if (values_[k] > values_[k + 1]) return false;
    return true;
  }
  const std::uint32_t full = std::uint32_t{1} << n_;
  for (std::uint32_t s = 0; s < full; ++s)
    for (int j = 0; j < n_; ++j)
      if (!(s & (1u << j)) && values_[s] > values_[s | (1u << j)]) return false;
  return true;
}

bool UtilityFunction::is_strictly_monotone() const {
  if (kind_ == UtilityKind::anonymous) {
    for (int k = 0; k < n_; ++k)
      if (!(values_[k] < values_[k + 1])) return false;
    return true;
  }
  const std::uint32_t full = std::uint32_t{1} << n_;
  for (std::uint32_t s = 0; s < full; ++s)
    for (int j = 0; j < n_; ++j)
      if (!(s & (1u << j)) && !(values_[s] < values_[s | (1u << j)])) return false;
  return true;
}

bool UtilityFunction::is_non_degenerate() const {
  if (kind_ == UtilityKind::anonymous) {
    for (int k = 0; k < n_; ++k)
      if (values_[k] < values_[k + 1]) return true;
    return false;
  }
  const std::uint32_t full = std::uint32_t{1} << n_;
  for (int j = 0; j < n_; ++j) {
    bool ok = false;
    for (std::uint32_t s = 0; s < full && !ok; ++s)
      if (!(s & (1u << j)) && values_[s] < values_[s | (1u << j)]) ok = true;
    if (!ok) return false;
  }
  return true;
}

bool UtilityFunction::is_additive() const {
  if (kind_ == UtilityKind::anonymous) {
    for (int k = 0; k <= n_; ++k)
      if (std::abs(values_[k] - k * values_[1]) > 1e-12 * (1.0 + std::abs(values_[1])))
        return false;
    return true;
  }
  const std::uint32_t full = std::uint32_t{1} << n_;
  for (std::uint32_t s = 0; s < full; ++s) {
    double sum = 0.0;
    for (int j = 0; j < n_; ++j)
      if (s & (1u << j)) sum += values_[std::uint32_t{1} << j];
    if (std::abs(values_[s] - sum) > 1e-12 * (1.0 + std::abs(sum))) return false;
  }
  return true;
}

Modularity UtilityFunction::modularity() const {
  require(kind_ == UtilityKind::anonymous, "modularity is classified for anonymous utilities");
  bool sup = true, sub = true, add = true;
  for (int k = 0; k + 1 < n_; ++k) {
    const double d0 = values_[k + 1] - values_[k];
    const double d1 = values_[k + 2] - values_[k + 1];
    if (!(d0 < d1)) sup = false;
    if (!(d0 > d1)) sub = false;
    if (d0 != d1) add = false;
  }
  if (add) return Modularity::additive;
  if (sup) return Modularity::strictly_supermodular;
  if (sub) return Modularity::strictly_submodular;
  return Modularity::mixed;
}

UtilityValidation validate_utility(const UtilityFunction& V) {
  UtilityValidation report;
  const int n = V.n();

  if (V.value(0) != 0.0) {
    report.violations.push_back({"normalization", 0, 0, "V(empty) must equal 0"});
  }

  if (V.is_anonymous()) {
    for (int k = 0; k < n; ++k) {
      if (V.v(k) > V.v(k + 1)) {
        report.violations.push_back(
            {"monotonicity", static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k + 1),
             "v(" + std::to_string(k) + ") > v(" + std::to_string(k + 1) + ")"});
      }
    }
    if (!V.is_non_degenerate()) {
      report.violations.push_back({"non-degeneracy", 0, 0, "v is constant"});
    }
    report.classification = V.modularity();
  } else {
    const std::uint32_t full = std::uint32_t{1} << n;
    for (std::uint32_t s = 0; s < full; ++s) {
      for (int j = 0; j < n; ++j) {
        if (s & (1u << j)) continue;
        const std::uint32_t t = s | (1u << j);
        if (V.value(s) > V.value(t)) {
          report.violations.push_back({"monotonicity", s, t,
                                       "V(" + std::to_string(s) + ") > V(" + std::to_string(t) + ")"});
        }
      }
    }
    for (int j = 0; j < n; ++j) {
      bool ok = false;
      for (std::uint32_t s = 0; s < full && !ok; ++s)
        if (!(s & (1u << j)) && V.value(s) < V.value(s | (1u << j))) ok = true;
      if (!ok) {
        report.violations.push_back({"non-degeneracy", static_cast<std::uint32_t>(1u << j), 0,
                                     "receiver " + std::to_string(j) + " never changes V"});
      }
    }
  }

  report.strictly_monotone = V.is_strictly_monotone();
  return report;
}

// --- SignalingPolicy ----------------------------------------------------

SignalingPolicy::SignalingPolicy(int n, std::vector<Atom> atoms, std::vector<Segment> segments)
    : n_(n), atoms_(std::move(atoms)), segments_(std::move(segments)) {
  require(n_ >= 1, "policy needs n >= 1");
  CompensatedSum total;
  for (const Atom& a : atoms_) {
    require(static_cast<int>(a.q.size()) == n_, "atom dimension mismatch");
    require(a.weight >= kWeightTol, "atom weight below 1e-12");
    require(in_unit_box(a.q), "atom coordinate outside [0,1]");
    total.add(a.weight);
  }
  for (const Segment& s : segments_) {
    require(static_cast<int>(s.a.size()) == n_ && static_cast<int>(s.b.size()) == n_,
            "segment dimension mismatch");
    require(s.weight >= kWeightTol, "segment weight below 1e-12");
    require(in_unit_box(s.a) && in_unit_box(s.b), "segment endpoint outside [0,1]");
    require(s.a != s.b, "segment endpoints must differ");
    total.add(s.weight);
  }
  require(std::abs(total.value() - 1.0) <= kWeightTol,
          "policy weights must sum to 1 within 1e-12");
}

double SignalingPolicy::total_weight() const {
  CompensatedSum total;
  for (const Atom& a : atoms_) total.add(a.weight);
  for (const Segment& s : segments_) total.add(s.weight);
  return total.value();
}

double SignalingPolicy::marginal_mean(int j) const {
  require(j >= 0 && j < n_, "dimension out of range");
  CompensatedSum mean;
  for (const Atom& a : atoms_) mean.add(a.weight * a.q[j]);
  for (const Segment& s : segments_) mean.add(s.weight * 0.5 * (s.a[j] + s.b[j]));
  return mean.value();
}

std::vector<double> check_bayes_plausible(const SignalingPolicy& g, const Prior& prior) {
  std::vector<double> residuals(g.n());
  for (int j = 0; j < g.n(); ++j) residuals[j] = g.marginal_mean(j) - prior.lambda();
  return residuals;
}

bool is_bayes_plausible(const SignalingPolicy& g, const Prior& prior, double tol) {
  for (double r : check_bayes_plausible(g, prior))
    if (std::abs(r) > tol) return false;
  return true;
}

SignalingPolicy discretize_policy(const SignalingPolicy& g, int atoms_per_segment) {
  require(atoms_per_segment >= 1, "atoms_per_segment must be >= 1");
  std::vector<Atom> atoms = g.atoms();
  atoms.reserve(atoms.size() + g.segments().size() * atoms_per_segment);
  const int K = atoms_per_segment;
  for (const Segment& s : g.segments()) {
    for (int k = 0; k < K; ++k) {
      const double t = (k + 0.5) / K;
      Atom a;
      a.weight = s.weight / K;
      a.q.resize(g.n());
      for (int j = 0; j < g.n(); ++j) a.q[j] = s.a[j] + (s.b[j] - s.a[j]) * t;
      atoms.push_back(std::move(a));
    }
  }
  return SignalingPolicy(g.n(), std::move(atoms), {});
}

// --- Grid ----------------------------------------------------------------

Grid::Grid(int n, int points_per_axis) : n_(n), points_per_axis_(points_per_axis) {
  require(n >= 1, "grid needs n >= 1");
  require(points_per_axis >= 2, "grid needs at least 2 points per axis");
  size_ = 1;
  for (int d = 0; d < n; ++d) {
    require(size_ <= std::size_t{100'000'000} / points_per_axis, "grid too large");
    size_ *= static_cast<std::size_t>(points_per_axis);
  }
}

void Grid::point(std::size_t index, double* out) const {
  for (int d = 0; d < n_; ++d) {
    out[d] = coordinate(static_cast<int>(index % points_per_axis_));
    index /= points_per_axis_;
  }
}

std::vector<double> Grid::point(std::size_t index) const {
  std::vector<double> q(n_);
  point(index, q.data());
  return q;
}

// --- file IO ---------------------------------------------------------------

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::vector<double> parse_csv_doubles(const std::string& text) {
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

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

// Reads "key=value" from a token, checking the key.
std::string expect_kv(const std::string& token, const std::string& key) {
  if (token.rfind(key + "=", 0) != 0)
    throw std::runtime_error("expected '" + key + "=...', got '" + token + "'");
  return token.substr(key.size() + 1);
}

}  // namespace

void write_policy(std::ostream& os, const SignalingPolicy& g, double lambda) {
  os << "policy v1\n";
  os << "n=" << g.n() << " lambda=" << format_double(lambda) << "\n";
  for (const Atom& a : g.atoms())
    os << "atom w=" << format_double(a.weight) << " q=" << join_doubles(a.q) << "\n";
  for (const Segment& s : g.segments())
    os << "segment w=" << format_double(s.weight) << " a=" << join_doubles(s.a)
       << " b=" << join_doubles(s.b) << "\n";
}

void write_policy_file(const std::string& path, const SignalingPolicy& g, double lambda) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_policy(os, g, lambda);
}

PolicyFile read_policy(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "policy v1")
    throw std::runtime_error("policy file must start with 'policy v1'");
  if (!std::getline(is, line)) throw std::runtime_error("policy file truncated");
  std::istringstream header(line);
  std::string tok_n, tok_lambda;
  header >> tok_n >> tok_lambda;
  const int n = std::stoi(expect_kv(tok_n, "n"));
  const double lambda = std::stod(expect_kv(tok_lambda, "lambda"));

  std::vector<Atom> atoms;
  std::vector<Segment> segments;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "atom") {
      std::string tw, tq;
      ls >> tw >> tq;
      atoms.push_back({std::stod(expect_kv(tw, "w")), parse_csv_doubles(expect_kv(tq, "q"))});
    } else if (kind == "segment") {
      std::string tw, ta, tb;
      ls >> tw >> ta >> tb;
      segments.push_back({std::stod(expect_kv(tw, "w")), parse_csv_doubles(expect_kv(ta, "a")),
                          parse_csv_doubles(expect_kv(tb, "b"))});
    } else {
      throw std::runtime_error("unknown policy line kind '" + kind + "'");
    }
  }
  return PolicyFile{lambda, SignalingPolicy(n, std::move(atoms), std::move(segments))};
}

PolicyFile read_policy_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open policy file '" + path + "'");
  return read_policy(is);
}

void write_utility(std::ostream& os, const UtilityFunction& V) {
  os << "utility v1\n";
  os << "n=" << V.n() << "\n";
  if (V.is_anonymous()) {
    os << "anonymous " << join_doubles(V.anonymous_values()) << "\n";
  } else {
    const std::uint32_t full = std::uint32_t{1} << V.n();
    for (std::uint32_t s = 0; s < full; ++s)
      os << "set " << s << " " << format_double(V.value(s)) << "\n";
  }
}

void write_utility_file(const std::string& path, const UtilityFunction& V) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_utility(os, V);
}

UtilityFunction read_utility(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "utility v1")
    throw std::runtime_error("utility file must start with 'utility v1'");
  if (!std::getline(is, line)) throw std::runtime_error("utility file truncated");
  const int n = std::stoi(expect_kv(line, "n"));

  std::vector<double> table;
  bool saw_set = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "anonymous") {
      std::string values;
      ls >> values;
      return UtilityFunction::anonymous(n, parse_csv_doubles(values));
    }
    if (kind == "set") {
      if (!saw_set) {
        table.assign(std::size_t{1} << n, std::nan(""));
        saw_set = true;
      }
      std::uint32_t mask;
      double value;
      ls >> mask >> value;
      if (mask >= table.size()) throw std::runtime_error("subset bitmask out of range");
      table[mask] = value;
      continue;
    }
    throw std::runtime_error("unknown utility line kind '" + kind + "'");
  }
  if (!saw_set) throw std::runtime_error("utility file has no values");
  for (double x : table)
    if (std::isnan(x)) throw std::runtime_error("utility table is missing subsets");
  return UtilityFunction::general(n, std::move(table));
}

UtilityFunction read_utility_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open utility file '" + path + "'");
  return read_utility(is);
}

}  // namespace persuasion
