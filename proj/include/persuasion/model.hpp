#ifndef PERSUASION_MODEL_HPP
#define PERSUASION_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

// Core domain types: priors, sender utility functions, signaling policies
// (mixtures of point masses and uniform line segments in posterior space),
// and the discretization grid used by the best-response LP.

namespace persuasion {

inline constexpr double kWeightTol = 1e-12;     // policy weights must sum to 1 within this
inline constexpr double kBayesTol = 1e-9;       // Bayes-plausibility residual tolerance
inline constexpr double kCoordSlack = 1e-12;    // slack allowed on the [0,1] coordinate box

// Probability that a sender's quality is high. Must lie strictly inside (0,1).
class Prior {
 public:
  explicit Prior(double lambda);
  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

enum class UtilityKind { anonymous, general };

enum class Modularity { strictly_supermodular, strictly_submodular, additive, mixed };

struct UtilityViolation {
  std::string property;   // "normalization", "monotonicity", "non-degeneracy", "dimension"
  std::uint32_t subset_a = 0;  // witnessing pair (bitmask); subset_a ⊂ subset_b for monotonicity
  std::uint32_t subset_b = 0;
  std::string detail;
};

struct UtilityValidation {
  std::vector<UtilityViolation> violations;
  bool strictly_monotone = false;
  // Anonymous classification by the increments v(k+1)-v(k); mixed when neither.
  std::optional<Modularity> classification;
  bool valid() const { return violations.empty(); }
};

// Monotone set function V on subsets of [n], normalized so V(empty) = 0.
// Anonymous form stores v(0..n) with V(S) = v(|S|); general form stores the
// full 2^n table indexed by receiver bitmask (n <= 16).
class UtilityFunction {
 public:
  static UtilityFunction anonymous(int n, std::vector<double> v);
  static UtilityFunction general(int n, std::vector<double> table);
  // v(k) = k^tau, v(0) = 0. tau > 1 strictly supermodular, tau < 1 strictly submodular.
  static UtilityFunction power(int n, double tau);
  static UtilityFunction additive(int n, double per_receiver = 1.0);

  int n() const { return n_; }
  UtilityKind kind() const { return kind_; }
  bool is_anonymous() const { return kind_ == UtilityKind::anonymous; }

  double value(std::uint32_t subset) const;
  double v(int k) const;                       // anonymous only
  const std::vector<double>& anonymous_values() const;
  double vmax() const;                         // V([n])

  bool is_monotone() const;
  bool is_strictly_monotone() const;
  bool is_non_degenerate() const;
  bool is_additive() const;                    // V(S)+V(T)=V(S∪T) for disjoint S,T
  Modularity modularity() const;               // anonymous only

 private:
  UtilityFunction(int n, UtilityKind kind, std::vector<double> values);

  int n_;
  UtilityKind kind_;
  std::vector<double> values_;  // size n+1 (anonymous) or 2^n (general)
};

// Lists every violated structural property with a witnessing pair of subsets.
// Empty report means the function is a valid utility for this model.
UtilityValidation validate_utility(const UtilityFunction& V);

struct Atom {
  double weight;
  std::vector<double> q;
};

// Uniform density along the segment from a to b in the affine parameter
// t in [0,1]; a != b is required.
struct Segment {
  double weight;
  std::vector<double> a;
  std::vector<double> b;
};

// A distribution over posterior vectors in [0,1]^n given as point masses plus
// uniform line segments. Weights are positive (>= 1e-12; smaller weights are
// rejected at construction rather than dropped) and sum to 1 within 1e-12.
// Immutable after construction.
class SignalingPolicy {
 public:
  SignalingPolicy(int n, std::vector<Atom> atoms, std::vector<Segment> segments);

  int n() const { return n_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool atoms_only() const { return segments_.empty(); }
  double total_weight() const;

  // Marginal mean in dimension j (atoms + segment midpoints, exact).
  double marginal_mean(int j) const;

 private:
  int n_;
  std::vector<Atom> atoms_;
  std::vector<Segment> segments_;
};

// residual_j = marginal mean in dimension j minus lambda.
std::vector<double> check_bayes_plausible(const SignalingPolicy& g, const Prior& prior);
bool is_bayes_plausible(const SignalingPolicy& g, const Prior& prior, double tol = kBayesTol);

// Replaces each segment by K atoms at the parameter midpoints t=(k+1/2)/K,
// each carrying weight w/K. Preserves total weight and per-dimension marginal
// means exactly (midpoint symmetry).
SignalingPolicy discretize_policy(const SignalingPolicy& g, int atoms_per_segment);

// Uniform tensor grid over [0,1]^n containing 0 and 1 on every axis.
class Grid {
 public:
  Grid(int n, int points_per_axis);

  int n() const { return n_; }
  int points_per_axis() const { return points_per_axis_; }
  double step() const { return 1.0 / (points_per_axis_ - 1); }
  std::size_t size() const { return size_; }

  double coordinate(int i) const { return static_cast<double>(i) / (points_per_axis_ - 1); }
  // Decodes a flat index into grid coordinates (axis 0 varies fastest).
  void point(std::size_t index, double* out) const;
  std::vector<double> point(std::size_t index) const;

 private:
  int n_;
  int points_per_axis_;
  std::size_t size_;
};

// --- file formats ------------------------------------------------------
//
// Policy files are line oriented and round-trip doubles bit-exactly
// (17 significant digits):
//   policy v1
//   n=<int> lambda=<float>
//   atom w=<float> q=<f>,<f>,...
//   segment w=<float> a=<f>,... b=<f>,...
//
// Utility files:
//   utility v1
//   n=<int>
//   anonymous <v0>,<v1>,...,<vn>        (or one `set <bitmask> <value>` per subset)

struct PolicyFile {
  double lambda = 0.0;
  SignalingPolicy policy;
};

void write_policy(std::ostream& os, const SignalingPolicy& g, double lambda);
void write_policy_file(const std::string& path, const SignalingPolicy& g, double lambda);
PolicyFile read_policy(std::istream& is);
PolicyFile read_policy_file(const std::string& path);

void write_utility(std::ostream& os, const UtilityFunction& V);
void write_utility_file(const std::string& path, const UtilityFunction& V);
UtilityFunction read_utility(std::istream& is);
UtilityFunction read_utility_file(const std::string& path);

// Formats a double with 17 significant digits (shortest round-trip safe form).
std::string format_double(double x);

}  // namespace persuasion

#endif  // PERSUASION_MODEL_HPP
