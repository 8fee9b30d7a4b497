#include "persuasion/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "persuasion/payoff.hpp"

namespace persuasion::lp {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::stalled: return "stalled";
  }
  return "unknown";
}

ColumnSource::PriceResult ColumnSource::price(std::span<const double> y, double tol, bool bland,
                                              bool phase1) const {
  PriceResult result;
  const int m = num_rows();
  std::vector<double> col(m);
  const std::size_t n = num_columns();
  double best = tol;
  double max_rc = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    column(j, col.data());
    double dot = 0.0;
    for (int i = 0; i < m; ++i) dot += y[i] * col[i];
    const double d = (phase1 ? 0.0 : objective(j)) - dot;
    max_rc = std::max(max_rc, d);
    if (d > best) {
      result.found = true;
      result.best_j = j;
      result.best_reduced_cost = d;
      best = d;
      if (bland) break;
    }
  }
  result.max_reduced_cost = max_rc;
  return result;
}

LinearProgram::LinearProgram(std::vector<double> c, std::vector<double> a_column_major,
                             std::vector<double> b)
    : c_(std::move(c)), a_(std::move(a_column_major)), b_(std::move(b)) {
  if (b_.empty() || c_.empty()) throw std::invalid_argument("empty linear program");
  if (a_.size() != c_.size() * b_.size())
    throw std::invalid_argument("constraint matrix size mismatch");
  if (b_.size() > 64) throw std::invalid_argument("at most 64 rows supported");
  if (c_.size() > kMaxLpColumns) throw std::invalid_argument("too many variables");
}

void LinearProgram::column(std::size_t j, double* out) const {
  const std::size_t m = b_.size();
  const double* src = a_.data() + j * m;
  for (std::size_t i = 0; i < m; ++i) out[i] = src[i];
}

std::vector<double> SimplexSolution::dense_solution(std::size_t num_columns) const {
  std::vector<double> x(num_columns, 0.0);
  for (const auto& [j, v] : support)
    if (j < num_columns) x[j] = v;
  return x;
}

double HyperplaneCertificate::evaluate(std::span<const double> q) const {
  double value = beta;
  for (std::size_t j = 0; j < alpha.size(); ++j) value += alpha[j] * q[j];
  return value;
}

namespace {

constexpr double kPivotTol = 1e-11;

class SimplexEngine {
 public:
  SimplexEngine(const ColumnSource& cols, std::span<const double> b, const SimplexOptions& opts)
      : cols_(cols),
        opts_(opts),
        m_(cols.num_rows()),
        num_cols_(cols.num_columns()),
        b_(b.begin(), b.end()),
        row_sign_(m_, 1.0) {
    if (static_cast<int>(b.size()) != m_) throw std::invalid_argument("rhs size mismatch");
    if (m_ < 1 || m_ > 64) throw std::invalid_argument("row count outside [1, 64]");
    if (num_cols_ == 0) throw std::invalid_argument("no variables");
    if (num_cols_ > kMaxLpColumns) throw std::invalid_argument("too many variables");
    for (int i = 0; i < m_; ++i) {
      if (b_[i] < 0.0) {
        b_[i] = -b_[i];
        row_sign_[i] = -1.0;
      }
    }
    basic_.resize(m_);
    for (int i = 0; i < m_; ++i) basic_[i] = num_cols_ + i;  // artificial start basis
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
    stall_limit_ = std::min<std::size_t>(10 * (m_ + num_cols_), 10000);
  }

  SimplexSolution run() {
    SimplexSolution sol;
    if (!iterate(/*phase1=*/true, sol)) return sol;

    // Phase 1 maximizes -sum of artificials; feasible iff it reaches ~0.
    double infeasibility = 0.0;
    compute_xb();
    for (int i = 0; i < m_; ++i)
      if (basic_[i] >= num_cols_) infeasibility += std::max(xb_[i], 0.0);
    double scale = 1.0;
    for (double v : b_) scale = std::max(scale, std::abs(v));
    if (infeasibility > opts_.tol * scale) {
      sol.status = LpStatus::infeasible;
      sol.iterations = iterations_;
      return sol;
    }

    if (!iterate(/*phase1=*/false, sol)) return sol;
    finalize(sol);
    return sol;
  }

 private:
  bool is_artificial(std::size_t id) const { return id >= num_cols_; }

  void fetch_column(std::size_t id, double* out) {
    if (is_artificial(id)) {
      for (int i = 0; i < m_; ++i) out[i] = 0.0;
      out[id - num_cols_] = 1.0;
      return;
    }
    cols_.column(id, out);
    for (int i = 0; i < m_; ++i) out[i] *= row_sign_[i];
  }

  double cost(std::size_t id, bool phase1) const {
    if (phase1) return is_artificial(id) ? -1.0 : 0.0;
    return is_artificial(id) ? 0.0 : cols_.objective(id);
  }

  void compute_xb() {
    xb_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double acc = 0.0;
      const double* row = binv_.data() + static_cast<std::size_t>(i) * m_;
      for (int k = 0; k < m_; ++k) acc += row[k] * b_[k];
      xb_[i] = acc;
    }
  }

  void compute_duals(bool phase1) {
    y_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double ci = cost(basic_[i], phase1);
      if (ci == 0.0) continue;
      const double* row = binv_.data() + static_cast<std::size_t>(i) * m_;
      for (int k = 0; k < m_; ++k) y_[k] += ci * row[k];
    }
  }

  bool refactorize() {
    // Rebuild binv from the basic columns by Gauss-Jordan with partial pivoting.
    std::vector<double> mat(static_cast<std::size_t>(m_) * m_);
    std::vector<double> col(m_);
    for (int j = 0; j < m_; ++j) {
      fetch_column(basic_[j], col.data());
      for (int i = 0; i < m_; ++i) mat[static_cast<std::size_t>(i) * m_ + j] = col[i];
    }
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int piv = c;
      for (int i = c + 1; i < m_; ++i)
        if (std::abs(mat[static_cast<std::size_t>(i) * m_ + c]) >
            std::abs(mat[static_cast<std::size_t>(piv) * m_ + c]))
          piv = i;
      if (std::abs(mat[static_cast<std::size_t>(piv) * m_ + c]) < 1e-14) return false;
      if (piv != c) {
        for (int k = 0; k < m_; ++k) {
          std::swap(mat[static_cast<std::size_t>(piv) * m_ + k],
                    mat[static_cast<std::size_t>(c) * m_ + k]);
          std::swap(inv[static_cast<std::size_t>(piv) * m_ + k],
                    inv[static_cast<std::size_t>(c) * m_ + k]);
        }
      }
      const double p = mat[static_cast<std::size_t>(c) * m_ + c];
      for (int k = 0; k < m_; ++k) {
        mat[static_cast<std::size_t>(c) * m_ + k] /= p;
        inv[static_cast<std::size_t>(c) * m_ + k] /= p;
      }
      for (int i = 0; i < m_; ++i) {
        if (i == c) continue;
        const double f = mat[static_cast<std::size_t>(i) * m_ + c];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          mat[static_cast<std::size_t>(i) * m_ + k] -= f * mat[static_cast<std::size_t>(c) * m_ + k];
          inv[static_cast<std::size_t>(i) * m_ + k] -= f * inv[static_cast<std::size_t>(c) * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    return true;
  }

  // Runs simplex iterations for one phase; returns false with sol filled when
  // the solve terminates abnormally.
  bool iterate(bool phase1, SimplexSolution& sol) {
    bool bland = opts_.pivot_rule == PivotRule::bland;
    std::size_t stall = 0;
    double best_obj = -std::numeric_limits<double>::infinity();
    std::vector<double> w(m_), y_adj(m_), col(m_);
    int pivots_since_refactor = 0;

    while (true) {
      if (iterations_ >= opts_.max_iterations) {
        sol.status = LpStatus::stalled;
        sol.iterations = iterations_;
        return false;
      }
      if (pivots_since_refactor >= 64) {
        if (!refactorize()) {
          sol.status = LpStatus::stalled;
          sol.iterations = iterations_;
          return false;
        }
        pivots_since_refactor = 0;
      }
      compute_xb();
      compute_duals(phase1);

      double obj = 0.0;
      for (int i = 0; i < m_; ++i) obj += cost(basic_[i], phase1) * xb_[i];
      if (obj > best_obj + 1e-12) {
        best_obj = obj;
        stall = 0;
      } else if (++stall > stall_limit_) {
        if (!bland) {
          bland = true;
          sol.used_bland_fallback = true;
          stall = 0;
        } else {
          sol.status = LpStatus::stalled;
          sol.iterations = iterations_;
          return false;
        }
      }

      for (int i = 0; i < m_; ++i) y_adj[i] = y_[i] * row_sign_[i];
      const auto priced = cols_.price(y_adj, opts_.tol, bland, phase1);
      if (!priced.found) return true;  // phase optimal

      fetch_column(priced.best_j, col.data());
      for (int i = 0; i < m_; ++i) {
        double acc = 0.0;
        const double* row = binv_.data() + static_cast<std::size_t>(i) * m_;
        for (int k = 0; k < m_; ++k) acc += row[k] * col[k];
        w[i] = acc;
      }

      // Ratio test; prefers driving artificials out, then the smallest basic
      // index (deterministic, anti-cycling). Basic artificials sit at zero
      // and must not grow, so a negative direction through their row blocks
      // the step at zero just like a positive one.
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        double ratio;
        if (w[i] > kPivotTol) {
          ratio = std::max(xb_[i], 0.0) / w[i];
        } else if (w[i] < -kPivotTol && is_artificial(basic_[i]) && xb_[i] <= opts_.tol) {
          ratio = 0.0;
        } else {
          continue;
        }
        bool better = ratio < best_ratio - 1e-12;
        if (!better && ratio < best_ratio + 1e-12 && leave >= 0) {
          const bool cand_art = is_artificial(basic_[i]);
          const bool cur_art = is_artificial(basic_[leave]);
          if (cand_art != cur_art)
            better = cand_art;
          else
            better = basic_[i] < basic_[leave];
        }
        if (leave < 0 || better) {
          leave = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
      if (leave < 0) {
        sol.status = phase1 ? LpStatus::stalled : LpStatus::unbounded;
        sol.iterations = iterations_;
        return false;
      }

      // eta update of binv
      const double pivot = w[leave];
      double* prow = binv_.data() + static_cast<std::size_t>(leave) * m_;
      for (int k = 0; k < m_; ++k) prow[k] /= pivot;
      for (int i = 0; i < m_; ++i) {
        if (i == leave || w[i] == 0.0) continue;
        double* row = binv_.data() + static_cast<std::size_t>(i) * m_;
        for (int k = 0; k < m_; ++k) row[k] -= w[i] * prow[k];
      }
      basic_[leave] = priced.best_j;
      ++iterations_;
      ++pivots_since_refactor;
    }
  }

  void finalize(SimplexSolution& sol) {
    compute_xb();
    compute_duals(/*phase1=*/false);

    sol.status = LpStatus::optimal;
    sol.iterations = iterations_;
    sol.duals.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) sol.duals[i] = y_[i] * row_sign_[i];

    double value = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (is_artificial(basic_[i])) continue;
      sol.support.emplace_back(basic_[i], std::max(xb_[i], 0.0));
      value += cols_.objective(basic_[i]) * std::max(xb_[i], 0.0);
    }
    std::sort(sol.support.begin(), sol.support.end());
    sol.value = value;

    // residual b - A x over the support, in the sign-flipped space
    std::vector<double> residual(b_);
    std::vector<double> col(m_);
    for (const auto& [j, v] : sol.support) {
      fetch_column(j, col.data());
      for (int i = 0; i < m_; ++i) residual[i] -= v * col[i];
    }
    double rmax = 0.0;
    for (double r : residual) rmax = std::max(rmax, std::abs(r));
    sol.primal_residual = rmax;

    double by = 0.0;
    for (int i = 0; i < m_; ++i) by += b_[i] * row_sign_[i] * sol.duals[i];
    sol.duality_gap = std::abs(value - by);

    std::vector<double> y_adj(m_);
    for (int i = 0; i < m_; ++i) y_adj[i] = y_[i] * row_sign_[i];
    const auto priced = cols_.price(y_adj, opts_.tol, /*bland=*/false, /*phase1=*/false);
    sol.max_reduced_cost = priced.max_reduced_cost;
  }

  const ColumnSource& cols_;
  SimplexOptions opts_;
  int m_;
  std::size_t num_cols_;
  std::vector<double> b_;
  std::vector<double> row_sign_;
  std::vector<std::size_t> basic_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  std::vector<double> y_;
  std::size_t iterations_ = 0;
  std::size_t stall_limit_ = 10000;
};

// Columns of the best-response LP: (q, 1) per grid point, generated on the fly.
class GridColumns : public ColumnSource {
 public:
  GridColumns(const Grid& grid, const std::vector<double>& objective)
      : grid_(grid), c_(objective) {
    if (c_.size() != grid.size()) throw std::invalid_argument("objective size mismatch");
  }

  std::size_t num_columns() const override { return grid_.size(); }
  int num_rows() const override { return grid_.n() + 1; }
  double objective(std::size_t j) const override { return c_[j]; }

  void column(std::size_t j, double* out) const override {
    grid_.point(j, out);
    out[grid_.n()] = 1.0;
  }

  PriceResult price(std::span<const double> y, double tol, bool bland,
                    bool phase1) const override {
    PriceResult result;
    const int n = grid_.n();
    const int P = grid_.points_per_axis();

    // per-axis tables of y_d * coordinate
    std::vector<double> tabs(static_cast<std::size_t>(n) * P);
    for (int d = 0; d < n; ++d)
      for (int i = 0; i < P; ++i)
        tabs[static_cast<std::size_t>(d) * P + i] = y[d] * grid_.coordinate(i);
    const double base = y[n];

    int digits[16] = {0};
    double best = tol;
    double max_rc = -std::numeric_limits<double>::infinity();
    const std::size_t total = grid_.size();
    double high = base;  // y contribution of axes 1..n-1
    for (int d = 1; d < n; ++d) high += tabs[static_cast<std::size_t>(d) * P];

    std::size_t j = 0;
    while (j < total) {
      for (int i0 = 0; i0 < P; ++i0, ++j) {
        const double dot = high + tabs[i0];
        const double d = (phase1 ? 0.0 : c_[j]) - dot;
        if (d > max_rc) max_rc = d;
        if (d > best) {
          result.found = true;
          result.best_j = j;
          result.best_reduced_cost = d;
          best = d;
          if (bland) {
            result.max_reduced_cost = max_rc;
            return result;
          }
        }
      }
      // carry into higher axes and rebuild their contribution
      int d = 1;
      for (; d < n; ++d) {
        if (++digits[d] < P) break;
        digits[d] = 0;
      }
      if (d >= n) break;
      high = base;
      for (int k = 1; k < n; ++k) high += tabs[static_cast<std::size_t>(k) * P + digits[k]];
    }
    result.max_reduced_cost = max_rc;
    return result;
  }

 private:
  const Grid& grid_;
  const std::vector<double>& c_;
};

}  // namespace

SimplexSolution solve(const ColumnSource& columns, std::span<const double> b,
                      const SimplexOptions& opts) {
  SimplexEngine engine(columns, b, opts);
  return engine.run();
}

BestResponse best_response(const SignalingPolicy& F, const Prior& prior, const UtilityFunction& V,
                           const Grid& grid, int K, const SimplexOptions& opts,
                           const std::vector<double>* objective) {
  if (grid.n() != F.n() || V.n() != F.n()) throw std::invalid_argument("dimension mismatch");

  std::vector<double> local;
  if (objective == nullptr) {
    local = payoff::grid_objective(grid, F, V, K);
    objective = &local;
  }
  GridColumns cols(grid, *objective);

  std::vector<double> b(grid.n() + 1, prior.lambda());
  b[grid.n()] = 1.0;

  BestResponse br;
  SimplexSolution sol = solve(cols, b, opts);
  br.status = sol.status;
  br.lp_iterations = sol.iterations;
  if (sol.status != LpStatus::optimal) return br;

  br.value = sol.value;
  br.duality_gap = sol.duality_gap;
  br.certificate.alpha.assign(sol.duals.begin(), sol.duals.begin() + grid.n());
  br.certificate.beta = sol.duals[grid.n()];
  br.max_envelope_violation = sol.max_reduced_cost;

  std::vector<Atom> atoms;
  double total = 0.0;
  for (const auto& [j, v] : sol.support) {
    if (v < kWeightTol) continue;
    atoms.push_back({v, grid.point(j)});
    total += v;
  }
  double slack = 0.0;
  for (const auto& [j, v] : sol.support) {
    if (v < kWeightTol) continue;
    const auto q = grid.point(j);
    slack = std::max(slack, std::abs((*objective)[j] - br.certificate.evaluate(q)));
  }
  br.support_slack = slack;
  for (Atom& a : atoms) a.weight /= total;
  br.policy.emplace(grid.n(), std::move(atoms), std::vector<Segment>{});
  return br;
}

}  // namespace persuasion::lp
