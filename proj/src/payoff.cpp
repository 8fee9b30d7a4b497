#include "persuasion/payoff.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace persuasion::payoff {

namespace {

int popcount(std::uint32_t x) { return std::popcount(x); }

// Pascal triangle row t scaled by 2^-t.
std::vector<std::vector<double>> binomial_half_rows(int n) {
  std::vector<std::vector<double>> rows(n + 1);
  rows[0] = {1.0};
  for (int t = 1; t <= n; ++t) {
    rows[t].assign(t + 1, 0.0);
    for (int k = 0; k <= t; ++k) {
      const double above = k < t ? rows[t - 1][k] : 0.0;
      const double left = k > 0 ? rows[t - 1][k - 1] : 0.0;
      rows[t][k] = 0.5 * (above + left);
    }
  }
  return rows;
}

}  // namespace

WinOutcome classify(std::span<const double> q, std::span<const double> p, double tie_tol) {
  if (q.size() != p.size()) throw std::invalid_argument("signal dimension mismatch");
  WinOutcome out;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double diff = p[j] - q[j];
    if (diff < -tie_tol) {
      out.wins |= 1u << j;
    } else if (diff > tie_tol) {
      out.losses |= 1u << j;
    } else {
      out.ties |= 1u << j;
    }
  }
  return out;
}

AnonymousPayoffTable::AnonymousPayoffTable(const UtilityFunction& V) {
  const int n = V.n();
  stride_ = n + 1;
  table_.assign(static_cast<std::size_t>(stride_) * stride_, 0.0);
  const auto rows = binomial_half_rows(n);
  for (int w = 0; w <= n; ++w) {
    for (int t = 0; w + t <= n; ++t) {
      double acc = 0.0;
      for (int k = 0; k <= t; ++k) acc += rows[t][k] * V.v(w + k);
      table_[w * stride_ + t] = acc;
    }
  }
}

double win_set_probability(std::span<const double> q, std::uint32_t S, const SignalingPolicy& F,
                           double tie_tol) {
  if (!F.atoms_only()) throw std::invalid_argument("win_set_probability needs an atomic policy");
  if (static_cast<int>(q.size()) != F.n()) throw std::invalid_argument("dimension mismatch");
  if (S >= (std::uint32_t{1} << F.n())) throw std::invalid_argument("S is not a subset of [n]");
  double prob = 0.0;
  for (const Atom& a : F.atoms()) {
    const WinOutcome o = classify(q, a.q, tie_tol);
    if ((o.wins & ~S) || (o.losses & S)) continue;
    if ((S & ~o.wins) & ~o.ties) continue;  // S must be wins plus some ties
    prob += a.weight * std::ldexp(1.0, -popcount(o.ties));
  }
  return prob;
}

namespace {

double general_tie_average(const UtilityFunction& V, std::uint32_t wins, std::uint32_t ties) {
  // Average of V(wins ∪ T') over all tie assignments T' ⊆ ties.
  double acc = 0.0;
  std::uint32_t sub = ties;
  while (true) {
    acc += V.value(wins | sub);
    if (sub == 0) break;
    sub = (sub - 1) & ties;
  }
  return std::ldexp(acc, -popcount(ties));
}

}  // namespace

double expected_payoff(std::span<const double> q, const SignalingPolicy& F,
                       const UtilityFunction& V, double tie_tol) {
  if (!F.atoms_only()) throw std::invalid_argument("expected_payoff needs an atomic policy");
  if (static_cast<int>(q.size()) != F.n() || V.n() != F.n())
    throw std::invalid_argument("dimension mismatch");
  double acc = 0.0;
  if (V.is_anonymous()) {
    const AnonymousPayoffTable table(V);
    for (const Atom& a : F.atoms()) {
      const WinOutcome o = classify(q, a.q, tie_tol);
      acc += a.weight * table(popcount(o.wins), popcount(o.ties));
    }
  } else {
    for (const Atom& a : F.atoms()) {
      const WinOutcome o = classify(q, a.q, tie_tol);
      acc += a.weight * general_tie_average(V, o.wins, o.ties);
    }
  }
  return acc;
}

double expected_payoff_exact(std::span<const double> q, const SignalingPolicy& F,
                             const UtilityFunction& V, double tie_tol) {
  if (static_cast<int>(q.size()) != F.n() || V.n() != F.n())
    throw std::invalid_argument("dimension mismatch");
  return expected_payoff_exact(q, F.atoms(), F.segments(), V, tie_tol);
}

double expected_payoff_exact(std::span<const double> q, const std::vector<Atom>& atoms,
                             const std::vector<Segment>& segments, const UtilityFunction& V,
                             double tie_tol) {
  const int n = static_cast<int>(q.size());
  double acc = 0.0;

  for (const Atom& a : atoms) {
    const WinOutcome o = classify(q, a.q, tie_tol);
    acc += a.weight * general_tie_average(V, o.wins, o.ties);
  }

  std::vector<double> cuts;
  for (const Segment& s : segments) {
    cuts.clear();
    cuts.push_back(0.0);
    cuts.push_back(1.0);
    for (int j = 0; j < n; ++j) {
      if (s.a[j] == s.b[j]) continue;
      const double t = (q[j] - s.a[j]) / (s.b[j] - s.a[j]);
      if (t > 0.0 && t < 1.0) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double len = cuts[i + 1] - cuts[i];
      if (len <= 0.0) continue;
      const double t = 0.5 * (cuts[i] + cuts[i + 1]);
      std::uint32_t wins = 0, ties = 0;
      for (int j = 0; j < n; ++j) {
        if (s.a[j] == s.b[j]) {
          const double diff = s.a[j] - q[j];
          if (diff < -tie_tol) {
            wins |= 1u << j;
          } else if (!(diff > tie_tol)) {
            ties |= 1u << j;
          }
        } else {
          const double c = s.a[j] + (s.b[j] - s.a[j]) * t;
          if (c < q[j]) wins |= 1u << j;  // interior crossings carry no mass
        }
      }
      acc += s.weight * len * general_tie_average(V, wins, ties);
    }
  }
  return acc;
}

namespace {

bool same_policy(const SignalingPolicy& G, const SignalingPolicy& F) {
  if (&G == &F) return true;
  if (G.n() != F.n() || G.atoms().size() != F.atoms().size() ||
      G.segments().size() != F.segments().size())
    return false;
  for (std::size_t i = 0; i < G.atoms().size(); ++i) {
    if (G.atoms()[i].weight != F.atoms()[i].weight || G.atoms()[i].q != F.atoms()[i].q)
      return false;
  }
  for (std::size_t i = 0; i < G.segments().size(); ++i) {
    const Segment& x = G.segments()[i];
    const Segment& y = F.segments()[i];
    if (x.weight != y.weight || x.a != y.a || x.b != y.b) return false;
  }
  return true;
}

}  // namespace

double welfare(const SignalingPolicy& G, const SignalingPolicy& F, const UtilityFunction& V,
               int K) {
  const SignalingPolicy Gd = discretize_policy(G, K);
  if (same_policy(G, F)) {
    const DiscretizedPayoff payoff(G, V, K);
    double half = 0.0;
    for (const Atom& a : Gd.atoms()) half += a.weight * payoff(a.q);
    return 2.0 * half;
  }
  const SignalingPolicy Fd = discretize_policy(F, K);
  const DiscretizedPayoff vs_f(F, V, K);
  const DiscretizedPayoff vs_g(G, V, K);
  double total = 0.0;
  for (const Atom& a : Gd.atoms()) total += a.weight * vs_f(a.q);
  for (const Atom& b : Fd.atoms()) total += b.weight * vs_g(b.q);
  return total;
}

// --- grid objective -------------------------------------------------------

namespace {

// Midpoint atoms of one segment coordinate, c(k) = a + (b-a)*(k+1/2)/K, are
// monotone in k. For one query value x the statuses along k form
// [0,kA) -> first, [kA,kB) -> tie, [kB,K) -> last, where first/last are
// win/lose (ascending) or lose/win (descending).
struct CoordStatusRuns {
  int kA = 0;
  int kB = 0;
  bool ascending = true;
  bool constant = false;
  int constant_status = 0;  // 0 win, 1 tie, 2 lose
};

double coord_value(const Segment& s, int j, int k, int K) {
  const double t = (k + 0.5) / K;
  return s.a[j] + (s.b[j] - s.a[j]) * t;
}

template <typename Pred>
int partition_point_k(int K, Pred holds_below) {
  // first k in [0,K] where holds_below(k) is false; holds_below is monotone
  int lo = 0, hi = K;
  while (lo < hi) {
    const int midk = lo + (hi - lo) / 2;
    if (holds_below(midk))
      lo = midk + 1;
    else
      hi = midk;
  }
  return lo;
}

CoordStatusRuns coord_runs(const Segment& s, int j, double x, int K, double tie_tol) {
  CoordStatusRuns runs;
  if (s.a[j] == s.b[j]) {
    runs.constant = true;
    const double diff = s.a[j] - x;
    runs.constant_status = diff < -tie_tol ? 0 : (diff > tie_tol ? 2 : 1);
    return runs;
  }
  if (s.b[j] > s.a[j]) {
    runs.ascending = true;
    runs.kA = partition_point_k(K, [&](int k) { return coord_value(s, j, k, K) - x < -tie_tol; });
    runs.kB = partition_point_k(K, [&](int k) { return !(coord_value(s, j, k, K) - x > tie_tol); });
  } else {
    runs.ascending = false;
    runs.kA = partition_point_k(K, [&](int k) { return coord_value(s, j, k, K) - x > tie_tol; });
    runs.kB = partition_point_k(K, [&](int k) { return !(coord_value(s, j, k, K) - x < -tie_tol); });
  }
  return runs;
}

// Precomputed runs for every (coordinate, grid axis index) of one segment.
struct SegmentGridTable {
  double weight_per_atom;
  std::vector<CoordStatusRuns> runs;  // n * points_per_axis
  int points_per_axis;

  const CoordStatusRuns& at(int j, int axis_index) const {
    return runs[static_cast<std::size_t>(j) * points_per_axis + axis_index];
  }
};

SegmentGridTable build_segment_table(const Segment& s, const Grid& grid, int K, double tie_tol) {
  SegmentGridTable table;
  table.weight_per_atom = s.weight / K;
  table.points_per_axis = grid.points_per_axis();
  table.runs.resize(static_cast<std::size_t>(grid.n()) * grid.points_per_axis());
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.points_per_axis(); ++i)
      table.runs[static_cast<std::size_t>(j) * grid.points_per_axis() + i] =
          coord_runs(s, j, grid.coordinate(i), K, tie_tol);
  return table;
}

struct SweepEvent {
  int k;
  int dwin;
  int dtie;
};

// Sum over the K midpoint atoms of a segment given its per-coordinate
// status runs (unweighted; callers scale by weight/K).
double sweep_runs(const CoordStatusRuns* runs, int n, int K,
                  const AnonymousPayoffTable& payoff_table) {
  SweepEvent events[34];
  int num_events = 0;
  int wins = 0, ties = 0;
  for (int j = 0; j < n; ++j) {
    const CoordStatusRuns& r = runs[j];
    if (r.constant) {
      if (r.constant_status == 0) ++wins;
      if (r.constant_status == 1) ++ties;
      continue;
    }
    if (r.ascending) {
      // win -> tie -> lose
      if (r.kA > 0)
        ++wins;
      else if (r.kB > 0)
        ++ties;
      if (r.kA > 0 && r.kA < K) events[num_events++] = {r.kA, -1, +1};
      if (r.kB > 0 && r.kB < K) events[num_events++] = {r.kB, 0, -1};
    } else {
      // lose -> tie -> win
      if (r.kA == 0 && r.kB == 0)
        ++wins;
      else if (r.kA == 0)
        ++ties;
      if (r.kA > 0 && r.kA < K) events[num_events++] = {r.kA, 0, +1};
      if (r.kB > 0 && r.kB < K) events[num_events++] = {r.kB, +1, -1};
    }
  }
  std::sort(events, events + num_events, [](const SweepEvent& a, const SweepEvent& b) {
    return a.k < b.k;
  });

  double acc = 0.0;
  int prev = 0;
  for (int e = 0; e <= num_events; ++e) {
    const int next = e < num_events ? events[e].k : K;
    if (next > prev) acc += (next - prev) * payoff_table(wins, ties);
    if (e < num_events) {
      wins += events[e].dwin;
      ties += events[e].dtie;
    }
    prev = next;
  }
  return acc;
}

double sweep_segment(const SegmentGridTable& table, const int* digits, int n, int K,
                     const AnonymousPayoffTable& payoff_table) {
  CoordStatusRuns runs[16];
  for (int j = 0; j < n; ++j) runs[j] = table.at(j, digits[j]);
  return sweep_runs(runs, n, K, payoff_table) * table.weight_per_atom;
}

}  // namespace

std::vector<double> grid_objective(const Grid& grid, const SignalingPolicy& F,
                                   const UtilityFunction& V, int K,
                                   const GridObjectiveOptions& opts) {
  if (grid.n() != F.n() || V.n() != F.n()) throw std::invalid_argument("dimension mismatch");
  const std::size_t total = grid.size();
  std::vector<double> out(total);

  int threads = opts.threads > 0 ? opts.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, 16);

  if (!V.is_anonymous()) {
    // general utilities go through plain atom enumeration
    const SignalingPolicy Fd = discretize_policy(F, K);
    auto worker = [&](std::size_t begin, std::size_t end) {
      std::vector<double> q(grid.n());
      for (std::size_t idx = begin; idx < end; ++idx) {
        grid.point(idx, q.data());
        out[idx] = expected_payoff(q, Fd, V, opts.tie_tol);
      }
    };
    if (threads == 1 || total < 4096) {
      worker(0, total);
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (total + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        if (begin >= total) break;
        pool.emplace_back(worker, begin, std::min(begin + chunk, total));
      }
      for (auto& th : pool) th.join();
    }
    return out;
  }

  const AnonymousPayoffTable payoff_table(V);
  std::vector<SegmentGridTable> seg_tables;
  seg_tables.reserve(F.segments().size());
  for (const Segment& s : F.segments())
    seg_tables.push_back(build_segment_table(s, grid, K, opts.tie_tol));

  const int n = grid.n();
  const int P = grid.points_per_axis();

  auto worker = [&](std::size_t begin, std::size_t end) {
    int digits[16];
    std::vector<double> q(n);
    std::size_t rem = begin;
    for (int d = 0; d < n; ++d) {
      digits[d] = static_cast<int>(rem % P);
      rem /= P;
      q[d] = grid.coordinate(digits[d]);
    }
    for (std::size_t idx = begin; idx < end; ++idx) {
      double acc = 0.0;
      for (const Atom& a : F.atoms()) {
        int wins = 0, ties = 0;
        for (int j = 0; j < n; ++j) {
          const double diff = a.q[j] - q[j];
          if (diff < -opts.tie_tol)
            ++wins;
          else if (!(diff > opts.tie_tol))
            ++ties;
        }
        acc += a.weight * payoff_table(wins, ties);
      }
      for (const SegmentGridTable& table : seg_tables)
        acc += sweep_segment(table, digits, n, K, payoff_table);
      out[idx] = acc;

      // odometer step
      for (int d = 0; d < n; ++d) {
        if (++digits[d] < P) {
          q[d] = grid.coordinate(digits[d]);
          break;
        }
        digits[d] = 0;
        q[d] = 0.0;
      }
    }
  };

  if (threads == 1 || total < 4096) {
    worker(0, total);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      if (begin >= total) break;
      pool.emplace_back(worker, begin, std::min(begin + chunk, total));
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

DiscretizedPayoff::DiscretizedPayoff(const SignalingPolicy& F, const UtilityFunction& V, int K,
                                     double tie_tol)
    : policy_(V.is_anonymous() ? F : discretize_policy(F, K)),
      utility_(V),
      table_(V.is_anonymous() ? AnonymousPayoffTable(V) : AnonymousPayoffTable()),
      K_(K),
      tie_tol_(tie_tol),
      counting_path_(V.is_anonymous()) {
  if (F.n() != V.n()) throw std::invalid_argument("dimension mismatch");
  if (K < 1) throw std::invalid_argument("K must be >= 1");
}

double DiscretizedPayoff::operator()(std::span<const double> q) const {
  if (!counting_path_) return expected_payoff(q, policy_, utility_, tie_tol_);
  const int n = policy_.n();
  double acc = 0.0;
  for (const Atom& a : policy_.atoms()) {
    int wins = 0, ties = 0;
    for (int j = 0; j < n; ++j) {
      const double diff = a.q[j] - q[j];
      if (diff < -tie_tol_)
        ++wins;
      else if (!(diff > tie_tol_))
        ++ties;
    }
    acc += a.weight * table_(wins, ties);
  }
  CoordStatusRuns runs[16];
  for (const Segment& s : policy_.segments()) {
    for (int j = 0; j < n; ++j) runs[j] = coord_runs(s, j, q[j], K_, tie_tol_);
    acc += (s.weight / K_) * sweep_runs(runs, n, K_, table_);
  }
  return acc;
}


}  // namespace persuasion::payoff
