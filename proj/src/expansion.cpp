#include "qplace/expansion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace qplace {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

}  // namespace

SubPermutation init_random(int m, int n, const LegalityOracle& legal, Rng& rng,
                           const std::vector<int>& pinned, int max_attempts) {
  if (m < 1 || n < m) throw std::invalid_argument("init_random: need 1 <= m <= n");

  std::vector<char> is_pinned(m, 0);
  for (int f : pinned) {
    if (f < 0 || f >= m) throw std::invalid_argument("init_random: pinned facility out of range");
    is_pinned[f] = 1;
  }
  std::vector<int> order;
  order.reserve(m);
  for (int f : pinned) order.push_back(f);
  std::vector<int> rest;
  for (int f = 0; f < m; ++f)
    if (!is_pinned[f]) rest.push_back(f);

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    rng.shuffle(rest);
    std::vector<int> assign(m, -1);
    std::vector<char> taken(n, 0);
    bool ok = true;
    auto place = [&](int f) {
      std::vector<int> options;
      for (int loc = 0; loc < n; ++loc)
        if (!taken[loc] && legal(f, loc)) options.push_back(loc);
      if (options.empty()) return false;
      const int loc = options[rng.below(options.size())];
      assign[f] = loc;
      taken[loc] = 1;
      return true;
    };
    for (int f : order)
      if (!(ok = place(f))) break;
    if (ok)
      for (int f : rest)
        if (!(ok = place(f))) break;
    if (ok) return SubPermutation(m, n, std::move(assign));
  }
  throw infeasible_error("init_random: no legal assignment found in " +
                         std::to_string(max_attempts) + " attempts");
}

std::vector<int> select_indices(const FlowMatrix& f, const DistanceMatrix& d,
                                const SubPermutation& p, IndexStrategy strategy, int k, Rng& rng,
                                const std::vector<int>& excluded) {
  std::vector<char> skip(p.m(), 0);
  for (int e : excluded) skip[e] = 1;
  std::vector<int> pool;
  pool.reserve(p.m());
  for (int i = 0; i < p.m(); ++i)
    if (!skip[i]) pool.push_back(i);
  if (k > static_cast<int>(pool.size()))
    throw std::invalid_argument("select_indices: k exceeds the selectable facility count");

  if (strategy == IndexStrategy::random) {
    rng.shuffle(pool);
    pool.resize(k);
    return pool;
  }

  const auto costs = per_facility_cost(f, d, p);
  std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
    if (costs[a] != costs[b]) return costs[a] > costs[b];
    return a < b;
  });
  pool.resize(k);
  return pool;
}

namespace {

// Weighted sampling without replacement over the candidate locations; a
// draw the filter vetoes leaves the pool for good. Stops early when the
// pool runs dry.
std::vector<int> weighted_unbound_draw(const SubPermutation& p, const DistanceMatrix& d,
                                       const std::vector<int>& candidates, int k_u, Rng& rng,
                                       const std::function<bool(int)>& accept) {
  constexpr double kEps = 1e-9;
  const auto bs = bound_set(p);
  std::vector<double> min_dist(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double mn = bs.bound.empty() ? 1.0 : std::numeric_limits<double>::infinity();
    for (int b : bs.bound) mn = std::min(mn, d.at(candidates[c], b));
    min_dist[c] = mn;
  }

  std::vector<int> chosen;
  chosen.reserve(k_u);
  std::vector<char> gone(candidates.size(), 0);
  std::size_t alive = candidates.size();
  while (static_cast<int>(chosen.size()) < k_u && alive > 0) {
    double total = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (!gone[c]) total += std::max(min_dist[c], kEps);
    double r = rng.uniform01() * total;
    std::size_t pick = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (gone[c]) continue;
      r -= std::max(min_dist[c], kEps);
      if (r <= 0.0) {
        pick = c;
        break;
      }
    }
    if (pick == candidates.size()) {  // numeric tail: take the last live slot
      for (std::size_t c = candidates.size(); c-- > 0;)
        if (!gone[c]) {
          pick = c;
          break;
        }
    }
    gone[pick] = 1;
    --alive;
    if (!accept(candidates[pick])) continue;
    chosen.push_back(candidates[pick]);
    // the drawn location now counts as bound
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (!gone[c]) min_dist[c] = std::min(min_dist[c], d.at(candidates[c], candidates[pick]));
  }
  return chosen;
}

// Incremental bipartite matching of drawn locations onto distinct
// facilities that may move there; a location that cannot be matched now can
// never be matched later, so the caller may drop it.
class MoverMatching {
 public:
  MoverMatching(const std::vector<int>& facilities, const LegalityOracle& legal)
      : facilities_(facilities), legal_(legal), match_loc_(facilities.size(), -1) {}

  bool try_add(int loc) {
    visited_.assign(facilities_.size(), 0);
    return augment(loc);
  }

 private:
  bool augment(int loc) {
    for (std::size_t i = 0; i < facilities_.size(); ++i) {
      if (visited_[i] || !legal_(facilities_[i], loc)) continue;
      visited_[i] = 1;
      if (match_loc_[i] == -1 || augment(match_loc_[i])) {
        match_loc_[i] = loc;
        return true;
      }
    }
    return false;
  }

  const std::vector<int>& facilities_;
  const LegalityOracle& legal_;
  std::vector<int> match_loc_;  // facility slot -> drawn location
  std::vector<char> visited_;
};

}  // namespace

std::vector<int> select_unbound(const SubPermutation& p, const DistanceMatrix& d, int k_u,
                                Rng& rng) {
  return select_unbound_from(p, d, bound_set(p).unbound, k_u, rng);
}

std::vector<int> select_unbound_from(const SubPermutation& p, const DistanceMatrix& d,
                                     std::vector<int> candidates, int k_u, Rng& rng) {
  if (k_u > static_cast<int>(candidates.size()))
    throw std::invalid_argument("select_unbound: k_u exceeds the candidate count");
  return weighted_unbound_draw(p, d, candidates, k_u, rng, [](int) { return true; });
}

InnerCoverage::InnerCoverage(std::span<const int> locations) {
  int max_loc = -1;
  for (int loc : locations) max_loc = std::max(max_loc, loc);
  local_.assign(max_loc + 1, -1);
  count_ = 0;
  for (int loc : locations) {
    if (local_[loc] != -1) throw std::invalid_argument("InnerCoverage: duplicate location");
    local_[loc] = count_++;
  }
  total_ = static_cast<long>(count_) * (count_ - 1) / 2;
  seen_.assign(static_cast<std::size_t>(count_) * count_, 0);
}

void InnerCoverage::note(const TwoCycleSet& cs) {
  for (const auto& c : cs) {
    if (c.b >= static_cast<int>(local_.size()) || local_[c.a] < 0 || local_[c.b] < 0)
      continue;  // cycle outside the tracked set
    const int i = std::min(local_[c.a], local_[c.b]);
    const int j = std::max(local_[c.a], local_[c.b]);
    auto& cell = seen_[static_cast<std::size_t>(i) * count_ + j];
    if (!cell) {
      cell = 1;
      ++covered_;
    }
  }
}

ExpansionResult run(const FlowMatrix& f, const DistanceMatrix& d, const LegalityOracle& legal,
                    std::optional<SubPermutation> init, const ExpansionConfig& cfg,
                    const InnerObserver& observer) {
  const auto run_start = Clock::now();
  const int m = f.size();
  const int n = d.size();
  if (m > n) throw std::invalid_argument("run: more facilities than locations");

  Rng rng(cfg.seed);

  SubPermutation p = [&] {
    if (!init) return init_random(m, n, legal, rng, cfg.pinned_facilities, cfg.init_attempts);
    if (init->m() != m || init->n() != n)
      throw std::invalid_argument("run: initial assignment has wrong dimensions");
    for (int i = 0; i < m; ++i)
      if (!legal(i, init->location_of(i)))
        throw std::invalid_argument("run: initial assignment places facility " +
                                    std::to_string(i) + " illegally");
    return *init;
  }();

  std::vector<char> is_pinned(m, 0);
  for (int fac : cfg.pinned_facilities) {
    if (fac < 0 || fac >= m) throw std::invalid_argument("run: pinned facility out of range");
    is_pinned[fac] = 1;
  }
  const int selectable =
      m - static_cast<int>(std::count(is_pinned.begin(), is_pinned.end(), 1));
  if (cfg.k < 1) throw std::invalid_argument("run: k must be positive");

  std::uint64_t solve_counter = 0;
  ExpansionResult result{p, {}};
  result.records.push_back({0, qap_cost(f, d, p), 0, 0, elapsed_ms(run_start), false});

  double prev_cost = result.records.front().cost;
  for (int outer = 1; outer <= cfg.max_outer_iters; ++outer) {
    const auto iter_start = Clock::now();
    const int k_eff = std::min(cfg.k, selectable);
    if (k_eff < 1) break;  // everything pinned

    // Draw (I, J); on a sampling dead end inside the inner loop we come
    // back here and draw fresh sets.
    int rounds = 0;
    int s_dim = 0;
    bool cap_hit = false;
    bool iterated = false;
    for (int redraw = 0; redraw <= cfg.max_index_redraws && !iterated; ++redraw) {
      const std::vector<int> selected =
          select_indices(f, d, p, cfg.index_strategy, k_eff, rng, cfg.pinned_facilities);

      // Unbound candidates must keep a full mover matching possible: every
      // drawn location needs its own selected facility that fits it.
      const std::vector<int> pool = bound_set(p).unbound;
      const int ku_want = std::min({cfg.k_u, k_eff, static_cast<int>(pool.size())});
      MoverMatching matching(selected, legal);
      const std::vector<int> unbound = weighted_unbound_draw(
          p, d, pool, ku_want, rng, [&](int loc) { return matching.try_add(loc); });
      const int ku_eff = static_cast<int>(unbound.size());

      const int s = ku_eff + (k_eff - ku_eff) / 2;
      s_dim = s;
      if (s == 0) { iterated = true; break; }  // nothing to permute

      const auto idx = SubProblemIndex::make(p, selected, unbound);
      if (idx.dim() <= cfg.subproblem_diag_max_dim) {
        // consistency check: the sub-problem matrix must reproduce the
        // current cost at the current sub-assignment
        const auto sub = build_subproblem_matrix(f, d, p, idx);
        std::vector<std::uint8_t> x(idx.dim(), 0);
        const int cols = k_eff + ku_eff;
        for (int t = 0; t < k_eff; ++t)
          for (int u = 0; u < cols; ++u)
            if (idx.image_ext[u] == p.location_of(idx.facilities[t])) x[t * cols + u] = 1;
        const double expect = qap_cost(f, d, p);
        const double got = sub.objective(x);
        if (std::abs(got - expect) > 1e-9 * std::max({std::abs(got), std::abs(expect), 1.0}))
          throw std::logic_error("run: sub-problem matrix disagrees with the QAP cost");
      }

      InnerCoverage coverage(idx.image_ext);
      const int cap = cfg.fixed_inner_rounds.value_or(inner_round_cap(k_eff, ku_eff, s));

      try {
        while (true) {
          // locations of the sub-problem currently free
          std::vector<int> round_unbound;
          round_unbound.reserve(ku_eff);
          for (int loc : idx.image_ext)
            if (!p.is_bound(loc)) round_unbound.push_back(loc);

          const TwoCycleSet cs = sample_cycle_set(selected, round_unbound, p, legal, rng);
          const QuboProblem qubo = build_alpha_qubo(f, d, p, cs);

          SolverConfig solver_cfg = cfg.solver;
          solver_cfg.seed = derive_seed(cfg.seed, ++solve_counter);
          const SolveResult solved = solve(qubo, solver_cfg);

          apply_selection_inplace(p, cs, solved.best_x);
          coverage.note(cs);
          ++rounds;
          if (observer)
            observer({outer, rounds, s, qubo.offset(), solved.best_objective});

          if (cfg.fixed_inner_rounds ? rounds >= cap : coverage.complete()) break;
          if (rounds >= cap) {
            cap_hit = true;
            break;
          }
        }
        iterated = true;
      } catch (const sampling_error&) {
        if (redraw == cfg.max_index_redraws) throw;
        // fresh (I, J) next time around
      }
    }

    const double cost = qap_cost(f, d, p);
    result.records.push_back({outer, cost, rounds, s_dim, elapsed_ms(iter_start), cap_hit});

    const double improvement = prev_cost > 0.0 ? (prev_cost - cost) / prev_cost : 0.0;
    prev_cost = cost;
    if (improvement < cfg.rel_improvement_eps) break;
  }

  result.placement = std::move(p);
  return result;
}

}  // namespace qplace
