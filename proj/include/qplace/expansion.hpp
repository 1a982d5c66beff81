#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qplace/cycles.hpp"
#include "qplace/qap.hpp"
#include "qplace/qubo.hpp"
#include "qplace/solvers.hpp"

namespace qplace {

// No legal assignment could be constructed.
class infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class IndexStrategy { random, worst };

struct ExpansionConfig {
  int k = 1;    // sub-problem facility count; clamped to the selectable pool
  int k_u = 0;  // unbound locations per iteration; clamped to what is available
  IndexStrategy index_strategy = IndexStrategy::random;
  int max_outer_iters = 50;
  double rel_improvement_eps = 0.0;  // 0 runs all iterations
  SolverConfig solver;               // solver.seed is re-derived per inner solve
  std::uint64_t seed = 0;
  std::vector<int> pinned_facilities;      // excluded from selection and cycles
  std::optional<int> fixed_inner_rounds;   // overrides pair-coverage termination
  int max_index_redraws = 30;              // (I, J) redraws after sampling failures
  int init_attempts = 200;
  // Per-iteration diagnostic build of the sub-problem matrix is skipped
  // above this dimension; dense k(k+k_u) storage gets out of hand quickly.
  int subproblem_diag_max_dim = 1024;
};

struct IterationRecord {
  int outer_iter = 0;  // 0 is the initial placement
  double cost = 0.0;
  int inner_rounds = 0;
  int qubo_dim = 0;  // cycles per inner round, the solver-facing dimension
  std::int64_t wall_time_ms = 0;
  bool inner_cap_hit = false;
};

// Emitted once per inner round when an observer is attached; feeds the
// optional JSONL debug stream of the CLI.
struct InnerEvent {
  int outer_iter = 0;
  int round = 0;
  int qubo_dim = 0;
  double objective_before = 0.0;
  double objective_after = 0.0;
};

using InnerObserver = std::function<void(const InnerEvent&)>;

struct ExpansionResult {
  SubPermutation placement;
  std::vector<IterationRecord> records;  // records[0] is the initial cost
};

// Shuffled greedy legal assignment: pinned facilities first, the rest in
// random order, each picking uniformly among the free legal locations.
// Retries with a fresh order until it fits.
SubPermutation init_random(int m, int n, const LegalityOracle& legal, Rng& rng,
                           const std::vector<int>& pinned = {}, int max_attempts = 200);

// random: uniform k-subset; worst: the k facilities with the largest
// per-facility cost, ties to the lower index. Excluded facilities are
// never selected.
std::vector<int> select_indices(const FlowMatrix& f, const DistanceMatrix& d,
                                const SubPermutation& p, IndexStrategy strategy, int k, Rng& rng,
                                const std::vector<int>& excluded = {});

// k_u distinct unbound locations, each draw proportional to the distance to
// the nearest bound location; already-drawn locations count as bound for
// later draws. Zero weights are lifted to 1e-9 so degenerate metrics stay
// samplable.
std::vector<int> select_unbound(const SubPermutation& p, const DistanceMatrix& d, int k_u,
                                Rng& rng);
std::vector<int> select_unbound_from(const SubPermutation& p, const DistanceMatrix& d,
                                     std::vector<int> candidates, int k_u, Rng& rng);

// Tracks which unordered location pairs of the current sub-problem have
// appeared in any sampled cycle set.
class InnerCoverage {
 public:
  explicit InnerCoverage(std::span<const int> locations);

  void note(const TwoCycleSet& cs);
  bool complete() const { return covered_ == total_; }
  long covered() const { return covered_; }
  long total_pairs() const { return total_; }

 private:
  std::vector<int> local_;  // location -> dense index, -1 outside the set
  std::vector<char> seen_;
  int count_ = 0;
  long covered_ = 0;
  long total_ = 0;
};

inline int inner_round_cap(int k, int k_u, int s) {
  if (s <= 0) return 0;
  return 10 * ((k + k_u + s - 1) / s);
}

// The cyclic-expansion driver: pick a facility set and extra unbound
// locations, then repeatedly sample disjoint legal cycles, solve the
// selection QUBO and apply the winning cycles, until every location pair of
// the sub-problem appeared or the round cap is hit; iterate until the outer
// budget or the relative-improvement threshold. The solver always sees the
// empty selection, so the cost trace never increases.
ExpansionResult run(const FlowMatrix& f, const DistanceMatrix& d, const LegalityOracle& legal,
                    std::optional<SubPermutation> init, const ExpansionConfig& cfg,
                    const InnerObserver& observer = {});

}  // namespace qplace
