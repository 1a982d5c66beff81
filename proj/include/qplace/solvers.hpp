#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qplace/qubo.hpp"

namespace qplace {

// External backend failed: nonzero exit, timeout, malformed output, or an
// objective that does not match its own solution vector.
class solver_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverBackend { exhaustive, simulated_annealing, external };

struct SolverConfig {
  SolverBackend backend = SolverBackend::simulated_annealing;
  int num_reads = 100;
  int sa_sweeps = 1000;
  std::optional<std::pair<double, double>> sa_beta_range;  // (low, high); derived when unset
  std::uint64_t seed = 0;
  std::optional<std::string> external_cmd;
  std::optional<int> time_limit_ms;
  int exhaustive_max_dim = 24;
};

struct SolveResult {
  std::vector<std::uint8_t> best_x;
  double best_objective = 0.0;  // includes the problem offset
  int reads_used = 0;
  std::int64_t wall_time_ms = 0;
};

// Dispatches on cfg.backend. Every backend also evaluates the zero vector,
// so the result is never worse than the problem offset; ties go to the
// lexicographically smallest vector.
SolveResult solve(const QuboProblem& problem, const SolverConfig& cfg);

// Exact minimum by Gray-code enumeration with incremental flip deltas.
SolveResult solve_exhaustive(const QuboProblem& problem, int max_dim = 24);

// num_reads independent restarts of single-flip Metropolis sweeps on a
// geometric inverse-temperature schedule. Deterministic for a fixed seed.
SolveResult solve_sa(const QuboProblem& problem, const SolverConfig& cfg);

// Pipes the QUBO exchange JSON into cfg.external_cmd, reads
// {"x": [...], "objective": v} from its stdout and re-verifies the
// objective locally.
SolveResult solve_external(const QuboProblem& problem, const SolverConfig& cfg);

// (ln 2 / max |delta|, ln 100 / min nonzero |delta|) over single-flip
// deltas at x = 0; (ln 2, ln 100) when all deltas vanish.
std::pair<double, double> default_beta_range(const QuboProblem& problem);

}  // namespace qplace
