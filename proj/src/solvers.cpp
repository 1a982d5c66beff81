#include "qplace/solvers.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "qplace/random.hpp"
#include "qplace/subprocess.hpp"

namespace qplace {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

bool lex_less(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Keeps the best (objective, lexicographic) candidate seen so far.
struct Best {
  std::vector<std::uint8_t> x;
  double objective = 0.0;
  bool set = false;

  void offer(const std::vector<std::uint8_t>& cand, double obj) {
    if (!set || obj < objective || (obj == objective && lex_less(cand, x))) {
      x = cand;
      objective = obj;
      set = true;
    }
  }
};

// Incremental single-flip state: neighbor_sum[b] = sum_{j != b} q(b,j) x_j.
struct FlipState {
  const Matrix* q;
  std::vector<std::uint8_t> x;
  std::vector<double> neighbor_sum;
  double energy;  // includes offset

  FlipState(const QuboProblem& p, std::vector<std::uint8_t> start)
      : q(&p.q()), x(std::move(start)), neighbor_sum(p.dim(), 0.0) {
    const int dim = p.dim();
    for (int b = 0; b < dim; ++b) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j)
        if (j != b && x[j]) s += (*q)(b, j);
      neighbor_sum[b] = s;
    }
    energy = p.objective(x);
  }

  double flip_delta(int b) const {
    const double dir = x[b] ? -1.0 : 1.0;
    return dir * ((*q)(b, b) + 2.0 * neighbor_sum[b]);
  }

  void flip(int b) {
    const double dir = x[b] ? -1.0 : 1.0;
    energy += flip_delta(b);
    x[b] ^= 1;
    const int dim = static_cast<int>(x.size());
    for (int j = 0; j < dim; ++j)
      if (j != b) neighbor_sum[j] += dir * (*q)(j, b);
  }
};

SolveResult finish(Best best, int reads, Clock::time_point start) {
  SolveResult r;
  r.best_x = std::move(best.x);
  r.best_objective = best.objective;
  r.reads_used = reads;
  r.wall_time_ms = elapsed_ms(start);
  return r;
}

}  // namespace

SolveResult solve_exhaustive(const QuboProblem& problem, int max_dim) {
  const auto start = Clock::now();
  const int dim = problem.dim();
  if (dim > max_dim)
    throw std::invalid_argument("solve_exhaustive: dimension " + std::to_string(dim) +
                                " exceeds cap " + std::to_string(max_dim));
  Best best;
  std::vector<std::uint8_t> zero(dim, 0);
  best.offer(zero, problem.offset());
  if (dim == 0) return finish(std::move(best), 1, start);

  FlipState st(problem, zero);
  const std::uint64_t total = 1ULL << dim;
  for (std::uint64_t i = 1; i < total; ++i) {
    st.flip(std::countr_zero(i));  // Gray-code neighbor
    best.offer(st.x, st.energy);
  }
  return finish(std::move(best), 1, start);
}

std::pair<double, double> default_beta_range(const QuboProblem& problem) {
  double hi_mag = 0.0;
  double lo_mag = 0.0;
  for (int b = 0; b < problem.dim(); ++b) {
    const double mag = std::abs(problem.q()(b, b));
    if (mag == 0.0) continue;
    hi_mag = std::max(hi_mag, mag);
    lo_mag = lo_mag == 0.0 ? mag : std::min(lo_mag, mag);
  }
  if (hi_mag == 0.0) hi_mag = lo_mag = 1.0;
  return {std::log(2.0) / hi_mag, std::log(100.0) / lo_mag};
}

SolveResult solve_sa(const QuboProblem& problem, const SolverConfig& cfg) {
  const auto start = Clock::now();
  const int dim = problem.dim();
  if (dim < 1) throw std::invalid_argument("solve_sa: dimension must be at least 1");
  if (cfg.num_reads < 1 || cfg.sa_sweeps < 1)
    throw std::invalid_argument("solve_sa: num_reads and sa_sweeps must be positive");

  const auto [beta_low, beta_high] = cfg.sa_beta_range ? *cfg.sa_beta_range
                                                       : default_beta_range(problem);
  if (beta_low <= 0.0 || beta_high <= 0.0)
    throw std::invalid_argument("solve_sa: beta range must be positive");

  Best best;
  best.offer(std::vector<std::uint8_t>(dim, 0), problem.offset());

  const int sweeps = cfg.sa_sweeps;
  const double beta_ratio = beta_high / beta_low;
  std::vector<int> order(dim);
  for (int i = 0; i < dim; ++i) order[i] = i;

  for (int read = 0; read < cfg.num_reads; ++read) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(read)));
    std::vector<std::uint8_t> init(dim);
    for (int i = 0; i < dim; ++i) init[i] = static_cast<std::uint8_t>(rng.next() & 1u);
    FlipState st(problem, std::move(init));
    best.offer(st.x, st.energy);

    for (int sweep = 0; sweep < sweeps; ++sweep) {
      const double beta =
          sweeps == 1 ? beta_low
                      : beta_low * std::pow(beta_ratio, static_cast<double>(sweep) /
                                                            static_cast<double>(sweeps - 1));
      rng.shuffle(order);
      for (int b : order) {
        const double delta = st.flip_delta(b);
        if (delta <= 0.0 || rng.uniform01() < std::exp(-beta * delta)) {
          st.flip(b);
          best.offer(st.x, st.energy);
        }
      }
    }
  }
  return finish(std::move(best), cfg.num_reads, start);
}

SolveResult solve_external(const QuboProblem& problem, const SolverConfig& cfg) {
  const auto start = Clock::now();
  if (!cfg.external_cmd || cfg.external_cmd->empty())
    throw std::invalid_argument("solve_external: external_cmd is not set");

  const SubprocessResult proc =
      run_subprocess(*cfg.external_cmd, qubo_to_json(problem), cfg.time_limit_ms);
  if (proc.timed_out)
    throw solver_error("external solver timed out after " +
                       std::to_string(cfg.time_limit_ms.value_or(0)) + " ms");
  if (proc.exit_code != 0)
    throw solver_error("external solver exited with code " + std::to_string(proc.exit_code) +
                       (proc.err.empty() ? "" : ": " + proc.err));

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(proc.out);
  } catch (const nlohmann::json::exception& e) {
    throw solver_error(std::string("external solver produced malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("x") || !doc["x"].is_array() || !doc.contains("objective"))
    throw solver_error("external solver output must be {\"x\": [...], \"objective\": value}");
  if (static_cast<int>(doc["x"].size()) != problem.dim())
    throw solver_error("external solver returned a vector of the wrong length");

  std::vector<std::uint8_t> x;
  x.reserve(doc["x"].size());
  for (const auto& bit : doc["x"]) {
    const int v = bit.get<int>();
    if (v != 0 && v != 1) throw solver_error("external solver returned a non-binary entry");
    x.push_back(static_cast<std::uint8_t>(v));
  }

  const double reported = doc["objective"].get<double>();
  const double recomputed = problem.objective(x);
  const double scale = std::max({std::abs(reported), std::abs(recomputed), 1.0});
  if (std::abs(reported - recomputed) > 1e-6 * scale)
    throw solver_error("external solver objective " + std::to_string(reported) +
                       " does not match its solution (expected " + std::to_string(recomputed) +
                       ")");

  Best best;
  best.offer(std::vector<std::uint8_t>(problem.dim(), 0), problem.offset());
  best.offer(x, recomputed);
  return finish(std::move(best), 1, start);
}

SolveResult solve(const QuboProblem& problem, const SolverConfig& cfg) {
  if (problem.dim() == 0) {
    SolveResult r;
    r.best_objective = problem.offset();
    r.reads_used = 1;
    return r;
  }
  switch (cfg.backend) {
    case SolverBackend::exhaustive:
      return solve_exhaustive(problem, cfg.exhaustive_max_dim);
    case SolverBackend::simulated_annealing:
      return solve_sa(problem, cfg);
    case SolverBackend::external:
      return solve_external(problem, cfg);
  }
  throw std::invalid_argument("solve: unknown backend");
}

}  // namespace qplace
