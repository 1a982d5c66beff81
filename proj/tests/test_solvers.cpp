#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qplace/solvers.hpp"

using namespace qplace;

#ifndef QUBO_SHIM_BIN
#define QUBO_SHIM_BIN "./qubo_shim"
#endif

namespace {

QuboProblem random_qubo(int dim, Rng& rng) {
  Matrix q(dim, dim);
  for (int i = 0; i < dim; ++i) {
    q(i, i) = static_cast<double>(rng.below(21)) - 10.0;
    for (int j = i + 1; j < dim; ++j) q(i, j) = q(j, i) = static_cast<double>(rng.below(11)) - 5.0;
  }
  return QuboProblem::from_dense(std::move(q), static_cast<double>(rng.below(9)) - 4.0);
}

std::pair<double, std::vector<std::uint8_t>> enumerate_min(const QuboProblem& q) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> best_x;
  for (std::uint64_t v = 0; v < (1ULL << q.dim()); ++v) {
    const auto x = oracle::bits_of(v, q.dim());
    const double obj = q.objective(x);
    if (obj < best || (obj == best && x < best_x)) {
      best = obj;
      best_x = x;
    }
  }
  return {best, best_x};
}

}  // namespace

TEST_CASE("exhaustive: single negative variable") {
  const auto q = QuboProblem::from_dense(Matrix::from_rows({{-1}}), 0.0);
  const auto r = solve_exhaustive(q);
  CHECK(r.best_x == std::vector<std::uint8_t>{1});
  CHECK(r.best_objective == -1.0);
}

TEST_CASE("exhaustive: positive diagonal keeps everything off") {
  Matrix q(2, 2);
  q(0, 0) = q(1, 1) = 1.0;
  const auto r = solve_exhaustive(QuboProblem::from_dense(std::move(q), 5.0));
  CHECK(r.best_x == std::vector<std::uint8_t>{0, 0});
  CHECK(r.best_objective == 5.0);
}

TEST_CASE("exhaustive: zero dimension returns the offset") {
  const auto r = solve_exhaustive(QuboProblem::from_dense(Matrix(0, 0), 3.5));
  CHECK(r.best_x.empty());
  CHECK(r.best_objective == 3.5);
}

TEST_CASE("exhaustive: ties break toward the lexicographically smallest vector") {
  const auto r = solve_exhaustive(QuboProblem::from_dense(Matrix(3, 3), 1.0));
  CHECK(r.best_x == std::vector<std::uint8_t>{0, 0, 0});
}

TEST_CASE("exhaustive: refuses dimensions over the cap") {
  CHECK_THROWS_AS(solve_exhaustive(QuboProblem::from_dense(Matrix(5, 5)), 4),
                  std::invalid_argument);
}

TEST_CASE("exhaustive equals naive enumeration on random problems") {
  Rng rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 1 + static_cast<int>(rng.below(12));
    const auto q = random_qubo(dim, rng);
    const auto [best, best_x] = enumerate_min(q);
    const auto r = solve_exhaustive(q);
    CHECK(r.best_objective == best);
    CHECK(r.best_x == best_x);
    CHECK(q.objective(r.best_x) == r.best_objective);
  }
}

TEST_CASE("SA at frozen temperature walks a negative diagonal downhill") {
  Matrix q(6, 6);
  for (int i = 0; i < 6; ++i) q(i, i) = -1.0 - i;
  SolverConfig cfg;
  cfg.num_reads = 1;
  cfg.sa_sweeps = 3;
  cfg.sa_beta_range = {{1e6, 1e6}};
  cfg.seed = 9;
  const auto r = solve_sa(QuboProblem::from_dense(std::move(q)), cfg);
  CHECK(r.best_x == std::vector<std::uint8_t>(6, 1));
  CHECK(r.best_objective == -21.0);
}

TEST_CASE("SA is deterministic for a fixed seed") {
  Rng rng(5);
  const auto q = random_qubo(14, rng);
  SolverConfig cfg;
  cfg.num_reads = 4;
  cfg.sa_sweeps = 50;
  cfg.seed = 1234;
  const auto a = solve_sa(q, cfg);
  const auto b = solve_sa(q, cfg);
  CHECK(a.best_x == b.best_x);
  CHECK(a.best_objective == b.best_objective);
  CHECK(a.reads_used == b.reads_used);
}

TEST_CASE("SA with 100 reads matches the exhaustive optimum on almost every 12-dim instance") {
  Rng rng(303);
  int matched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = random_qubo(12, rng);
    SolverConfig cfg;
    cfg.num_reads = 100;
    cfg.sa_sweeps = 100;
    cfg.seed = 900 + trial;
    const auto sa = solve_sa(q, cfg);
    const auto exact = solve_exhaustive(q);
    if (sa.best_objective == exact.best_objective) ++matched;
    CHECK(sa.best_objective >= exact.best_objective);
  }
  CHECK(matched >= 95);
}

TEST_CASE("solve never beats the offset guarantee") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = random_qubo(10, rng);
    SolverConfig cfg;
    cfg.backend = SolverBackend::simulated_annealing;
    cfg.num_reads = 2;
    cfg.sa_sweeps = 5;
    cfg.seed = trial;
    const auto r = solve(q, cfg);
    CHECK(r.best_objective <= q.offset());
    CHECK(q.objective(r.best_x) == r.best_objective);
  }
}

TEST_CASE("solver config validation") {
  const auto q = QuboProblem::from_dense(Matrix::from_rows({{-1}}));
  SolverConfig cfg;
  cfg.num_reads = 0;
  CHECK_THROWS_AS(solve_sa(q, cfg), std::invalid_argument);
  cfg.num_reads = 1;
  cfg.sa_beta_range = {{-1.0, 1.0}};
  CHECK_THROWS_AS(solve_sa(q, cfg), std::invalid_argument);
  SolverConfig ext;
  ext.backend = SolverBackend::external;
  CHECK_THROWS_AS(solve(q, ext), std::invalid_argument);
}

TEST_CASE("external bridge: loopback shim reproduces the exhaustive result") {
  Rng rng(71);
  const auto q = random_qubo(8, rng);
  SolverConfig cfg;
  cfg.backend = SolverBackend::external;
  cfg.external_cmd = std::string(QUBO_SHIM_BIN) + " ok";
  const auto r = solve(q, cfg);
  const auto exact = solve_exhaustive(q);
  CHECK(r.best_objective == exact.best_objective);
  CHECK(r.best_x == exact.best_x);
}

TEST_CASE("external bridge: nonzero exit carries the captured stderr") {
  const auto q = QuboProblem::from_dense(Matrix::from_rows({{-1}}));
  SolverConfig cfg;
  cfg.backend = SolverBackend::external;
  cfg.external_cmd = std::string(QUBO_SHIM_BIN) + " fail";
  CHECK_THROWS_WITH_AS(solve(q, cfg),
                       doctest::Contains("refusing to solve"), solver_error);
}

TEST_CASE("external bridge: malformed output is rejected") {
  const auto q = QuboProblem::from_dense(Matrix::from_rows({{-1}}));
  SolverConfig cfg;
  cfg.backend = SolverBackend::external;
  cfg.external_cmd = std::string(QUBO_SHIM_BIN) + " garbage";
  CHECK_THROWS_AS(solve(q, cfg), solver_error);
}

TEST_CASE("external bridge: objective mismatch flags a defective solver") {
  const auto q = QuboProblem::from_dense(Matrix::from_rows({{-1}}));
  SolverConfig cfg;
  cfg.backend = SolverBackend::external;
  cfg.external_cmd = std::string(QUBO_SHIM_BIN) + " bad-objective";
  CHECK_THROWS_WITH_AS(solve(q, cfg), doctest::Contains("does not match"), solver_error);
}

TEST_CASE("external bridge: time limit kills a stuck solver") {
  const auto q = QuboProblem::from_dense(Matrix::from_rows({{-1}}));
  SolverConfig cfg;
  cfg.backend = SolverBackend::external;
  cfg.external_cmd = std::string(QUBO_SHIM_BIN) + " slow";
  cfg.time_limit_ms = 300;
  CHECK_THROWS_WITH_AS(solve(q, cfg), doctest::Contains("timed out"), solver_error);
}
