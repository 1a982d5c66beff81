#pragma once

// Independent reference implementations used to freeze expected values.
// Everything here recomputes results from first principles (plain loops,
// full enumeration) and stays off the library's fast paths.

#include <cstdint>
#include <limits>
#include <vector>

#include "qplace/qap.hpp"
#include "qplace/random.hpp"

namespace oracle {

using qplace::Matrix;

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

// n x n transposition matrix swapping a and b
inline Matrix transposition_matrix(int n, int a, int b) {
  Matrix c(n, n);
  for (int i = 0; i < n; ++i) c(i, i) = 1.0;
  c(a, a) = c(b, b) = 0.0;
  c(a, b) = c(b, a) = 1.0;
  return c;
}

// sum_{i,j} F[i][j] * D[assign[i]][assign[j]] by definition
inline double cost_of_assignment(const qplace::FlowMatrix& f, const qplace::DistanceMatrix& d,
                                 const std::vector<int>& assign) {
  double c = 0.0;
  for (std::size_t i = 0; i < assign.size(); ++i)
    for (std::size_t j = 0; j < assign.size(); ++j)
      c += f.at(static_cast<int>(i), static_cast<int>(j)) * d.at(assign[i], assign[j]);
  return c;
}

// exact optimum over every injective assignment of m facilities into n slots
struct BruteForceResult {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> assign;
  long evaluated = 0;
};

inline void brute_force_rec(const qplace::FlowMatrix& f, const qplace::DistanceMatrix& d,
                            std::vector<int>& assign, std::vector<char>& used, std::size_t next,
                            BruteForceResult& best) {
  if (next == assign.size()) {
    ++best.evaluated;
    const double c = cost_of_assignment(f, d, assign);
    if (c < best.cost) {
      best.cost = c;
      best.assign = assign;
    }
    return;
  }
  for (int loc = 0; loc < d.size(); ++loc) {
    if (used[loc]) continue;
    used[loc] = 1;
    assign[next] = loc;
    brute_force_rec(f, d, assign, used, next + 1, best);
    used[loc] = 0;
  }
}

inline BruteForceResult brute_force_qap(const qplace::FlowMatrix& f,
                                        const qplace::DistanceMatrix& d) {
  BruteForceResult best;
  std::vector<int> assign(f.size(), -1);
  std::vector<char> used(d.size(), 0);
  brute_force_rec(f, d, assign, used, 0, best);
  return best;
}

// random symmetric zero-diagonal integer matrix with entries in [0, hi]
inline Matrix random_symmetric(int n, int hi, qplace::Rng& rng) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m(i, j) = m(j, i) = static_cast<double>(rng.below(hi + 1));
  return m;
}

inline qplace::SubPermutation random_sub_permutation(int m, int n, qplace::Rng& rng) {
  return qplace::SubPermutation(m, n, rng.sample_indices(n, m));
}

// all binary vectors of the given length, least significant bit first
inline std::vector<std::uint8_t> bits_of(std::uint64_t value, int len) {
  std::vector<std::uint8_t> x(len);
  for (int i = 0; i < len; ++i) x[i] = static_cast<std::uint8_t>((value >> i) & 1u);
  return x;
}

}  // namespace oracle
