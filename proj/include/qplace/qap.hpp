#pragma once

#include <functional>
#include <vector>

#include "qplace/matrix.hpp"

namespace qplace {

// True when the given facility may occupy the given location.
using LegalityOracle = std::function<bool(int facility, int location)>;

// Facility connectivity weights: symmetric, zero diagonal, nonnegative.
class FlowMatrix {
 public:
  explicit FlowMatrix(Matrix entries);

  int size() const { return entries_.rows(); }  // m
  double at(int i, int j) const { return entries_(i, j); }
  const Matrix& entries() const { return entries_; }

  double total() const;      // sum over all entries
  double row_sum(int i) const;

 private:
  Matrix entries_;
};

// Pairwise location distances: symmetric, zero diagonal, nonnegative.
// The triangle inequality is guaranteed only by metric constructors
// (see build_distance_matrix); verify_metric() is available for checks.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(Matrix entries);

  int size() const { return entries_.rows(); }  // n
  double at(int a, int b) const { return entries_(a, b); }
  const Matrix& entries() const { return entries_; }

  double max_entry() const;
  bool verify_metric() const;

 private:
  Matrix entries_;
};

// Injective assignment of m facilities to n >= m locations. Mutable only
// through swap_locations, which preserves injectivity by construction.
class SubPermutation {
 public:
  SubPermutation(int m, int n, std::vector<int> assign);

  int m() const { return static_cast<int>(assign_.size()); }
  int n() const { return static_cast<int>(inverse_.size()); }

  int location_of(int facility) const { return assign_[facility]; }
  int facility_at(int location) const { return inverse_[location]; }  // -1 when unbound
  bool is_bound(int location) const { return inverse_[location] >= 0; }

  const std::vector<int>& assignment() const { return assign_; }

  // Exchanges the occupancy of two locations. A bound/unbound pair moves a
  // single facility; two unbound locations are a no-op.
  void swap_locations(int a, int b);

  // 0/1 matrix X with X(i, assign[i]) = 1. Conversion for tests and the
  // monolithic QUBO path only.
  Matrix to_matrix() const;

  bool operator==(const SubPermutation& o) const { return assign_ == o.assign_; }

 private:
  std::vector<int> assign_;   // facility -> location
  std::vector<int> inverse_;  // location -> facility or -1
};

struct BoundSet {
  std::vector<int> bound;
  std::vector<int> unbound;
};

BoundSet bound_set(const SubPermutation& p);

// sum_{i,j} F[i][j] * D[assign[i]][assign[j]]
double qap_cost(const FlowMatrix& f, const DistanceMatrix& d, const SubPermutation& p);

// tr(F A D B^T); bilinear in (a, b)
double qap_cost_bilinear(const FlowMatrix& f, const DistanceMatrix& d, const Matrix& a,
                         const Matrix& b);

// element i: sum_j F[i][j] * D[assign[i]][assign[j]]; sums to qap_cost
std::vector<double> per_facility_cost(const FlowMatrix& f, const DistanceMatrix& d,
                                      const SubPermutation& p);

}  // namespace qplace
