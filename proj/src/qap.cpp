#include "qplace/qap.hpp"

#include <algorithm>
#include <string>

namespace qplace {

namespace {

void check_symmetric_zero_diag(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": not square");
  if (m.rows() == 0) throw std::invalid_argument(std::string(what) + ": empty");
  for (int i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0.0) throw std::invalid_argument(std::string(what) + ": nonzero diagonal");
    for (int j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) throw std::invalid_argument(std::string(what) + ": not symmetric");
      if (m(i, j) < 0.0) throw std::invalid_argument(std::string(what) + ": negative entry");
    }
  }
}

}  // namespace

FlowMatrix::FlowMatrix(Matrix entries) : entries_(std::move(entries)) {
  check_symmetric_zero_diag(entries_, "FlowMatrix");
}

double FlowMatrix::total() const {
  double t = 0.0;
  for (double v : entries_.data()) t += v;
  return t;
}

double FlowMatrix::row_sum(int i) const {
  double t = 0.0;
  for (int j = 0; j < size(); ++j) t += entries_(i, j);
  return t;
}

DistanceMatrix::DistanceMatrix(Matrix entries) : entries_(std::move(entries)) {
  check_symmetric_zero_diag(entries_, "DistanceMatrix");
}

double DistanceMatrix::max_entry() const {
  double m = 0.0;
  for (double v : entries_.data()) m = std::max(m, v);
  return m;
}

bool DistanceMatrix::verify_metric() const {
  const int n = size();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (entries_(a, b) > entries_(a, c) + entries_(c, b)) return false;
  return true;
}

SubPermutation::SubPermutation(int m, int n, std::vector<int> assign)
    : assign_(std::move(assign)), inverse_(n, -1) {
  if (m < 0 || n < m) throw std::invalid_argument("SubPermutation: need 0 <= m <= n");
  if (static_cast<int>(assign_.size()) != m)
    throw std::invalid_argument("SubPermutation: assignment length != m");
  for (int i = 0; i < m; ++i) {
    const int loc = assign_[i];
    if (loc < 0 || loc >= n) throw std::invalid_argument("SubPermutation: location out of range");
    if (inverse_[loc] != -1) throw std::invalid_argument("SubPermutation: assignment not injective");
    inverse_[loc] = i;
  }
}

void SubPermutation::swap_locations(int a, int b) {
  if (a < 0 || b < 0 || a >= n() || b >= n())
    throw std::invalid_argument("swap_locations: location out of range");
  if (a == b) return;
  const int fa = inverse_[a];
  const int fb = inverse_[b];
  if (fa >= 0) assign_[fa] = b;
  if (fb >= 0) assign_[fb] = a;
  inverse_[a] = fb;
  inverse_[b] = fa;
}

Matrix SubPermutation::to_matrix() const {
  Matrix x(m(), n());
  for (int i = 0; i < m(); ++i) x(i, assign_[i]) = 1.0;
  return x;
}

BoundSet bound_set(const SubPermutation& p) {
  BoundSet bs;
  bs.bound.reserve(p.m());
  bs.unbound.reserve(p.n() - p.m());
  for (int loc = 0; loc < p.n(); ++loc)
    (p.is_bound(loc) ? bs.bound : bs.unbound).push_back(loc);
  return bs;
}

double qap_cost(const FlowMatrix& f, const DistanceMatrix& d, const SubPermutation& p) {
  if (f.size() != p.m() || d.size() != p.n())
    throw std::invalid_argument("qap_cost: instance dimensions do not match assignment");
  const auto& assign = p.assignment();
  double cost = 0.0;
  for (int i = 0; i < p.m(); ++i) {
    const int li = assign[i];
    for (int j = 0; j < p.m(); ++j) {
      const double fij = f.at(i, j);
      if (fij != 0.0) cost += fij * d.at(li, assign[j]);
    }
  }
  return cost;
}

double qap_cost_bilinear(const FlowMatrix& f, const DistanceMatrix& d, const Matrix& a,
                         const Matrix& b) {
  const int m = f.size();
  const int n = d.size();
  if (a.rows() != m || a.cols() != n || b.rows() != m || b.cols() != n)
    throw std::invalid_argument("qap_cost_bilinear: operand shapes must be m x n");
  // tr(F A D B^T) = sum_{i,b'} (F A D)(i, b') * B(i, b')
  const Matrix fad = multiply(multiply(f.entries(), a), d.entries());
  double t = 0.0;
  for (int i = 0; i < m; ++i)
    for (int c = 0; c < n; ++c) t += fad(i, c) * b(i, c);
  return t;
}

std::vector<double> per_facility_cost(const FlowMatrix& f, const DistanceMatrix& d,
                                      const SubPermutation& p) {
  if (f.size() != p.m() || d.size() != p.n())
    throw std::invalid_argument("per_facility_cost: instance dimensions do not match assignment");
  const auto& assign = p.assignment();
  std::vector<double> out(p.m(), 0.0);
  for (int i = 0; i < p.m(); ++i) {
    double c = 0.0;
    for (int j = 0; j < p.m(); ++j) {
      const double fij = f.at(i, j);
      if (fij != 0.0) c += fij * d.at(assign[i], assign[j]);
    }
    out[i] = c;
  }
  return out;
}

}  // namespace qplace
