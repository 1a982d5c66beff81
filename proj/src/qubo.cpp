#include "qplace/qubo.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace qplace {

QuboProblem QuboProblem::from_dense(Matrix q, double offset) {
  if (q.rows() != q.cols()) throw std::invalid_argument("QuboProblem: matrix not square");
  QuboProblem p;
  p.offset_ = offset;
  p.q_ = Matrix(q.rows(), q.cols());
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < q.cols(); ++j) p.q_(i, j) = (q(i, j) + q(j, i)) / 2.0;
  return p;
}

QuboProblem QuboProblem::from_terms(int dim, const std::vector<std::tuple<int, int, double>>& terms,
                                    double offset) {
  Matrix q(dim, dim);
  for (const auto& [i, j, v] : terms) {
    if (i < 0 || j < 0 || i >= dim || j >= dim)
      throw std::invalid_argument("QuboProblem: term index out of range");
    if (i == j) {
      q(i, i) += v;
    } else {
      q(std::min(i, j), std::max(i, j)) += v / 2.0;
      q(std::max(i, j), std::min(i, j)) += v / 2.0;
    }
  }
  QuboProblem p;
  p.offset_ = offset;
  p.q_ = std::move(q);
  return p;
}

double QuboProblem::term(int i, int j) const {
  if (i == j) return q_(i, i);
  return 2.0 * q_(i, j);
}

double QuboProblem::objective(std::span<const std::uint8_t> x) const {
  if (static_cast<int>(x.size()) != dim())
    throw std::invalid_argument("QuboProblem::objective: wrong vector length");
  double v = offset_;
  for (int i = 0; i < dim(); ++i) {
    if (!x[i]) continue;
    v += q_(i, i);
    for (int j = i + 1; j < dim(); ++j)
      if (x[j]) v += 2.0 * q_(i, j);
  }
  return v;
}

std::string qubo_to_json(const QuboProblem& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (int i = 0; i < p.dim(); ++i)
    for (int j = i; j < p.dim(); ++j) {
      const double v = p.term(i, j);
      if (v != 0.0) terms.push_back({i, j, v});
    }
  nlohmann::json doc;
  doc["dim"] = p.dim();
  doc["offset"] = p.offset();
  doc["terms"] = std::move(terms);
  return doc.dump();
}

QuboProblem qubo_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("qubo_from_json: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dim") || !doc["dim"].is_number_integer())
    throw std::invalid_argument("qubo_from_json: missing integer field 'dim'");
  const int dim = doc["dim"].get<int>();
  if (dim < 0) throw std::invalid_argument("qubo_from_json: negative dim");
  const double offset = doc.value("offset", 0.0);
  std::vector<std::tuple<int, int, double>> terms;
  if (doc.contains("terms")) {
    if (!doc["terms"].is_array()) throw std::invalid_argument("qubo_from_json: 'terms' must be an array");
    for (const auto& t : doc["terms"]) {
      if (!t.is_array() || t.size() != 3)
        throw std::invalid_argument("qubo_from_json: each term must be [i, j, value]");
      terms.emplace_back(t[0].get<int>(), t[1].get<int>(), t[2].get<double>());
    }
  }
  return QuboProblem::from_terms(dim, terms, offset);
}

PenaltyParams default_penalties(const FlowMatrix& f, const DistanceMatrix& d) {
  const double bound = 1.0 + f.total() * d.max_entry();
  return PenaltyParams(bound, bound);
}

QuboProblem build_full_qubo(const FlowMatrix& f, const DistanceMatrix& d,
                            const PenaltyParams& params) {
  const int m = f.size();
  const int n = d.size();
  if (m > n) throw std::invalid_argument("build_full_qubo: more facilities than locations");
  const int dim = full_qubo_dim(m, n);
  const double lambda = params.lambda;
  const double mu = params.mu;
  Matrix q(dim, dim);
  const auto xi = [n](int i, int a) { return i * n + a; };
  const auto si = [m, n](int a) { return m * n + a; };

  // cost term x^T (F (x) D) x
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double fij = f.at(i, j);
      if (fij == 0.0) continue;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) q(xi(i, a), xi(j, b)) += fij * d.at(a, b);
    }

  // lambda * ||Ax - 1||^2: every facility occupies exactly one location
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < n; ++a) {
      q(xi(i, a), xi(i, a)) -= lambda;
      for (int b = 0; b < n; ++b)
        if (b != a) q(xi(i, a), xi(i, b)) += lambda;
    }

  // mu * ||Bx - s||^2: column sums agree with the slack bits
  for (int a = 0; a < n; ++a) {
    q(si(a), si(a)) += mu;
    for (int i = 0; i < m; ++i) {
      q(xi(i, a), xi(i, a)) += mu;
      q(xi(i, a), si(a)) -= mu;
      q(si(a), xi(i, a)) -= mu;
      for (int j = 0; j < m; ++j)
        if (j != i) q(xi(i, a), xi(j, a)) += mu;
    }
  }

  return QuboProblem::from_dense(std::move(q), lambda * static_cast<double>(m));
}

std::optional<SubPermutation> decode_full_qubo(std::span<const std::uint8_t> x, int m, int n) {
  if (static_cast<int>(x.size()) < m * n)
    throw std::invalid_argument("decode_full_qubo: vector shorter than m*n");
  std::vector<int> assign(m, -1);
  std::vector<char> taken(n, 0);
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < n; ++a) {
      if (!x[i * n + a]) continue;
      if (assign[i] != -1) return std::nullopt;  // row with two bits
      assign[i] = a;
    }
    if (assign[i] == -1) return std::nullopt;  // empty row
    if (taken[assign[i]]) return std::nullopt; // location claimed twice
    taken[assign[i]] = 1;
  }
  return SubPermutation(m, n, std::move(assign));
}

SubProblemIndex SubProblemIndex::make(const SubPermutation& p, std::vector<int> facilities,
                                      std::vector<int> unbound_locs) {
  SubProblemIndex idx;
  idx.facilities = std::move(facilities);
  idx.unbound_locs = std::move(unbound_locs);
  std::vector<char> seen_fac(p.m(), 0);
  for (int f : idx.facilities) {
    if (f < 0 || f >= p.m()) throw std::invalid_argument("SubProblemIndex: facility out of range");
    if (seen_fac[f]) throw std::invalid_argument("SubProblemIndex: duplicate facility");
    seen_fac[f] = 1;
    idx.image.push_back(p.location_of(f));
  }
  std::vector<char> seen_loc(p.n(), 0);
  for (int loc : idx.image) seen_loc[loc] = 1;
  for (int loc : idx.unbound_locs) {
    if (loc < 0 || loc >= p.n()) throw std::invalid_argument("SubProblemIndex: location out of range");
    if (p.is_bound(loc))
      throw std::invalid_argument("SubProblemIndex: listed unbound location is bound");
    if (seen_loc[loc]) throw std::invalid_argument("SubProblemIndex: duplicate location");
    seen_loc[loc] = 1;
  }
  idx.image_ext = idx.image;
  idx.image_ext.insert(idx.image_ext.end(), idx.unbound_locs.begin(), idx.unbound_locs.end());
  return idx;
}

QuboProblem build_subproblem_matrix(const FlowMatrix& f, const DistanceMatrix& d,
                                    const SubPermutation& p, const SubProblemIndex& idx) {
  if (f.size() != p.m() || d.size() != p.n())
    throw std::invalid_argument("build_subproblem_matrix: instance dimensions do not match");
  const int k = idx.k();
  const int cols = k + idx.k_u();
  if (cols > p.n()) throw std::invalid_argument("build_subproblem_matrix: k + k_u exceeds n");
  for (int t = 0; t < k; ++t)
    if (p.location_of(idx.facilities[t]) != idx.image[t])
      throw std::invalid_argument("build_subproblem_matrix: index image is stale");

  const int dim = k * cols;
  Matrix q(dim, dim);
  const auto var = [cols](int t, int u) { return t * cols + u; };

  // F_I (x) D_{I'_pi}
  for (int t = 0; t < k; ++t)
    for (int t2 = 0; t2 < k; ++t2) {
      const double fv = f.at(idx.facilities[t], idx.facilities[t2]);
      if (fv == 0.0) continue;
      for (int u = 0; u < cols; ++u)
        for (int u2 = 0; u2 < cols; ++u2)
          q(var(t, u), var(t2, u2)) += fv * d.at(idx.image_ext[u], idx.image_ext[u2]);
    }

  // complement coupling, linear because x is binary
  std::vector<char> in_sel(p.m(), 0);
  for (int fac : idx.facilities) in_sel[fac] = 1;
  for (int t = 0; t < k; ++t)
    for (int u = 0; u < cols; ++u) {
      double coupling = 0.0;
      for (int j = 0; j < p.m(); ++j) {
        if (in_sel[j]) continue;
        const double fv = f.at(idx.facilities[t], j);
        if (fv != 0.0) coupling += fv * d.at(p.location_of(j), idx.image_ext[u]);
      }
      q(var(t, u), var(t, u)) += 2.0 * coupling;
    }

  // complement self-cost is constant for the sub-problem
  double complement_cost = 0.0;
  for (int i = 0; i < p.m(); ++i) {
    if (in_sel[i]) continue;
    for (int j = 0; j < p.m(); ++j) {
      if (in_sel[j]) continue;
      const double fv = f.at(i, j);
      if (fv != 0.0) complement_cost += fv * d.at(p.location_of(i), p.location_of(j));
    }
  }

  return QuboProblem::from_dense(std::move(q), complement_cost);
}

namespace {

// c(A, B) = tr(F A D B^T) for two sparse deltas
double bilinear_sparse(const FlowMatrix& f, const DistanceMatrix& d, const DeltaMatrix& a,
                       const DeltaMatrix& b) {
  double v = 0.0;
  for (const auto& ea : a.entries)
    for (const auto& eb : b.entries)
      v += ea.value * eb.value * f.at(eb.facility, ea.facility) * d.at(ea.location, eb.location);
  return v;
}

// c(A, P) with P the current assignment
double bilinear_delta_perm(const FlowMatrix& f, const DistanceMatrix& d, const DeltaMatrix& a,
                           const SubPermutation& p) {
  double v = 0.0;
  for (const auto& ea : a.entries) {
    double inner = 0.0;
    for (int i = 0; i < p.m(); ++i) {
      const double fv = f.at(i, ea.facility);
      if (fv != 0.0) inner += fv * d.at(ea.location, p.location_of(i));
    }
    v += ea.value * inner;
  }
  return v;
}

// c(P, B)
double bilinear_perm_delta(const FlowMatrix& f, const DistanceMatrix& d, const SubPermutation& p,
                           const DeltaMatrix& b) {
  double v = 0.0;
  for (const auto& eb : b.entries) {
    double inner = 0.0;
    for (int j = 0; j < p.m(); ++j) {
      const double fv = f.at(eb.facility, j);
      if (fv != 0.0) inner += fv * d.at(p.location_of(j), eb.location);
    }
    v += eb.value * inner;
  }
  return v;
}

}  // namespace

QuboProblem build_alpha_qubo(const FlowMatrix& f, const DistanceMatrix& d, const SubPermutation& p,
                             const TwoCycleSet& cs) {
  if (f.size() != p.m() || d.size() != p.n())
    throw std::invalid_argument("build_alpha_qubo: instance dimensions do not match");
  if (cs.max_location() >= p.n())
    throw std::invalid_argument("build_alpha_qubo: cycle endpoint out of range");

  const int s = cs.size();
  std::vector<DeltaMatrix> deltas;
  deltas.reserve(s);
  for (const auto& c : cs) deltas.push_back(delta_matrix(p, c));

  Matrix q(s, s);
  for (int i = 0; i < s; ++i) {
    q(i, i) = bilinear_sparse(f, d, deltas[i], deltas[i]) +
              bilinear_delta_perm(f, d, deltas[i], p) + bilinear_perm_delta(f, d, p, deltas[i]);
    for (int j = i + 1; j < s; ++j) {
      q(i, j) = bilinear_sparse(f, d, deltas[i], deltas[j]);
      q(j, i) = bilinear_sparse(f, d, deltas[j], deltas[i]);
    }
  }
  return QuboProblem::from_dense(std::move(q), qap_cost(f, d, p));
}

}  // namespace qplace
