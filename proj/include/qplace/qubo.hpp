#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "qplace/cycles.hpp"
#include "qplace/qap.hpp"

namespace qplace {

// Symmetric QUBO matrix plus a constant offset; objective(x) = x^T q x + offset
// over binary x. Construction symmetrizes, which leaves the quadratic form
// unchanged.
class QuboProblem {
 public:
  QuboProblem() = default;

  static QuboProblem from_dense(Matrix q, double offset = 0.0);

  // terms use coefficient-of-x_i*x_j semantics with i <= j; a diagonal term
  // is the linear coefficient of x_i.
  static QuboProblem from_terms(int dim, const std::vector<std::tuple<int, int, double>>& terms,
                                double offset = 0.0);

  int dim() const { return q_.rows(); }
  double offset() const { return offset_; }
  const Matrix& q() const { return q_; }

  // coefficient of x_i x_j in the expanded objective (i <= j semantics)
  double term(int i, int j) const;

  double objective(std::span<const std::uint8_t> x) const;

 private:
  Matrix q_;
  double offset_ = 0.0;
};

// Exchange document {"dim": int, "offset": float, "terms": [[i, j, value], ...]}
// with i <= j and value the coefficient of x_i x_j; writers emit sorted
// nonzero terms, readers accept any order and symmetrize.
std::string qubo_to_json(const QuboProblem& p);
QuboProblem qubo_from_json(const std::string& text);

struct PenaltyParams {
  double lambda;
  double mu;

  PenaltyParams(double l, double m) : lambda(l), mu(m) {
    if (l <= 0.0 || m <= 0.0) throw std::invalid_argument("PenaltyParams: must be positive");
  }
};

// lambda = mu = 1 + total flow * max distance; coarse but large enough that
// violating one assignment constraint can never pay off.
PenaltyParams default_penalties(const FlowMatrix& f, const DistanceMatrix& d);

// Monolithic penalty formulation over mn assignment bits plus n slack bits.
// Variable layout: x[i*n + a] places facility i on location a; slack for
// location a sits at index m*n + a.
QuboProblem build_full_qubo(const FlowMatrix& f, const DistanceMatrix& d,
                            const PenaltyParams& params);

inline int full_qubo_dim(int m, int n) { return m * n + n; }

// Reads the assignment block of a full-QUBO solution back into a
// sub-permutation; nullopt when some facility row does not have exactly one
// bit set or a location is claimed twice.
std::optional<SubPermutation> decode_full_qubo(std::span<const std::uint8_t> x, int m, int n);

// Index bookkeeping for one sub-problem: selected facilities I, extra
// unbound locations J, the image of I under the current assignment, and the
// combined candidate location set.
struct SubProblemIndex {
  std::vector<int> facilities;    // I, |I| = k
  std::vector<int> unbound_locs;  // J, |J| = k_u
  std::vector<int> image;         // locations of I under p
  std::vector<int> image_ext;     // image followed by J

  static SubProblemIndex make(const SubPermutation& p, std::vector<int> facilities,
                              std::vector<int> unbound_locs);

  int k() const { return static_cast<int>(facilities.size()); }
  int k_u() const { return static_cast<int>(unbound_locs.size()); }
  int dim() const { return k() * (k() + k_u()); }
};

// Sub-problem cost matrix over x = vec of the k x (k+k_u) assignment block;
// built from rows of F and entries of D without forming any Kronecker
// product. The offset carries the complement's self-cost so the objective
// of a feasible sub-assignment equals the full QAP cost.
QuboProblem build_subproblem_matrix(const FlowMatrix& f, const DistanceMatrix& d,
                                    const SubPermutation& p, const SubProblemIndex& idx);

// s-dimensional selection QUBO: objective(alpha) equals the QAP cost after
// applying the alpha-selected cycles, exactly, for every alpha.
QuboProblem build_alpha_qubo(const FlowMatrix& f, const DistanceMatrix& d,
                             const SubPermutation& p, const TwoCycleSet& cs);

}  // namespace qplace
