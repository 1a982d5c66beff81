#include "qplace/cycles.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

namespace qplace {

TwoCycleSet::TwoCycleSet(std::vector<TwoCycle> cycles) : cycles_(std::move(cycles)) {
  std::unordered_set<int> seen;
  for (const auto& c : cycles_) {
    if (!seen.insert(c.a).second || !seen.insert(c.b).second)
      throw std::invalid_argument("TwoCycleSet: cycles are not pairwise disjoint");
  }
}

int TwoCycleSet::max_location() const {
  int m = -1;
  for (const auto& c : cycles_) m = std::max(m, c.b);
  return m;
}

namespace {

void check_selection(const SubPermutation& p, const TwoCycleSet& cs, const CycleSelection& alpha) {
  if (static_cast<int>(alpha.size()) != cs.size())
    throw std::invalid_argument("apply_selection: selection length != cycle count");
  if (cs.max_location() >= p.n())
    throw std::invalid_argument("apply_selection: cycle endpoint out of range");
  for (auto bit : alpha)
    if (bit > 1) throw std::invalid_argument("apply_selection: selection entries must be 0 or 1");
}

}  // namespace

void apply_selection_inplace(SubPermutation& p, const TwoCycleSet& cs, const CycleSelection& alpha) {
  check_selection(p, cs, alpha);
  for (int i = 0; i < cs.size(); ++i)
    if (alpha[i]) p.swap_locations(cs[i].a, cs[i].b);
}

SubPermutation apply_selection(const SubPermutation& p, const TwoCycleSet& cs,
                               const CycleSelection& alpha) {
  SubPermutation out = p;
  apply_selection_inplace(out, cs, alpha);
  return out;
}

Matrix DeltaMatrix::to_dense() const {
  Matrix m(rows, cols);
  for (const auto& e : entries) m(e.facility, e.location) += e.value;
  return m;
}

DeltaMatrix delta_matrix(const SubPermutation& p, const TwoCycle& c) {
  if (c.b >= p.n()) throw std::invalid_argument("delta_matrix: cycle endpoint out of range");
  DeltaMatrix d;
  d.rows = p.m();
  d.cols = p.n();
  const int fa = p.facility_at(c.a);
  const int fb = p.facility_at(c.b);
  if (fa >= 0) {
    d.entries.push_back({fa, c.a, -1.0});
    d.entries.push_back({fa, c.b, +1.0});
  }
  if (fb >= 0) {
    d.entries.push_back({fb, c.b, -1.0});
    d.entries.push_back({fb, c.a, +1.0});
  }
  return d;
}

TwoCycleSet sample_cycle_set(const std::vector<int>& selected_facilities,
                             const std::vector<int>& unbound_locations, const SubPermutation& p,
                             const LegalityOracle& legal, Rng& rng, int max_resample) {
  const int k = static_cast<int>(selected_facilities.size());
  const int k_u = static_cast<int>(unbound_locations.size());
  if (k_u > k) throw std::invalid_argument("sample_cycle_set: more unbound locations than facilities");
  for (int loc : unbound_locations)
    if (loc < 0 || loc >= p.n() || p.is_bound(loc))
      throw std::invalid_argument("sample_cycle_set: unbound location list contains a bound or out-of-range location");
  for (int f : selected_facilities)
    if (f < 0 || f >= p.m())
      throw std::invalid_argument("sample_cycle_set: facility index out of range");

  const int swap_pairs = (k - k_u) / 2;
  int best_moves = 0;
  int best_swaps = 0;

  std::vector<int> facs = selected_facilities;
  std::vector<int> unbound = unbound_locations;

  for (int attempt = 0; attempt < max_resample; ++attempt) {
    rng.shuffle(facs);
    rng.shuffle(unbound);

    std::vector<TwoCycle> cycles;
    cycles.reserve(k_u + swap_pairs);

    // Move-cycles: pair facilities with unbound targets they fit on.
    std::vector<char> target_used(unbound.size(), 0);
    std::vector<int> leftover;
    int moves = 0;
    for (int f : facs) {
      bool placed = false;
      if (moves < k_u) {
        for (std::size_t t = 0; t < unbound.size(); ++t) {
          if (target_used[t]) continue;
          if (legal(f, unbound[t])) {
            target_used[t] = 1;
            cycles.emplace_back(p.location_of(f), unbound[t]);
            ++moves;
            placed = true;
            break;
          }
        }
      }
      if (!placed) leftover.push_back(f);
    }

    // Swap-cycles on the remaining facilities' locations; a swap is legal
    // only when both facilities fit each other's cell.
    int swaps = 0;
    std::vector<char> paired(leftover.size(), 0);
    for (std::size_t i = 0; i < leftover.size() && swaps < swap_pairs; ++i) {
      if (paired[i]) continue;
      for (std::size_t j = i + 1; j < leftover.size(); ++j) {
        if (paired[j]) continue;
        const int fi = leftover[i];
        const int fj = leftover[j];
        if (legal(fi, p.location_of(fj)) && legal(fj, p.location_of(fi))) {
          paired[i] = paired[j] = 1;
          cycles.emplace_back(p.location_of(fi), p.location_of(fj));
          ++swaps;
          break;
        }
      }
    }

    if (moves == k_u && swaps == swap_pairs) return TwoCycleSet(std::move(cycles));
    best_moves = std::max(best_moves, moves);
    best_swaps = std::max(best_swaps, swaps);
  }

  throw sampling_error("sample_cycle_set: no legal pairing after " + std::to_string(max_resample) +
                       " attempts (best: " + std::to_string(best_moves) + "/" +
                       std::to_string(k_u) + " moves, " + std::to_string(best_swaps) + "/" +
                       std::to_string(swap_pairs) + " swaps)");
}

std::pair<TwoCycleSet, TwoCycleSet> decompose_into_two_involutions(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  std::vector<char> hit(n, 0);
  for (int v : perm) {
    if (v < 0 || v >= n || hit[v]) throw std::invalid_argument("decompose: input is not a bijection");
    hit[v] = 1;
  }

  std::vector<TwoCycle> left;   // i -> 1 - i (mod len), per cycle
  std::vector<TwoCycle> right;  // i -> -i (mod len), per cycle
  std::vector<char> visited(n, 0);
  for (int start = 0; start < n; ++start) {
    if (visited[start]) continue;
    std::vector<int> cyc;
    for (int v = start; !visited[v]; v = perm[v]) {
      visited[v] = 1;
      cyc.push_back(v);
    }
    const int len = static_cast<int>(cyc.size());
    if (len == 1) continue;
    for (int i = 1; 2 * i < len; ++i) right.emplace_back(cyc[i], cyc[len - i]);
    left.emplace_back(cyc[0], cyc[1]);
    for (int i = 2; 2 * i < len + 1; ++i) left.emplace_back(cyc[i], cyc[len + 1 - i]);
  }
  return {TwoCycleSet(std::move(left)), TwoCycleSet(std::move(right))};
}

}  // namespace qplace
