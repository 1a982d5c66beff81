#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qplace/qap.hpp"
#include "qplace/random.hpp"

namespace qplace {

// Cycle sampling could not find a legal pairing; callers may re-draw the
// index sets and try again.
class sampling_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transposition of two locations, normalized so a < b.
struct TwoCycle {
  int a;
  int b;

  TwoCycle(int first, int second) : a(first), b(second) {
    if (a > b) std::swap(a, b);
    if (a < 0 || a == b) throw std::invalid_argument("TwoCycle: endpoints must be distinct and nonnegative");
  }

  bool touches(int loc) const { return loc == a || loc == b; }
  bool operator==(const TwoCycle& o) const { return a == o.a && b == o.b; }
};

// Pairwise disjoint set of transpositions; disjointness makes the products
// of any subset commute, so a selection can be applied in any order.
class TwoCycleSet {
 public:
  TwoCycleSet() = default;
  explicit TwoCycleSet(std::vector<TwoCycle> cycles);

  int size() const { return static_cast<int>(cycles_.size()); }
  bool empty() const { return cycles_.empty(); }
  const TwoCycle& operator[](int i) const { return cycles_[i]; }
  const std::vector<TwoCycle>& cycles() const { return cycles_; }

  auto begin() const { return cycles_.begin(); }
  auto end() const { return cycles_.end(); }

  int max_location() const;  // largest endpoint, -1 when empty

 private:
  std::vector<TwoCycle> cycles_;
};

// Selection bits, one per cycle in a TwoCycleSet.
using CycleSelection = std::vector<std::uint8_t>;

// Applies every cycle with selection bit 1 to p. A cycle whose two
// locations are both bound swaps the occupants; a bound/unbound pair moves
// one facility; two unbound locations change nothing.
SubPermutation apply_selection(const SubPermutation& p, const TwoCycleSet& cs,
                               const CycleSelection& alpha);
void apply_selection_inplace(SubPermutation& p, const TwoCycleSet& cs,
                             const CycleSelection& alpha);

// Sparse difference between the assignment matrix after applying one cycle
// and before: at most two affected facilities, two entries each.
struct DeltaMatrix {
  struct Entry {
    int facility;
    int location;
    double value;  // +1 or -1
  };

  int rows = 0;  // m
  int cols = 0;  // n
  std::vector<Entry> entries;

  Matrix to_dense() const;
};

DeltaMatrix delta_matrix(const SubPermutation& p, const TwoCycle& c);

// Draws exactly k_u + floor((k - k_u)/2) disjoint legal cycles for the
// selected facilities: k_u move-cycles pairing current locations with the
// given unbound locations, then swap-cycles pairing the remaining selected
// facilities' locations. Pairings are found by shuffling and greedy legal
// matching, retried up to max_resample times before raising sampling_error.
TwoCycleSet sample_cycle_set(const std::vector<int>& selected_facilities,
                             const std::vector<int>& unbound_locations,
                             const SubPermutation& p, const LegalityOracle& legal, Rng& rng,
                             int max_resample = 50);

// Splits a full permutation (perm[i] = image of i) into two disjoint sets
// of transpositions whose composition reproduces it: applying the second
// set first, then the first, equals perm.
std::pair<TwoCycleSet, TwoCycleSet> decompose_into_two_involutions(const std::vector<int>& perm);

}  // namespace qplace
