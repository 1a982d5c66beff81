#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace qplace {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent substream seed for (seed, stream). Used to give every SA read
// and every inner QUBO solve its own reproducible random stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// mt19937_64 plus hand-rolled sampling, so sequences depend only on the
// engine (which the standard pins down) and not on library-specific
// distribution internals. Runs must replay bit-identically across builds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // uniform in [0, n); n >= 1
  std::size_t below(std::size_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return static_cast<std::size_t>(x % n);
  }

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  // k distinct values out of [0, n), in random order
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    shuffle(all);
    all.resize(k);
    return all;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace qplace
