#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace otfs {

/// SplitMix64 finalizer. Used to turn a user seed (and stream ids) into
/// well-mixed engine seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic child seed for a numbered sub-stream of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_a, std::uint64_t stream_b);

/// Portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not, so every draw goes through
/// the helpers below:
///   - uniform():        top 53 bits of one engine word, scaled to [0, 1)
///   - uniform_index(n): rejection sampling on the low bits, unbiased
///   - normal():         Box-Muller on two uniform() draws, second value cached
/// Same seed gives the same stream on every platform with an IEEE libm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  std::size_t uniform_index(std::size_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// k distinct indices from [0, n) via partial Fisher-Yates, in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace otfs
