#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace spoofkit {

/// Seedable random source with platform-independent output.
///
/// Bits come from std::mt19937_64, whose sequence is fixed by the C++
/// standard. The standard distributions are NOT portable, so every derived
/// draw is implemented here:
///   - uniform_index(n): rejection of the top partial block, then modulo.
///   - uniform01(): top 53 bits scaled by 2^-53, in [0, 1).
///   - normal(): Marsaglia polar method, spare value cached.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  std::size_t uniform_index(std::size_t n);
  double uniform01();
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  /// k distinct indices from [0, n), returned in ascending order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Sub-seed for a named stage: splitmix64(seed ^ fnv1a64(tag)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept;

}  // namespace spoofkit
