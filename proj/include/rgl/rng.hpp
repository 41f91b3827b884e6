#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "rgl/matrix.hpp"

namespace rgl {

/// Recorded in every output artifact that depends on random draws.
inline constexpr const char* kRngAlgorithm =
    "mt19937_64 streams keyed by splitmix64(seed, tags...)";

std::uint64_t splitmix64(std::uint64_t x);

/// Hashes a base seed and a tag path into an independent stream seed, so
/// draws for e.g. (column i, row r) never depend on how many draws other
/// streams consumed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t base, std::initializer_list<std::uint64_t> tags)
      : engine_(derive_seed(base, tags)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }
  /// Fills `out` with +-1, consuming one engine word per 64 entries (high bit first).
  void fill_signs(std::span<double> out) {
    std::uint64_t word = 0;
    for (Index k = 0; k < out.size(); ++k) {
      if (k % 64 == 0) word = engine_();
      out[k] = (word >> 63) ? 1.0 : -1.0;
      word <<= 1;
    }
  }
  Index index_below(Index n) {
    return std::uniform_int_distribution<Index>(0, n - 1)(engine_);
  }

  /// Uniformly random k-subset of {0..n-1}, sorted ascending.
  std::vector<Index> subset(Index n, Index k);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace rgl
