#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace rmlr {

/// Mixes a master seed with a list of stream tags into an independent
/// 64-bit seed (splitmix64 finalizer applied per tag). Streams keyed by
/// different tag tuples are decorrelated, so changing the size of one
/// split or sweep cell never perturbs another.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

/// Stable tag for a string label ("light1", "hrpca", ...).
std::uint64_t stream_tag(std::string_view label);

/// Thin wrapper around mt19937_64 exposing the draws used across the
/// library. Deterministic for a given seed on a given standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// +1 or -1 with equal probability.
  double rademacher() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }
  /// Index drawn with probability proportional to weights[i].
  int categorical(std::span<const double> weights);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace rmlr
