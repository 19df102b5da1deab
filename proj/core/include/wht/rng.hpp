#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace wht {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The stream is fully determined by (key, counter); the same seed produces the
// same bits on every platform. Each 128-bit block yields two 64-bit outputs.
// Normal deviates use Box-Muller on top of the uniform stream so that the
// distribution code is in-repo and not implementation-defined.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Standard normal N(0, 1).
  double normal();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Raw Philox block for a given counter, exposed for tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 2> key,
                                            std::array<std::uint32_t, 4> counter);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t counter_ = 0;
  std::uint64_t stream_;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive independent per-cell seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Draws k distinct indices uniformly from [0, n), returned in draw order.
std::vector<std::size_t> sample_without_replacement(Philox4x32& rng, std::size_t n,
                                                    std::size_t k);

}  // namespace wht
