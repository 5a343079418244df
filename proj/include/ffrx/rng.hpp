#pragma once

#include <cstdint>

namespace ffrx {

/// Counter-based random stream: a SplitMix64 sequence whose starting state is
/// a hash of (seed, trial, slot). Draws depend only on the key and the draw
/// index, never on which worker consumes them, so sharded simulations
/// reproduce the single-threaded sequence exactly.
class CounterStream {
public:
  CounterStream(std::uint64_t seed, std::uint64_t trial, std::uint32_t slot) noexcept;

  [[nodiscard]] std::uint64_t next_u64() noexcept;
  /// Uniform double strictly inside (0, 1).
  [[nodiscard]] double next_uniform() noexcept;

private:
  std::uint64_t state_ = 0;
};

/// Poisson draw consuming the stream: CDF inversion below mean 10,
/// transformed rejection above.
[[nodiscard]] int sample_poisson(double mean, CounterStream& stream);

}  // namespace ffrx
