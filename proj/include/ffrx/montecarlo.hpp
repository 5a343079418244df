#pragma once

#include <cstdint>
#include <optional>

#include "ffrx/core.hpp"
#include "ffrx/feedforward.hpp"
#include "ffrx/rng.hpp"

namespace ffrx {

struct SimConfig {
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  int shards = 1;  ///< worker threads; has no effect on the result bits
};

enum class Method { exact, monte_carlo };

struct ErrorReport {
  double error_rate = 0.0;
  double std_error = 0.0;  ///< sqrt(rate (1 - rate) / trials); 0 for exact results
  std::uint64_t trials = 0;
  Method method = Method::monte_carlo;
  std::optional<std::uint64_t> seed;  ///< absent for exact results
};

/// One detector outcome for incident displaced amplitude mu; on-off readout
/// clips the count to {0, 1}.
[[nodiscard]] int sample_outcome(Amplitude mu, const DetectorModel& det, CounterStream& stream);

/// Estimates the receiver error rate over cfg.trials independent trials.
/// Trial t draws the true hypothesis from stream (seed, t, slot 0) and the
/// outcome of channel k from stream (seed, t, slot k + 1), so the estimate is
/// a pure function of (plan, ensemble, trials, seed) regardless of sharding.
[[nodiscard]] ErrorReport simulate(const ChannelPlan& plan, const BinaryEnsemble& e,
                                   const SimConfig& cfg);

}  // namespace ffrx
