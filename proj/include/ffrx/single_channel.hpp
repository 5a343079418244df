#pragma once

#include "ffrx/core.hpp"

namespace ffrx {

/// Displaced candidate pair produced by the nulling sign rule: the more
/// probable state is brought to magnitude beta, the other lands at the full
/// separation plus beta. Ties null state 2.
struct DisplacedPair {
  Amplitude mu1;  ///< displaced amplitude reached under hypothesis 1
  Amplitude mu2;  ///< displaced amplitude reached under hypothesis 2
  double p1 = 0.5;
  double beta = 0.0;
};

/// Count threshold rule: outcomes n >= n_star select assign_high (the
/// larger-mean hypothesis); smaller outcomes select the other one.
struct ThresholdRule {
  int n_star = 0;
  Hypothesis assign_high = Hypothesis::alpha1;
};

enum class Strategy { on_off, pnr };

/// Applies the displacement sign rule for overshoot beta >= 0.
[[nodiscard]] DisplacedPair build_displaced(const BinaryEnsemble& e, double beta);

/// Error probability of the maximum-a-posteriori decision on the counting
/// distribution of a displaced pair, summed over outcomes up to truncation.
[[nodiscard]] double error_map_pnr(const DisplacedPair& d, const DetectorModel& det);

/// Closed-form error probability of the on-off displacement receiver:
/// p1 e^{-(2 alpha + beta)^2} + p2 (1 - e^{-beta^2}).
[[nodiscard]] double error_onoff(Amplitude alpha, double beta, double p1);

/// Smallest count at which the posterior favors the larger-mean hypothesis.
[[nodiscard]] ThresholdRule discrimination_threshold(const DisplacedPair& d);

struct BetaOptimum {
  double beta = 0.0;
  double error_rate = 0.0;
};

/// Error probability of the single-channel receiver for ensemble e at
/// overshoot beta. On-off strategy uses the closed form with the smaller
/// prior (the sign rule makes the two prior orderings mirror images); the
/// photon-number strategy evaluates the full counting sum.
[[nodiscard]] double single_channel_error(const BinaryEnsemble& e, double beta, Strategy strategy);

/// Locates the first local minimum of the single-channel error over beta by
/// a coarse scan (2000 points on [0, max(3, 4 sqrt(m))]) refined by
/// golden-section search to width 1e-8. A descent still running at the scan's
/// upper edge raises std::runtime_error carrying the offending bracket.
[[nodiscard]] BetaOptimum optimize_beta(const BinaryEnsemble& e, Strategy strategy);

}  // namespace ffrx
