#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ffrx/core.hpp"
#include "ffrx/single_channel.hpp"

namespace ffrx {

/// Multichannel receiver configuration: how the signal energy is split, the
/// per-channel displacement overshoots (in channel-mode amplitude units), and
/// the detector used in every channel.
struct ChannelPlan {
  int n_channels = 1;
  std::vector<double> energy_fractions;  ///< nonnegative, sums to 1
  std::vector<double> beta_schedule;     ///< nonnegative overshoot per channel
  DetectorModel detector;

  /// Equal energy split with the given overshoot schedule.
  [[nodiscard]] static ChannelPlan homogeneous(int n, std::vector<double> betas,
                                               const DetectorModel& det);
  /// Equal split with overshoots from the asymptotic schedule evaluated at
  /// channel midpoints (k - 1/2) / n and rescaled by sqrt(1/n) from flux
  /// units into channel-mode amplitude units.
  [[nodiscard]] static ChannelPlan asymptotic(int n, double m, const DetectorModel& det);

  /// Throws std::domain_error on inconsistent sizes or out-of-range entries.
  void validate() const;
};

/// Snapshot of the receiver after a number of channels have been absorbed.
struct FeedForwardState {
  double posterior_p1 = 0.5;
  int channel_index = 0;           ///< channels absorbed so far
  int on_count = 0;                ///< channels that registered any photon
  std::vector<int> outcome_trace;  ///< outcomes absorbed so far, in order
};

/// Asymptotic overshoot schedule in continuum flux units,
/// beta(kappa) = (1 - s) / s * sqrt(m) with s = sqrt(1 - e^{-4 m kappa}),
/// where kappa in (0, 1] is the fraction of the signal already consumed.
[[nodiscard]] double beta_schedule_asymptotic(double m, double kappa);

/// Posterior probability of hypothesis 1 after observing `outcome` on the
/// displaced pair (mu1, mu2), computed in log-likelihood space.
[[nodiscard]] double bayes_update(double p1, int outcome, Amplitude mu1, Amplitude mu2,
                                  const DetectorModel& det);

/// Walks a plan channel by channel, carrying the running posterior and the
/// on-count. Copyable, so exact enumeration can fork it per outcome branch.
/// Callers absorb channels in order 0..n_channels-1.
class ChainWalker {
public:
  ChainWalker(const ChannelPlan& plan, const BinaryEnsemble& e);

  /// Displaced pair seen by the given channel at the current posterior.
  [[nodiscard]] DisplacedPair displaced(int channel) const;
  /// Folds one observed outcome into the posterior and the on-count.
  void absorb(int channel, int outcome);
  [[nodiscard]] double posterior_p1() const noexcept { return posterior_; }
  [[nodiscard]] int on_count() const noexcept { return on_count_; }
  /// Maximum-a-posteriori decision; a tied posterior selects hypothesis 2.
  [[nodiscard]] Hypothesis decide() const noexcept {
    return posterior_ > 0.5 ? Hypothesis::alpha1 : Hypothesis::alpha2;
  }

private:
  const ChannelPlan* plan_;
  double alpha1_;
  double alpha2_;
  double posterior_;
  int on_count_ = 0;
};

struct ChainResult {
  Hypothesis decision = Hypothesis::alpha2;
  std::vector<FeedForwardState> trace;  ///< n_channels + 1 states, prior first
};

/// Replays a full outcome record through the feed-forward chain.
[[nodiscard]] ChainResult run_chain(const ChannelPlan& plan, const BinaryEnsemble& e,
                                    std::span<const int> outcomes);

/// Reference decision rule for the symmetric nulling chain: an odd number of
/// channels with a photon selects hypothesis 1, an even number hypothesis 2.
[[nodiscard]] Hypothesis parity_decision(int on_count);

/// Raised when exact enumeration would exceed the branch budget; the message
/// points at the Monte Carlo simulator.
class BranchBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExactResult {
  double error_rate = 0.0;
  double branch_mass1 = 0.0;  ///< enumerated probability mass under hypothesis 1
  double branch_mass2 = 0.0;
  [[nodiscard]] double tail_deficit() const noexcept {
    return std::max(1.0 - branch_mass1, 1.0 - branch_mass2);
  }
};

/// Exact receiver error by depth-first enumeration of the outcome tree:
/// 2^n branches for on-off detection (n <= 24), the product of per-channel
/// truncation caps for photon-number detection (budget 1e7 branches).
[[nodiscard]] ExactResult exact_error(const ChannelPlan& plan, const BinaryEnsemble& e);

struct PlanOptimum {
  ChannelPlan plan;
  double error_rate = 0.0;
  bool converged = false;
};

/// Optimizes a plan against an arbitrary error functional (used with exact or
/// Monte Carlo objectives). Overshoots are optimized in log(1 + beta) space;
/// inhomogeneous plans add a softmax parameterization of the energy split.
[[nodiscard]] PlanOptimum optimize_plan_with(int n_channels, const BinaryEnsemble& e,
                                             const DetectorModel& det, bool homogeneous,
                                             const std::function<double(const ChannelPlan&)>& objective);

/// Optimizes the exact receiver error over the plan's free parameters,
/// starting from the asymptotic schedule (or the single-channel optimum when
/// n_channels is 1).
[[nodiscard]] PlanOptimum optimize_plan(int n_channels, const BinaryEnsemble& e,
                                        const DetectorModel& det, bool homogeneous);

}  // namespace ffrx
