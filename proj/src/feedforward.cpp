#include "ffrx/feedforward.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ffrx/optimizer.hpp"

namespace ffrx {

namespace {

/// Accumulates a sum with Kahan compensation.
struct CompensatedSum {
  double total = 0.0;
  double carry = 0.0;

  void add(double term) {
    const double y = term - carry;
    const double t = total + y;
    carry = (t - total) - y;
    total = t;
  }
};

[[noreturn]] void fail_domain(const std::string& message) { throw std::domain_error(message); }

double on_off_log_likelihood(int outcome, double mean) {
  if (outcome == 0) return -mean;
  // Any positive count registers as a single "on" event.
  if (mean == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(-std::expm1(-mean));
}

}  // namespace

ChannelPlan ChannelPlan::homogeneous(int n, std::vector<double> betas, const DetectorModel& det) {
  ChannelPlan plan;
  plan.n_channels = n;
  plan.energy_fractions.assign(static_cast<std::size_t>(std::max(n, 0)), n > 0 ? 1.0 / n : 0.0);
  plan.beta_schedule = std::move(betas);
  plan.detector = det;
  plan.validate();
  return plan;
}

ChannelPlan ChannelPlan::asymptotic(int n, double m, const DetectorModel& det) {
  if (n < 1) fail_domain("ChannelPlan: n_channels must be at least 1, got " + std::to_string(n));
  std::vector<double> betas(static_cast<std::size_t>(n));
  // The continuum schedule hands out overshoot per unit of signal flux; a
  // channel holding a 1/n energy share sees it scaled by sqrt(1/n).
  const double scale = std::sqrt(1.0 / n);
  for (int k = 0; k < n; ++k) {
    betas[static_cast<std::size_t>(k)] = beta_schedule_asymptotic(m, (k + 0.5) / n) * scale;
  }
  return homogeneous(n, std::move(betas), det);
}

void ChannelPlan::validate() const {
  if (n_channels < 1) {
    fail_domain("ChannelPlan: n_channels must be at least 1, got " + std::to_string(n_channels));
  }
  const auto count = static_cast<std::size_t>(n_channels);
  if (energy_fractions.size() != count) {
    fail_domain("ChannelPlan: expected " + std::to_string(n_channels) +
                " energy fractions, got " + std::to_string(energy_fractions.size()));
  }
  if (beta_schedule.size() != count) {
    fail_domain("ChannelPlan: expected " + std::to_string(n_channels) +
                " overshoot entries, got " + std::to_string(beta_schedule.size()));
  }
  double sum = 0.0;
  for (double f : energy_fractions) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      fail_domain("ChannelPlan: energy fractions must be finite and nonnegative");
    }
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    fail_domain("ChannelPlan: energy fractions must sum to 1, got " + std::to_string(sum));
  }
  for (double b : beta_schedule) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      fail_domain("ChannelPlan: overshoots must be finite and nonnegative");
    }
  }
  detector.validate();
}

double beta_schedule_asymptotic(double m, double kappa) {
  if (!(m > 0.0) || !std::isfinite(m)) {
    fail_domain("beta_schedule_asymptotic: m must be positive and finite");
  }
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    fail_domain("beta_schedule_asymptotic: kappa must lie in (0, 1], got " + std::to_string(kappa));
  }
  // (1 - s) / s with s = sqrt(1 - e^{-4 m kappa}), rearranged so nothing
  // cancels when s approaches 1.
  const double decay = std::exp(-4.0 * m * kappa);
  const double s = std::sqrt(-std::expm1(-4.0 * m * kappa));
  return decay / (s * (1.0 + s)) * std::sqrt(m);
}

double bayes_update(double p1, int outcome, Amplitude mu1, Amplitude mu2,
                    const DetectorModel& det) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) {
    fail_domain("bayes_update: p1 must lie in [0, 1], got " + std::to_string(p1));
  }
  if (outcome < 0) {
    fail_domain("bayes_update: outcome must be nonnegative, got " + std::to_string(outcome));
  }
  det.validate();
  if (p1 == 0.0) return 0.0;
  if (p1 == 1.0) return 1.0;

  const double mean1 = det.mean_count(mu1.value());
  const double mean2 = det.mean_count(mu2.value());
  double log_l1 = 0.0;
  double log_l2 = 0.0;
  if (det.kind == DetectorKind::on_off) {
    log_l1 = on_off_log_likelihood(outcome, mean1);
    log_l2 = on_off_log_likelihood(outcome, mean2);
  } else {
    log_l1 = poisson_log_pmf(outcome, mean1);
    log_l2 = poisson_log_pmf(outcome, mean2);
  }
  const bool dead1 = std::isinf(log_l1);
  const bool dead2 = std::isinf(log_l2);
  if (dead1 && dead2) {
    fail_domain("bayes_update: outcome " + std::to_string(outcome) +
                " has zero likelihood under both hypotheses");
  }
  if (dead1) return 0.0;
  if (dead2) return 1.0;
  // p' = p L1 / (p L1 + (1-p) L2), evaluated through the odds ratio so a
  // large likelihood gap saturates cleanly instead of overflowing.
  const double odds = (1.0 - p1) / p1 * std::exp(log_l2 - log_l1);
  return 1.0 / (1.0 + odds);
}

ChainWalker::ChainWalker(const ChannelPlan& plan, const BinaryEnsemble& e)
    : plan_(&plan),
      alpha1_(e.alpha1().value()),
      alpha2_(e.alpha2().value()),
      posterior_(e.p1()) {}

DisplacedPair ChainWalker::displaced(int channel) const {
  if (channel < 0 || channel >= plan_->n_channels) {
    throw std::invalid_argument("ChainWalker: channel " + std::to_string(channel) +
                                " is out of range for " + std::to_string(plan_->n_channels) +
                                " channels");
  }
  const double scale = std::sqrt(plan_->energy_fractions[static_cast<std::size_t>(channel)]);
  const BinaryEnsemble slice(Amplitude(alpha1_ * scale), Amplitude(alpha2_ * scale), posterior_);
  return build_displaced(slice, plan_->beta_schedule[static_cast<std::size_t>(channel)]);
}

void ChainWalker::absorb(int channel, int outcome) {
  const DisplacedPair d = displaced(channel);
  posterior_ = bayes_update(posterior_, outcome, d.mu1, d.mu2, plan_->detector);
  if (outcome > 0) ++on_count_;
}

ChainResult run_chain(const ChannelPlan& plan, const BinaryEnsemble& e,
                      std::span<const int> outcomes) {
  plan.validate();
  if (static_cast<int>(outcomes.size()) != plan.n_channels) {
    throw std::invalid_argument("run_chain: got " + std::to_string(outcomes.size()) +
                                " outcomes for " + std::to_string(plan.n_channels) + " channels");
  }
  for (int outcome : outcomes) {
    if (outcome < 0) throw std::invalid_argument("run_chain: outcomes must be nonnegative");
  }

  ChainWalker walker(plan, e);
  ChainResult result;
  result.trace.reserve(static_cast<std::size_t>(plan.n_channels) + 1);
  std::vector<int> seen;
  seen.reserve(static_cast<std::size_t>(plan.n_channels));
  result.trace.push_back(FeedForwardState{walker.posterior_p1(), 0, 0, seen});
  for (int k = 0; k < plan.n_channels; ++k) {
    walker.absorb(k, outcomes[static_cast<std::size_t>(k)]);
    seen.push_back(outcomes[static_cast<std::size_t>(k)]);
    result.trace.push_back(FeedForwardState{walker.posterior_p1(), k + 1, walker.on_count(), seen});
  }
  result.decision = walker.decide();
  return result;
}

Hypothesis parity_decision(int on_count) {
  if (on_count < 0) {
    fail_domain("parity_decision: on_count must be nonnegative, got " + std::to_string(on_count));
  }
  return on_count % 2 == 1 ? Hypothesis::alpha1 : Hypothesis::alpha2;
}

namespace {

struct Enumerator {
  const ChannelPlan& plan;
  const std::vector<int>& caps;
  double p1;
  double p2;
  CompensatedSum error;
  CompensatedSum mass1;
  CompensatedSum mass2;

  void visit(const ChainWalker& walker, int channel, double weight1, double weight2) {
    if (channel == plan.n_channels) {
      if (walker.decide() == Hypothesis::alpha1) {
        error.add(p2 * weight2);
      } else {
        error.add(p1 * weight1);
      }
      mass1.add(weight1);
      mass2.add(weight2);
      return;
    }
    const DisplacedPair d = walker.displaced(channel);
    const double mean1 = plan.detector.mean_count(d.mu1.value());
    const double mean2 = plan.detector.mean_count(d.mu2.value());
    const bool on_off = plan.detector.kind == DetectorKind::on_off;
    for (int outcome = 0; outcome <= caps[static_cast<std::size_t>(channel)]; ++outcome) {
      double l1 = 0.0;
      double l2 = 0.0;
      if (on_off) {
        l1 = outcome == 0 ? std::exp(-mean1) : -std::expm1(-mean1);
        l2 = outcome == 0 ? std::exp(-mean2) : -std::expm1(-mean2);
      } else {
        l1 = poisson_pmf(outcome, mean1);
        l2 = poisson_pmf(outcome, mean2);
      }
      if (l1 == 0.0 && l2 == 0.0) continue;  // zero-mass branch
      ChainWalker child = walker;
      child.absorb(channel, outcome);
      visit(child, channel + 1, weight1 * l1, weight2 * l2);
    }
  }
};

}  // namespace

ExactResult exact_error(const ChannelPlan& plan, const BinaryEnsemble& e) {
  plan.validate();
  const int n = plan.n_channels;
  std::vector<int> caps(static_cast<std::size_t>(n));
  if (plan.detector.kind == DetectorKind::on_off) {
    if (n > 24) {
      throw BranchBudgetError("exact_error: on-off enumeration covers 2^" + std::to_string(n) +
                              " branches, beyond the 24-channel budget; use the Monte Carlo "
                              "simulator instead");
    }
    std::fill(caps.begin(), caps.end(), 1);
  } else {
    const double separation = std::fabs(e.alpha1().value() - e.alpha2().value());
    double branches = 1.0;
    for (int k = 0; k < n; ++k) {
      const auto idx = static_cast<std::size_t>(k);
      const double far_mu = separation * std::sqrt(plan.energy_fractions[idx]) +
                            plan.beta_schedule[idx];
      caps[idx] = plan.detector.truncation_for(plan.detector.mean_count(far_mu));
      branches *= caps[idx] + 1.0;
    }
    if (branches > 1e7) {
      throw BranchBudgetError("exact_error: photon-number enumeration needs about " +
                              std::to_string(static_cast<unsigned long long>(branches)) +
                              " branches, beyond the 1e7 budget; use the Monte Carlo simulator "
                              "instead");
    }
  }

  Enumerator enumerator{plan, caps, e.p1(), e.p2(), {}, {}, {}};
  enumerator.visit(ChainWalker(plan, e), 0, 1.0, 1.0);
  return ExactResult{enumerator.error.total, enumerator.mass1.total, enumerator.mass2.total};
}

PlanOptimum optimize_plan_with(int n_channels, const BinaryEnsemble& e, const DetectorModel& det,
                               bool homogeneous,
                               const std::function<double(const ChannelPlan&)>& objective) {
  if (n_channels < 1) {
    throw std::invalid_argument("optimize_plan: n_channels must be at least 1, got " +
                                std::to_string(n_channels));
  }
  det.validate();
  const double m = e.mean_photons();
  if (!(m > 0.0)) {
    fail_domain("optimize_plan: the two amplitudes must differ (mean photon number of the pair "
                "is zero)");
  }
  const int n = n_channels;
  const bool equal_split = homogeneous || n == 1;
  const int dim = equal_split ? n : 2 * n - 1;
  if (dim > 32) {
    throw std::invalid_argument("optimize_plan: " + std::to_string(dim) +
                                " free parameters exceed the simplex cap of 32; reduce "
                                "n_channels");
  }

  // Overshoots live in log(1 + beta) space (clamped at zero); the energy
  // split, when free, is a softmax over n weights with the last one pinned.
  const auto decode = [&](std::span<const double> u) {
    ChannelPlan plan;
    plan.n_channels = n;
    plan.detector = det;
    plan.beta_schedule.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      plan.beta_schedule[static_cast<std::size_t>(k)] =
          std::max(0.0, std::expm1(u[static_cast<std::size_t>(k)]));
    }
    if (equal_split) {
      plan.energy_fractions.assign(static_cast<std::size_t>(n), 1.0 / n);
    } else {
      plan.energy_fractions.resize(static_cast<std::size_t>(n));
      double top = 0.0;
      for (int k = 0; k < n - 1; ++k) {
        top = std::max(top, u[static_cast<std::size_t>(n + k)]);
      }
      double total = 0.0;
      for (int k = 0; k < n; ++k) {
        const double logit = k < n - 1 ? u[static_cast<std::size_t>(n + k)] : 0.0;
        const double w = std::exp(logit - top);
        plan.energy_fractions[static_cast<std::size_t>(k)] = w;
        total += w;
      }
      for (double& f : plan.energy_fractions) f /= total;
    }
    return plan;
  };

  std::vector<double> u0(static_cast<std::size_t>(dim), 0.0);
  if (n == 1) {
    const Strategy strategy =
        det.kind == DetectorKind::on_off ? Strategy::on_off : Strategy::pnr;
    u0[0] = std::log1p(optimize_beta(e, strategy).beta);
  } else {
    const double scale = std::sqrt(1.0 / n);
    for (int k = 0; k < n; ++k) {
      u0[static_cast<std::size_t>(k)] =
          std::log1p(beta_schedule_asymptotic(m, (k + 0.5) / n) * scale);
    }
  }

  constexpr double kTol = 1e-9;
  const int max_iter = 600 * dim;
  const SimplexResult refined = simplex_minimize(
      [&](std::span<const double> u) { return objective(decode(u)); },
      std::span<const double>(u0.data(), u0.size()), kTol, max_iter);

  PlanOptimum optimum;
  optimum.plan = decode(std::span<const double>(refined.x.data(), refined.x.size()));
  optimum.error_rate = refined.f;
  optimum.converged = refined.converged;
  return optimum;
}

PlanOptimum optimize_plan(int n_channels, const BinaryEnsemble& e, const DetectorModel& det,
                          bool homogeneous) {
  return optimize_plan_with(n_channels, e, det, homogeneous,
                            [&](const ChannelPlan& plan) { return exact_error(plan, e).error_rate; });
}

}  // namespace ffrx
