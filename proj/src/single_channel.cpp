#include "ffrx/single_channel.hpp"

#include <algorithm>
#include <cmath>
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

}  // namespace

DisplacedPair build_displaced(const BinaryEnsemble& e, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("build_displaced: beta must be finite and nonnegative, got " +
                            std::to_string(beta));
  }
  const double a1 = e.alpha1().value();
  const double a2 = e.alpha2().value();
  // Null the more probable state and overshoot by beta toward the other;
  // ties null state 2. The overshoot points from the nulled state toward its
  // partner, so the surviving state lands at separation + beta.
  double mu1 = 0.0;
  double mu2 = 0.0;
  if (e.p1() <= e.p2()) {
    const double sign = a1 >= a2 ? 1.0 : -1.0;
    mu1 = (a1 - a2) + sign * beta;
    mu2 = sign * beta;
  } else {
    const double sign = a2 >= a1 ? 1.0 : -1.0;
    mu1 = sign * beta;
    mu2 = (a2 - a1) + sign * beta;
  }
  return DisplacedPair{Amplitude(mu1), Amplitude(mu2), e.p1(), beta};
}

double error_map_pnr(const DisplacedPair& d, const DetectorModel& det) {
  if (det.kind != DetectorKind::photon_number) {
    throw std::invalid_argument("error_map_pnr: requires a photon-number-resolving detector");
  }
  det.validate();
  if (!(d.p1 >= 0.0 && d.p1 <= 1.0)) {
    throw std::domain_error("error_map_pnr: p1 must lie in [0, 1], got " + std::to_string(d.p1));
  }
  const double mean1 = det.mean_count(d.mu1.value());
  const double mean2 = det.mean_count(d.mu2.value());
  const int cap = det.truncation_for(std::max(mean1, mean2));
  // 1 - sum_n max(p1 P1, p2 P2) equals sum_n min(p1 P1, p2 P2) up to the
  // truncated tail; the min form keeps relative accuracy when the error is
  // small.
  CompensatedSum sum;
  const double p2 = 1.0 - d.p1;
  for (int n = 0; n <= cap; ++n) {
    sum.add(std::min(d.p1 * poisson_pmf(n, mean1), p2 * poisson_pmf(n, mean2)));
  }
  return sum.total;
}

double error_onoff(Amplitude alpha, double beta, double p1) {
  if (!(alpha.value() >= 0.0)) {
    throw std::domain_error("error_onoff: alpha must be nonnegative, got " +
                            std::to_string(alpha.value()));
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("error_onoff: beta must be finite and nonnegative, got " +
                            std::to_string(beta));
  }
  if (!(p1 >= 0.0 && p1 <= 1.0)) {
    throw std::domain_error("error_onoff: p1 must lie in [0, 1], got " + std::to_string(p1));
  }
  const double far = 2.0 * alpha.value() + beta;
  // p2 (1 - e^{-beta^2}) written through expm1 to survive small beta.
  return p1 * std::exp(-far * far) - (1.0 - p1) * std::expm1(-beta * beta);
}

ThresholdRule discrimination_threshold(const DisplacedPair& d) {
  const double mean1 = d.mu1.mean_photons();
  const double mean2 = d.mu2.mean_photons();
  if (mean1 == mean2) {
    throw std::domain_error(
        "discrimination_threshold: displaced magnitudes coincide, no count separates the "
        "hypotheses");
  }
  const bool high_is_1 = mean1 > mean2;
  const Hypothesis assign_high = high_is_1 ? Hypothesis::alpha1 : Hypothesis::alpha2;
  const double p_high = high_is_1 ? d.p1 : 1.0 - d.p1;
  const double p_low = high_is_1 ? 1.0 - d.p1 : d.p1;
  if (p_high <= 0.0) {
    throw std::domain_error(
        "discrimination_threshold: the larger-mean hypothesis has zero prior; the posterior "
        "never favors it");
  }
  if (p_low <= 0.0) return ThresholdRule{0, assign_high};

  const double mean_high = std::max(mean1, mean2);
  const double mean_low = std::min(mean1, mean2);
  const double log_prior_gap = std::log(p_low) - std::log(p_high);
  const int cap = poisson_truncation(mean_high) + 1;
  for (int n = 0; n <= cap; ++n) {
    // The likelihood ratio grows with n, so the first crossing is the rule.
    if (poisson_log_pmf(n, mean_high) - poisson_log_pmf(n, mean_low) >= log_prior_gap) {
      return ThresholdRule{n, assign_high};
    }
  }
  throw std::domain_error(
      "discrimination_threshold: posterior crossing lies beyond the truncation cap; the priors "
      "are too extreme for these means");
}

double single_channel_error(const BinaryEnsemble& e, double beta, Strategy strategy) {
  if (strategy == Strategy::pnr) {
    return error_map_pnr(build_displaced(e, beta), DetectorModel::ideal_pnr());
  }
  const double alpha_eff = std::sqrt(e.mean_photons());
  return error_onoff(Amplitude(alpha_eff), beta, std::min(e.p1(), e.p2()));
}

BetaOptimum optimize_beta(const BinaryEnsemble& e, Strategy strategy) {
  const double m = e.mean_photons();
  if (!(m > 0.0)) {
    throw std::domain_error("optimize_beta: the two amplitudes must differ (mean photon number "
                            "of the pair is zero)");
  }
  const auto objective = [&](double beta) { return single_channel_error(e, beta, strategy); };

  const double hi = std::max(3.0, 4.0 * std::sqrt(m));
  constexpr int kGridPoints = 2000;
  constexpr double kTol = 1e-8;
  Bracket bracket = first_local_min_scan(objective, 0.0, hi, kGridPoints);
  if (bracket.boundary && bracket.mid == bracket.hi) {
    throw std::runtime_error(
        "optimize_beta: error still decreasing at the scan edge (bracket [" +
        std::to_string(bracket.lo) + ", " + std::to_string(bracket.hi) +
        "]); widen the scan range");
  }
  if (bracket.boundary) {
    // Nondecreasing on the coarse grid. The true minimizer is positive but may
    // sit below the first grid step; probe a geometric sub-grid toward zero.
    const double f0 = objective(0.0);
    const double first_step = hi / (kGridPoints - 1);
    double probe = 0.5 * first_step;
    double above = first_step;
    bool found = false;
    for (int halvings = 0; halvings < 60 && probe > 0.0; ++halvings) {
      if (objective(probe) < f0) {
        bracket = Bracket{0.0, probe, above, false};
        found = true;
        break;
      }
      above = probe;
      probe *= 0.5;
    }
    if (!found) return BetaOptimum{0.0, f0};  // flat to fp resolution: keep the edge
  }
  const ScalarMinimum minimum = golden_section(objective, bracket, kTol);
  return BetaOptimum{minimum.x, minimum.f};
}

}  // namespace ffrx
