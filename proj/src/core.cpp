#include "ffrx/core.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ffrx {

namespace {

[[noreturn]] void fail_domain(const std::string& message) { throw std::domain_error(message); }

}  // namespace

Amplitude::Amplitude(double value) : value_(value) {
  if (!std::isfinite(value)) fail_domain("Amplitude: value must be finite");
  if (std::fabs(value) > kMaxMagnitude) {
    fail_domain("Amplitude: magnitude " + std::to_string(value) + " exceeds the supported bound 1e3");
  }
}

BinaryEnsemble::BinaryEnsemble(Amplitude alpha1, Amplitude alpha2, double p1)
    : alpha1_(alpha1), alpha2_(alpha2), p1_(p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) {
    fail_domain("BinaryEnsemble: p1 must lie in [0, 1], got " + std::to_string(p1));
  }
}

BinaryEnsemble BinaryEnsemble::bpsk(double alpha, double p1) {
  return BinaryEnsemble(Amplitude(alpha), Amplitude(-alpha), p1);
}

double BinaryEnsemble::mean_photons() const noexcept {
  const double half_sep = 0.5 * (alpha1_.value() - alpha2_.value());
  return half_sep * half_sep;
}

DetectorModel DetectorModel::ideal_on_off() noexcept {
  return DetectorModel{DetectorKind::on_off, 1.0, 0.0, 0};
}

DetectorModel DetectorModel::ideal_pnr() noexcept {
  return DetectorModel{DetectorKind::photon_number, 1.0, 0.0, 0};
}

int DetectorModel::truncation_for(double mean) const {
  if (n_max > 0) return n_max;
  return poisson_truncation(mean);
}

void DetectorModel::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    fail_domain("DetectorModel: efficiency must lie in (0, 1], got " + std::to_string(efficiency));
  }
  if (!(dark_mean >= 0.0) || !std::isfinite(dark_mean)) {
    fail_domain("DetectorModel: dark_mean must be finite and nonnegative, got " +
                std::to_string(dark_mean));
  }
  if (n_max < 0) {
    fail_domain("DetectorModel: n_max must be nonnegative (0 selects the automatic cutoff)");
  }
}

int poisson_truncation(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    fail_domain("poisson_truncation: mean must be finite and nonnegative");
  }
  return static_cast<int>(std::ceil(mean + 12.0 * std::sqrt(mean) + 30.0));
}

double poisson_log_pmf(int n, double mean) {
  if (n < 0) fail_domain("poisson_log_pmf: n must be nonnegative, got " + std::to_string(n));
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    fail_domain("poisson_log_pmf: mean must be finite and nonnegative");
  }
  if (mean == 0.0) {
    return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  if (n == 0) return -mean;
  return static_cast<double>(n) * std::log(mean) - mean - std::lgamma(static_cast<double>(n) + 1.0);
}

double poisson_pmf(int n, double mean) { return std::exp(poisson_log_pmf(n, mean)); }

double log_overlap(Amplitude a1, Amplitude a2) {
  const double d = a1.value() - a2.value();
  return -d * d;
}

double overlap(Amplitude a1, Amplitude a2) { return std::exp(log_overlap(a1, a2)); }

BinaryEnsemble displace(const BinaryEnsemble& e, Amplitude delta) {
  return BinaryEnsemble(Amplitude(e.alpha1().value() + delta.value()),
                        Amplitude(e.alpha2().value() + delta.value()), e.p1());
}

double helstrom_bound(const BinaryEnsemble& e) {
  const double s = overlap(e.alpha1(), e.alpha2());
  const double radicand = 1.0 - 4.0 * e.p1() * e.p2() * s;
  return 0.5 * (1.0 - std::sqrt(std::max(0.0, radicand)));
}

double kennedy_error(double m, double p1) {
  if (!(m >= 0.0) || !std::isfinite(m)) {
    fail_domain("kennedy_error: m must be finite and nonnegative");
  }
  if (!(p1 >= 0.0 && p1 <= 1.0)) {
    fail_domain("kennedy_error: p1 must lie in [0, 1], got " + std::to_string(p1));
  }
  return p1 * std::exp(-4.0 * m);
}

double homodyne_error(double m) {
  if (!(m >= 0.0) || !std::isfinite(m)) {
    fail_domain("homodyne_error: m must be finite and nonnegative");
  }
  return 0.5 * std::erfc(std::sqrt(2.0 * m));
}

}  // namespace ffrx
