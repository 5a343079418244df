#pragma once

#include <stdexcept>

namespace ffrx {

/// Which of the two candidate signal states a decision or prior refers to.
enum class Hypothesis { alpha1 = 0, alpha2 = 1 };

/// Signed real coherent-state amplitude in sqrt-photon units; the mean photon
/// number carried by amplitude a is a^2.
class Amplitude {
public:
  static constexpr double kMaxMagnitude = 1.0e3;

  constexpr Amplitude() = default;
  explicit Amplitude(double value);

  [[nodiscard]] constexpr double value() const noexcept { return value_; }
  [[nodiscard]] constexpr double mean_photons() const noexcept { return value_ * value_; }

private:
  double value_ = 0.0;
};

/// Two candidate coherent states with prior probabilities (p2 = 1 - p1).
class BinaryEnsemble {
public:
  BinaryEnsemble(Amplitude alpha1, Amplitude alpha2, double p1);

  /// Antipodal ensemble {|+alpha>, |-alpha>} used for binary phase keying.
  [[nodiscard]] static BinaryEnsemble bpsk(double alpha, double p1);

  [[nodiscard]] Amplitude alpha1() const noexcept { return alpha1_; }
  [[nodiscard]] Amplitude alpha2() const noexcept { return alpha2_; }
  [[nodiscard]] double p1() const noexcept { return p1_; }
  [[nodiscard]] double p2() const noexcept { return 1.0 - p1_; }
  /// Mean photon number of the symmetrized pair, (|alpha1 - alpha2| / 2)^2.
  [[nodiscard]] double mean_photons() const noexcept;

private:
  Amplitude alpha1_;
  Amplitude alpha2_;
  double p1_ = 0.5;
};

enum class DetectorKind { on_off, photon_number };

/// Photon counter description: on-off vs number-resolving readout, plus a
/// simple imperfection model (sub-unit quantum efficiency, mean dark counts).
struct DetectorModel {
  DetectorKind kind = DetectorKind::photon_number;
  double efficiency = 1.0;  ///< quantum efficiency, in (0, 1]
  double dark_mean = 0.0;   ///< mean dark counts per measurement window
  int n_max = 0;            ///< count cutoff override; 0 selects the automatic rule

  [[nodiscard]] static DetectorModel ideal_on_off() noexcept;
  [[nodiscard]] static DetectorModel ideal_pnr() noexcept;

  /// Effective Poisson mean registered for incident displaced amplitude mu.
  [[nodiscard]] double mean_count(double mu) const noexcept {
    return efficiency * mu * mu + dark_mean;
  }
  /// Count cutoff to use for outcome sums at the given Poisson mean.
  [[nodiscard]] int truncation_for(double mean) const;
  /// Throws std::domain_error if any field is outside its admissible range.
  void validate() const;
};

/// Smallest count cutoff keeping the truncated Poisson tail below 1e-12:
/// ceil(mean + 12 sqrt(mean) + 30).
[[nodiscard]] int poisson_truncation(double mean);

/// P(n | mean) = mean^n e^{-mean} / n!, evaluated via logs for stability.
[[nodiscard]] double poisson_pmf(int n, double mean);

/// log P(n | mean); -infinity where the pmf is exactly zero.
[[nodiscard]] double poisson_log_pmf(int n, double mean);

/// Squared state overlap |<a1|a2>|^2 = e^{-(a1 - a2)^2}.
[[nodiscard]] double overlap(Amplitude a1, Amplitude a2);

/// log of the squared overlap, -(a1 - a2)^2; usable when overlap underflows.
[[nodiscard]] double log_overlap(Amplitude a1, Amplitude a2);

/// Shifts both candidate amplitudes by delta; priors are unchanged.
[[nodiscard]] BinaryEnsemble displace(const BinaryEnsemble& e, Amplitude delta);

/// Minimum error probability achievable by any quantum measurement:
/// (1 - sqrt(1 - 4 p1 p2 s)) / 2 with s the squared overlap.
[[nodiscard]] double helstrom_bound(const BinaryEnsemble& e);

/// Error probability of exact nulling with on-off detection: p1 e^{-4m}.
[[nodiscard]] double kennedy_error(double m, double p1);

/// Error probability of balanced homodyne detection at equal priors:
/// erfc(sqrt(2 m)) / 2.
[[nodiscard]] double homodyne_error(double m);

}  // namespace ffrx
