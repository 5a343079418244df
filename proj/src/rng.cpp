#include "ffrx/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "ffrx/core.hpp"

namespace ffrx {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output scrambler.
std::uint64_t mix(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

/// Transformed rejection sampler with squeeze for Poisson means of 10 and
/// above; two uniforms per attempt, acceptance probability near one.
int sample_poisson_large(double mean, CounterStream& stream) {
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = stream.next_uniform() - 0.5;
    const double v = stream.next_uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<int>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mean - mean - std::lgamma(k + 1.0)) {
      return static_cast<int>(k);
    }
  }
}

}  // namespace

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t trial, std::uint32_t slot) noexcept {
  std::uint64_t key = mix(seed + kGolden);
  key = mix(key ^ (trial + kGolden));
  key = mix(key ^ (static_cast<std::uint64_t>(slot) + kGolden));
  state_ = key;
}

std::uint64_t CounterStream::next_u64() noexcept {
  state_ += kGolden;
  return mix(state_);
}

double CounterStream::next_uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

int sample_poisson(double mean, CounterStream& stream) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::domain_error("sample_poisson: mean must be finite and nonnegative");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Sequential CDF inversion; the cap guards against u landing in the
    // truncated tail of mass below 1e-12.
    const double u = stream.next_uniform();
    const int cap = poisson_truncation(mean);
    double pmf = std::exp(-mean);
    double cdf = pmf;
    int n = 0;
    while (u > cdf && n < cap) {
      ++n;
      pmf *= mean / n;
      cdf += pmf;
    }
    return n;
  }
  return sample_poisson_large(mean, stream);
}

}  // namespace ffrx
