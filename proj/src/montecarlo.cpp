#include "ffrx/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ffrx {

namespace {

constexpr std::uint32_t kTruthSlot = 0;  // channel k draws from slot k + 1

std::uint64_t run_block(const ChannelPlan& plan, const BinaryEnsemble& e, std::uint64_t seed,
                        std::uint64_t begin, std::uint64_t end) {
  std::uint64_t errors = 0;
  for (std::uint64_t trial = begin; trial < end; ++trial) {
    CounterStream truth_stream(seed, trial, kTruthSlot);
    const Hypothesis truth =
        truth_stream.next_uniform() < e.p1() ? Hypothesis::alpha1 : Hypothesis::alpha2;
    ChainWalker walker(plan, e);
    for (int k = 0; k < plan.n_channels; ++k) {
      const DisplacedPair d = walker.displaced(k);
      const Amplitude mu = truth == Hypothesis::alpha1 ? d.mu1 : d.mu2;
      CounterStream channel_stream(seed, trial, static_cast<std::uint32_t>(k) + 1);
      walker.absorb(k, sample_outcome(mu, plan.detector, channel_stream));
    }
    errors += walker.decide() != truth ? 1 : 0;
  }
  return errors;
}

}  // namespace

int sample_outcome(Amplitude mu, const DetectorModel& det, CounterStream& stream) {
  det.validate();
  const int count = sample_poisson(det.mean_count(mu.value()), stream);
  return det.kind == DetectorKind::on_off ? std::min(count, 1) : count;
}

ErrorReport simulate(const ChannelPlan& plan, const BinaryEnsemble& e, const SimConfig& cfg) {
  plan.validate();
  if (cfg.trials < 1) throw std::domain_error("simulate: trials must be at least 1");
  if (cfg.shards < 1) {
    throw std::domain_error("simulate: shards must be at least 1, got " +
                            std::to_string(cfg.shards));
  }

  const std::uint64_t shard_count =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg.shards), cfg.trials);
  std::uint64_t errors = 0;
  if (shard_count == 1) {
    errors = run_block(plan, e, cfg.seed, 0, cfg.trials);
  } else {
    // Contiguous trial blocks per worker; integer counts sum identically in
    // any order, so shard count cannot change the result.
    std::vector<std::uint64_t> counts(shard_count, 0);
    std::vector<std::exception_ptr> failures(shard_count);
    std::vector<std::thread> workers;
    workers.reserve(shard_count);
    const std::uint64_t base = cfg.trials / shard_count;
    const std::uint64_t remainder = cfg.trials % shard_count;
    std::uint64_t begin = 0;
    for (std::uint64_t s = 0; s < shard_count; ++s) {
      const std::uint64_t end = begin + base + (s < remainder ? 1 : 0);
      workers.emplace_back([&, s, begin, end] {
        try {
          counts[s] = run_block(plan, e, cfg.seed, begin, end);
        } catch (...) {
          failures[s] = std::current_exception();
        }
      });
      begin = end;
    }
    for (std::thread& worker : workers) worker.join();
    for (const std::exception_ptr& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
    for (std::uint64_t count : counts) errors += count;
  }

  const double rate = static_cast<double>(errors) / static_cast<double>(cfg.trials);
  ErrorReport report;
  report.error_rate = rate;
  report.std_error = std::sqrt(rate * (1.0 - rate) / static_cast<double>(cfg.trials));
  report.trials = cfg.trials;
  report.method = Method::monte_carlo;
  report.seed = cfg.seed;
  return report;
}

}  // namespace ffrx
