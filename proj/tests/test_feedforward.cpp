#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ffrx/core.hpp"
#include "ffrx/feedforward.hpp"
#include "ffrx/single_channel.hpp"

using namespace ffrx;

namespace {

bool close_abs(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

/// All length-n on-off outcome vectors, counted in binary.
std::vector<int> bits_of(unsigned mask, int n) {
  std::vector<int> outcomes(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) outcomes[static_cast<std::size_t>(k)] = (mask >> k) & 1u;
  return outcomes;
}

}  // namespace

TEST_SUITE("feedforward") {
  TEST_CASE("beta_schedule_asymptotic reference values") {
    // Frozen from 30-digit evaluation of the closed form.
    CHECK(close_abs(beta_schedule_asymptotic(0.25, 1.0), 0.12888327749856062, 1e-15));
    CHECK(close_abs(beta_schedule_asymptotic(0.25, 0.5), 0.29710320576083469, 1e-15));
    CHECK(close_abs(beta_schedule_asymptotic(0.25, 0.01), 4.512505195307643, 1e-12));
  }

  TEST_CASE("beta_schedule_asymptotic diverges like half the inverse root at small kappa") {
    const double kappa = 1e-6;
    const double beta = beta_schedule_asymptotic(0.25, kappa);
    CHECK(std::fabs(beta * std::sqrt(kappa) - 0.5) < 0.005);
  }

  TEST_CASE("beta_schedule_asymptotic decays with consumed signal and validates input") {
    CHECK(beta_schedule_asymptotic(1.0, 1.0) < beta_schedule_asymptotic(1.0, 0.5));
    CHECK(beta_schedule_asymptotic(1.0, 0.5) < beta_schedule_asymptotic(1.0, 0.1));
    CHECK_THROWS_AS((void)beta_schedule_asymptotic(0.0, 0.5), std::domain_error);
    CHECK_THROWS_AS((void)beta_schedule_asymptotic(-1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS((void)beta_schedule_asymptotic(0.25, 0.0), std::domain_error);
    CHECK_THROWS_AS((void)beta_schedule_asymptotic(0.25, 1.5), std::domain_error);
  }

  TEST_CASE("ChannelPlan factories wire the schedule into channel units") {
    const DetectorModel det = DetectorModel::ideal_on_off();
    const ChannelPlan single = ChannelPlan::asymptotic(1, 0.25, det);
    CHECK(close_abs(single.beta_schedule[0], 0.29710320576083469, 1e-15));

    const int n = 4;
    const ChannelPlan plan = ChannelPlan::asymptotic(n, 0.25, det);
    CHECK(plan.n_channels == n);
    for (int k = 0; k < n; ++k) {
      CHECK(plan.energy_fractions[k] == 0.25);
      const double expected =
          beta_schedule_asymptotic(0.25, (k + 0.5) / n) * std::sqrt(1.0 / n);
      CHECK(plan.beta_schedule[k] == expected);
    }
    // Later channels take smaller overshoots.
    CHECK(plan.beta_schedule[0] > plan.beta_schedule[1]);
    CHECK(plan.beta_schedule[2] > plan.beta_schedule[3]);
  }

  TEST_CASE("ChannelPlan::validate rejects inconsistent plans") {
    const DetectorModel det = DetectorModel::ideal_on_off();
    ChannelPlan plan = ChannelPlan::homogeneous(2, {0.1, 0.2}, det);
    CHECK_NOTHROW(plan.validate());

    plan.energy_fractions = {0.5, 0.4};
    CHECK_THROWS_AS(plan.validate(), std::domain_error);
    plan.energy_fractions = {0.5, 0.5, 0.0};
    CHECK_THROWS_AS(plan.validate(), std::domain_error);
    plan.energy_fractions = {0.5, 0.5};
    plan.beta_schedule = {0.1, -0.2};
    CHECK_THROWS_AS(plan.validate(), std::domain_error);
    plan.beta_schedule = {0.1};
    CHECK_THROWS_AS(plan.validate(), std::domain_error);
    plan.n_channels = 0;
    CHECK_THROWS_AS(plan.validate(), std::domain_error);
  }

  TEST_CASE("bayes_update reference value and degenerate priors") {
    const DetectorModel det = DetectorModel::ideal_pnr();
    CHECK(close_abs(bayes_update(0.5, 0, Amplitude(1.1), Amplitude(0.1), det),
                    0.23147521650098236, 1e-15));
    CHECK(bayes_update(0.0, 3, Amplitude(1.1), Amplitude(0.1), det) == 0.0);
    CHECK(bayes_update(1.0, 3, Amplitude(1.1), Amplitude(0.1), det) == 1.0);
    // Equal means carry no evidence.
    CHECK(bayes_update(0.3, 2, Amplitude(0.7), Amplitude(-0.7), det) == doctest::Approx(0.3).epsilon(1e-12));
  }

  TEST_CASE("bayes_update on-off readout collapses all positive counts") {
    const DetectorModel det = DetectorModel::ideal_on_off();
    const double one = bayes_update(0.4, 1, Amplitude(1.1), Amplitude(0.1), det);
    const double five = bayes_update(0.4, 5, Amplitude(1.1), Amplitude(0.1), det);
    CHECK(one == five);
    // A count from a dead channel pins the posterior on the live hypothesis.
    CHECK(bayes_update(0.4, 1, Amplitude(1.0), Amplitude(0.0), det) == 1.0);
  }

  TEST_CASE("bayes_update rejects invalid input and impossible outcomes") {
    const DetectorModel det = DetectorModel::ideal_pnr();
    CHECK_THROWS_AS((void)bayes_update(1.2, 0, Amplitude(1.0), Amplitude(0.1), det),
                    std::domain_error);
    CHECK_THROWS_AS((void)bayes_update(0.5, -1, Amplitude(1.0), Amplitude(0.1), det),
                    std::domain_error);
    // Both hypotheses dead for a positive count: no posterior exists.
    CHECK_THROWS_AS((void)bayes_update(0.5, 1, Amplitude(0.0), Amplitude(0.0), det),
                    std::domain_error);
  }

  TEST_CASE("run_chain reproduces the textbook four-channel traces") {
    const ChannelPlan plan = ChannelPlan::asymptotic(4, 0.25, DetectorModel::ideal_on_off());
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);

    const std::vector<int> quiet{0, 0, 0, 0};
    const ChainResult no_clicks = run_chain(plan, e, quiet);
    CHECK(no_clicks.decision == Hypothesis::alpha2);

    const std::vector<int> first_click{1, 0, 0, 0};
    const ChainResult one_click = run_chain(plan, e, first_click);
    CHECK(one_click.decision == Hypothesis::alpha1);
  }

  TEST_CASE("run_chain trace grows one state per channel") {
    const ChannelPlan plan = ChannelPlan::asymptotic(3, 0.25, DetectorModel::ideal_on_off());
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.4);
    const std::vector<int> outcomes{1, 0, 1};
    const ChainResult result = run_chain(plan, e, outcomes);
    REQUIRE(result.trace.size() == 4);
    CHECK(result.trace[0].posterior_p1 == 0.4);
    CHECK(result.trace[0].channel_index == 0);
    CHECK(result.trace[0].outcome_trace.empty());
    for (int k = 1; k <= 3; ++k) {
      const FeedForwardState& state = result.trace[static_cast<std::size_t>(k)];
      CHECK(state.channel_index == k);
      CHECK(state.outcome_trace.size() == static_cast<std::size_t>(k));
      CHECK(state.posterior_p1 >= 0.0);
      CHECK(state.posterior_p1 <= 1.0);
    }
    CHECK(result.trace[3].on_count == 2);
  }

  TEST_CASE("run_chain validates the outcome record") {
    const ChannelPlan plan = ChannelPlan::asymptotic(3, 0.25, DetectorModel::ideal_on_off());
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    CHECK_THROWS_AS((void)run_chain(plan, e, std::vector<int>{0, 1}), std::invalid_argument);
    CHECK_THROWS_AS((void)run_chain(plan, e, std::vector<int>{0, -1, 0}), std::invalid_argument);
  }

  TEST_CASE("posteriors of the two hypothesis labelings stay complementary") {
    const ChannelPlan plan = ChannelPlan::asymptotic(5, 0.25, DetectorModel::ideal_on_off());
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.37);
    const BinaryEnsemble mirrored(e.alpha2(), e.alpha1(), e.p2());
    for (const std::vector<int>& outcomes :
         {std::vector<int>{0, 1, 0, 0, 1}, std::vector<int>{1, 1, 0, 1, 0},
          std::vector<int>{0, 0, 0, 0, 0}}) {
      const ChainResult direct = run_chain(plan, e, outcomes);
      const ChainResult swapped = run_chain(plan, mirrored, outcomes);
      for (std::size_t i = 0; i < direct.trace.size(); ++i) {
        CHECK(close_abs(direct.trace[i].posterior_p1 + swapped.trace[i].posterior_p1, 1.0,
                        1e-12));
      }
    }
  }

  TEST_CASE("chain reduction: one photon-number channel follows the threshold rule") {
    for (double p1 : {0.5, 0.35}) {
      const DetectorModel det = DetectorModel::ideal_pnr();
      const ChannelPlan plan = ChannelPlan::homogeneous(1, {0.3}, det);
      const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, p1);
      const DisplacedPair d = build_displaced(e, 0.3);
      const ThresholdRule rule = discrimination_threshold(d);
      const Hypothesis low = rule.assign_high == Hypothesis::alpha1 ? Hypothesis::alpha2
                                                                    : Hypothesis::alpha1;
      for (int n = 0; n <= 12; ++n) {
        const ChainResult result = run_chain(plan, e, std::vector<int>{n});
        CHECK(result.decision == (n >= rule.n_star ? rule.assign_high : low));
      }
    }
  }

  TEST_CASE("parity_decision maps odd counts to hypothesis 1") {
    CHECK(parity_decision(0) == Hypothesis::alpha2);
    CHECK(parity_decision(1) == Hypothesis::alpha1);
    CHECK(parity_decision(2) == Hypothesis::alpha2);
    CHECK(parity_decision(7) == Hypothesis::alpha1);
    CHECK_THROWS_AS((void)parity_decision(-1), std::domain_error);
  }

  TEST_CASE("posterior decisions equal click parity for symmetric nulling chains") {
    // Exhaustively over every outcome record: with equal priors and ideal
    // on-off detection, the posterior decision is exactly the parity of the
    // number of channels that clicked.
    for (double m : {0.1, 0.25, 1.0}) {
      for (int n = 1; n <= 12; ++n) {
        const ChannelPlan plan = ChannelPlan::asymptotic(n, m, DetectorModel::ideal_on_off());
        const BinaryEnsemble e = BinaryEnsemble::bpsk(std::sqrt(m), 0.5);
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
          const std::vector<int> outcomes = bits_of(mask, n);
          const ChainResult result = run_chain(plan, e, outcomes);
          int clicks = 0;
          for (int bit : outcomes) clicks += bit;
          CHECK(result.decision == parity_decision(clicks));
        }
      }
    }
  }

  TEST_CASE("exact_error reduces to the closed form on one channel") {
    std::mt19937 gen(131);
    std::uniform_real_distribution<double> amp(0.3, 1.2);
    std::uniform_real_distribution<double> overshoot(0.0, 0.5);
    std::uniform_real_distribution<double> prior(0.4, 0.5);
    const DetectorModel det = DetectorModel::ideal_on_off();
    for (int i = 0; i < 100; ++i) {
      const double alpha = amp(gen);
      const double beta = overshoot(gen);
      const double p1 = prior(gen);
      const ChannelPlan plan = ChannelPlan::homogeneous(1, {beta}, det);
      const BinaryEnsemble e = BinaryEnsemble::bpsk(alpha, p1);
      const ExactResult exact = exact_error(plan, e);
      CHECK(close_abs(exact.error_rate, error_onoff(Amplitude(alpha), beta, p1), 1e-13));
      CHECK(close_abs(exact.branch_mass1, 1.0, 1e-12));
      CHECK(close_abs(exact.branch_mass2, 1.0, 1e-12));
    }
  }

  TEST_CASE("exact_error at zero overshoot is the nulling baseline") {
    const ChannelPlan plan = ChannelPlan::homogeneous(1, {0.0}, DetectorModel::ideal_on_off());
    const ExactResult exact = exact_error(plan, BinaryEnsemble::bpsk(0.5, 0.5));
    CHECK(close_abs(exact.error_rate, 0.18393972058572116, 1e-13));
  }

  TEST_CASE("exact_error regression curve for the asymptotic schedule") {
    // Frozen from an independent enumeration implementation.
    const struct {
      int n;
      double error;
    } expected[] = {
        {1, 0.1351997917}, {2, 0.1226223620},  {3, 0.1174605259},
        {4, 0.1145676181}, {8, 0.1095926646},  {12, 0.1076546424},
    };
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    for (const auto& row : expected) {
      const ChannelPlan plan = ChannelPlan::asymptotic(row.n, 0.25, DetectorModel::ideal_on_off());
      const ExactResult exact = exact_error(plan, e);
      CHECK(close_abs(exact.error_rate, row.error, 1e-9));
      CHECK(exact.tail_deficit() < 1e-10);
    }
    // The eight-channel receiver already sits between the quantum limit and
    // the best single-channel receiver.
    const ExactResult eight =
        exact_error(ChannelPlan::asymptotic(8, 0.25, DetectorModel::ideal_on_off()), e);
    CHECK(eight.error_rate > helstrom_bound(e));
    CHECK(eight.error_rate < 0.1348);
  }

  TEST_CASE("exact_error conserves branch mass") {
    std::mt19937 gen(149);
    std::uniform_real_distribution<double> overshoot(0.0, 1.0);
    std::uniform_real_distribution<double> prior(0.2, 0.8);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 1 + trial % 6;
      std::vector<double> betas(static_cast<std::size_t>(n));
      for (double& b : betas) b = overshoot(gen);
      const ChannelPlan plan = ChannelPlan::homogeneous(n, betas, DetectorModel::ideal_on_off());
      const ExactResult exact = exact_error(plan, BinaryEnsemble::bpsk(0.5, prior(gen)));
      CHECK(close_abs(exact.branch_mass1, 1.0, 1e-10));
      CHECK(close_abs(exact.branch_mass2, 1.0, 1e-10));
    }
  }

  TEST_CASE("exact_error with photon counting never loses to on-off at the same plan") {
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    const ChannelPlan onoff = ChannelPlan::asymptotic(2, 0.25, DetectorModel::ideal_on_off());
    const ChannelPlan pnr = ChannelPlan::asymptotic(2, 0.25, DetectorModel::ideal_pnr());
    const double coarse = exact_error(onoff, e).error_rate;
    const double fine = exact_error(pnr, e).error_rate;
    CHECK(fine <= coarse + 1e-12);
    CHECK(exact_error(pnr, e).tail_deficit() < 1e-10);
  }

  TEST_CASE("exact_error degrades under detector imperfections") {
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    DetectorModel det = DetectorModel::ideal_on_off();
    const ChannelPlan ideal = ChannelPlan::asymptotic(3, 0.25, det);
    det.efficiency = 0.6;
    const ChannelPlan lossy = ChannelPlan::asymptotic(3, 0.25, det);
    det.efficiency = 1.0;
    det.dark_mean = 0.2;
    const ChannelPlan noisy = ChannelPlan::asymptotic(3, 0.25, det);
    const double base = exact_error(ideal, e).error_rate;
    CHECK(exact_error(lossy, e).error_rate > base);
    CHECK(exact_error(noisy, e).error_rate > base);
  }

  TEST_CASE("exact_error enforces its branch budgets") {
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    std::vector<double> betas(25, 0.1);
    const ChannelPlan wide = ChannelPlan::homogeneous(25, betas, DetectorModel::ideal_on_off());
    CHECK_THROWS_AS((void)exact_error(wide, e), BranchBudgetError);

    const ChannelPlan deep = ChannelPlan::asymptotic(8, 1.0, DetectorModel::ideal_pnr());
    CHECK_THROWS_AS((void)exact_error(deep, BinaryEnsemble::bpsk(1.0, 0.5)), BranchBudgetError);
    // The message must steer toward the simulator.
    try {
      (void)exact_error(deep, BinaryEnsemble::bpsk(1.0, 0.5));
      FAIL("expected a budget error");
    } catch (const BranchBudgetError& err) {
      CHECK(std::string(err.what()).find("Monte Carlo") != std::string::npos);
    }
  }

  TEST_CASE("optimize_plan on one channel matches the scalar optimizer") {
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    const PlanOptimum plan_opt =
        optimize_plan(1, e, DetectorModel::ideal_on_off(), true);
    const BetaOptimum beta_opt = optimize_beta(e, Strategy::on_off);
    CHECK(std::fabs(plan_opt.error_rate - beta_opt.error_rate) <= 1e-6);
    CHECK(std::fabs(plan_opt.plan.beta_schedule[0] - beta_opt.beta) <= 1e-3);

    const PlanOptimum pnr_opt = optimize_plan(1, e, DetectorModel::ideal_pnr(), true);
    const BetaOptimum pnr_beta = optimize_beta(e, Strategy::pnr);
    CHECK(std::fabs(pnr_opt.error_rate - pnr_beta.error_rate) <= 1e-6);
  }

  TEST_CASE("optimize_plan regression values for equal-split on-off plans") {
    // Frozen from an independent simplex implementation on the enumerated
    // objective.
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    const DetectorModel det = DetectorModel::ideal_on_off();
    const struct {
      int n;
      double error;
    } expected[] = {
        {2, 0.122435982131},
        {3, 0.117355498813},
        {4, 0.114500068710},
    };
    for (const auto& row : expected) {
      const PlanOptimum best = optimize_plan(row.n, e, det, true);
      CHECK(close_abs(best.error_rate, row.error, 1e-6));
      CHECK(best.converged);
      // Optimized overshoots decrease along the chain, like the schedule.
      for (int k = 0; k + 1 < row.n; ++k) {
        CHECK(best.plan.beta_schedule[static_cast<std::size_t>(k)] >
              best.plan.beta_schedule[static_cast<std::size_t>(k) + 1]);
      }
    }
  }

  TEST_CASE("optimize_plan improves monotonically with channel count") {
    const DetectorModel det = DetectorModel::ideal_on_off();
    for (double m : {0.1, 0.25, 0.5, 1.0}) {
      const BinaryEnsemble e = BinaryEnsemble::bpsk(std::sqrt(m), 0.5);
      const double quantum = helstrom_bound(e);
      double previous = 1.0;
      for (int n : {1, 2, 3, 4, 8}) {
        const PlanOptimum best = optimize_plan(n, e, det, true);
        CHECK(best.error_rate < previous);
        CHECK(best.error_rate >= quantum - 1e-10);
        previous = best.error_rate;
      }
    }
  }

  TEST_CASE("freeing the energy split can only help") {
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    const DetectorModel det = DetectorModel::ideal_on_off();
    const PlanOptimum equal = optimize_plan(2, e, det, true);
    const PlanOptimum free_split = optimize_plan(2, e, det, false);
    CHECK(free_split.error_rate <= equal.error_rate + 1e-9);
    // At two channels the gain is real: the first channel takes less energy.
    CHECK(close_abs(free_split.error_rate, 0.120470979341, 1e-5));
    CHECK(free_split.plan.energy_fractions[0] < 0.5);
  }

  TEST_CASE("optimize_plan with photon counting matches on-off at the optimum") {
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    const PlanOptimum coarse = optimize_plan(2, e, DetectorModel::ideal_on_off(), true);
    const PlanOptimum fine = optimize_plan(2, e, DetectorModel::ideal_pnr(), true);
    CHECK(fine.error_rate <= coarse.error_rate + 1e-6);
  }

  TEST_CASE("optimize_plan validates channel count and dimensionality") {
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    const DetectorModel det = DetectorModel::ideal_on_off();
    CHECK_THROWS_AS((void)optimize_plan(0, e, det, true), std::invalid_argument);
    // 17 free-split channels need 33 parameters: one past the simplex cap.
    CHECK_THROWS_AS((void)optimize_plan(17, e, det, false), std::invalid_argument);
    CHECK_THROWS_AS((void)optimize_plan(2, BinaryEnsemble::bpsk(0.0, 0.5), det, true),
                    std::domain_error);
  }
}
