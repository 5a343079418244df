#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ffrx/core.hpp"
#include "ffrx/feedforward.hpp"
#include "ffrx/optimizer.hpp"
#include "ffrx/single_channel.hpp"

using namespace ffrx;

TEST_SUITE("optimizer") {
  TEST_CASE("first_local_min_scan brackets an interior minimum") {
    const auto f = [](double x) { return (x - 2.0) * (x - 2.0); };
    const Bracket b = first_local_min_scan(f, 0.0, 5.0, 501);
    CHECK_FALSE(b.boundary);
    CHECK(b.lo < 2.0);
    CHECK(b.hi > 2.0);
    CHECK(b.lo < b.mid);
    CHECK(b.mid < b.hi);
    CHECK(f(b.mid) < f(b.lo));
    CHECK(f(b.mid) < f(b.hi));
  }

  TEST_CASE("first_local_min_scan flags monotone edges") {
    const Bracket rising = first_local_min_scan([](double x) { return x; }, 0.0, 1.0, 100);
    CHECK(rising.boundary);
    CHECK(rising.mid == 0.0);

    const Bracket falling = first_local_min_scan([](double x) { return -x; }, 0.0, 1.0, 100);
    CHECK(falling.boundary);
    CHECK(falling.mid == 1.0);
  }

  TEST_CASE("first_local_min_scan picks the first of several minima") {
    // Two valleys at x = 1 and x = 4; the deeper one sits second.
    const auto f = [](double x) {
      return std::min((x - 1.0) * (x - 1.0), 2.0 * (x - 4.0) * (x - 4.0) - 0.5);
    };
    const Bracket b = first_local_min_scan(f, 0.0, 5.0, 1001);
    CHECK_FALSE(b.boundary);
    CHECK(b.mid > 0.8);
    CHECK(b.mid < 1.2);
  }

  TEST_CASE("first_local_min_scan validates its arguments") {
    const auto f = [](double x) { return x; };
    CHECK_THROWS_AS((void)first_local_min_scan(f, 1.0, 0.0, 100), std::invalid_argument);
    CHECK_THROWS_AS((void)first_local_min_scan(f, 0.0, 1.0, 2), std::invalid_argument);
  }

  TEST_CASE("golden_section refines a quadratic to tolerance with bounded work") {
    int calls = 0;
    const auto f = [&calls](double x) {
      ++calls;
      return (x - 2.0) * (x - 2.0);
    };
    const Bracket b{0.0, 1.0, 5.0, false};
    const ScalarMinimum best = golden_section(f, b, 1e-8);
    CHECK(std::fabs(best.x - 2.0) <= 1e-8);
    CHECK(best.f == doctest::Approx(0.0).epsilon(1e-12));
    // Each step shrinks the interval by the golden ratio with one new call.
    const int budget = static_cast<int>(std::ceil(std::log(5.0 / 1e-8) / std::log(1.618))) + 2;
    CHECK(best.evaluations <= budget);
    CHECK(best.evaluations == calls);
  }

  TEST_CASE("golden_section handles a kinked objective and stays inside the bracket") {
    double lowest = 1e300;
    double highest = -1e300;
    const auto f = [&](double x) {
      lowest = std::min(lowest, x);
      highest = std::max(highest, x);
      return std::fabs(x + 0.3);
    };
    const Bracket b{-1.0, -0.2, 1.0, false};
    const ScalarMinimum best = golden_section(f, b, 1e-8);
    CHECK(std::fabs(best.x + 0.3) <= 1e-8);
    CHECK(lowest >= -1.0);
    CHECK(highest <= 1.0);
  }

  TEST_CASE("golden_section rejects invalid brackets") {
    const auto f = [](double x) { return x * x; };
    CHECK_THROWS_AS((void)golden_section(f, Bracket{0.0, 0.0, 1.0, true}, 1e-8),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)golden_section(f, Bracket{0.0, 2.0, 1.0, false}, 1e-8),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)golden_section(f, Bracket{0.0, 0.5, 1.0, false}, -1.0),
                    std::invalid_argument);
  }

  TEST_CASE("scan plus golden refinement finds a stationary point of the receiver error") {
    for (double m : {0.1, 0.25, 1.0}) {
      const double alpha = std::sqrt(m);
      const auto f = [&](double beta) { return error_onoff(Amplitude(alpha), beta, 0.5); };
      const Bracket b = first_local_min_scan(f, 0.0, 3.0, 2000);
      REQUIRE_FALSE(b.boundary);
      const ScalarMinimum best = golden_section(f, b, 1e-10);
      const double h = 1e-5;
      const double derivative = (f(best.x + h) - f(best.x - h)) / (2.0 * h);
      CHECK(std::fabs(derivative) < 1e-6);
    }
  }

  TEST_CASE("simplex_minimize solves a shifted sphere") {
    const auto f = [](std::span<const double> x) {
      double total = 0.0;
      for (double v : x) total += (v - 1.0) * (v - 1.0);
      return total;
    };
    const std::vector<double> x0(4, 0.0);
    const SimplexResult best = simplex_minimize(f, x0, 1e-10, 4000);
    CHECK(best.converged);
    for (double v : best.x) CHECK(std::fabs(v - 1.0) < 1e-5);
    CHECK(best.f < 1e-9);
  }

  TEST_CASE("simplex_minimize solves the banana valley") {
    const auto f = [](std::span<const double> x) {
      const double a = 1.0 - x[0];
      const double b = x[1] - x[0] * x[0];
      return a * a + 100.0 * b * b;
    };
    const std::vector<double> x0{-1.2, 1.0};
    const SimplexResult best = simplex_minimize(f, x0, 1e-12, 5000);
    CHECK(std::fabs(best.x[0] - 1.0) <= 1e-4);
    CHECK(std::fabs(best.x[1] - 1.0) <= 1e-4);
  }

  TEST_CASE("simplex_minimize never returns worse than the start point") {
    std::mt19937 gen(101);
    std::uniform_real_distribution<double> coeff(0.5, 3.0);
    std::uniform_real_distribution<double> shift(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      const int dim = 1 + trial % 6;
      std::vector<double> scale(dim);
      std::vector<double> center(dim);
      for (int i = 0; i < dim; ++i) {
        scale[i] = coeff(gen);
        center[i] = shift(gen);
      }
      const auto f = [&](std::span<const double> x) {
        double total = std::cos(7.0 * x[0]);  // mild nonconvexity
        for (int i = 0; i < dim; ++i) {
          total += scale[i] * (x[i] - center[i]) * (x[i] - center[i]);
        }
        return total;
      };
      std::vector<double> x0(dim);
      for (int i = 0; i < dim; ++i) x0[i] = shift(gen);
      const double f0 = f(x0);
      const SimplexResult best = simplex_minimize(f, x0, 1e-9, 500);
      CHECK(best.f <= f0);
    }
  }

  TEST_CASE("simplex_minimize validates dimension, tolerance, and start value") {
    const auto f = [](std::span<const double> x) { return x[0] * x[0]; };
    CHECK_THROWS_AS((void)simplex_minimize(f, std::vector<double>{}, 1e-9, 100),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)simplex_minimize(f, std::vector<double>(33, 0.0), 1e-9, 100),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)simplex_minimize(f, std::vector<double>{1.0}, 0.0, 100),
                    std::invalid_argument);
    const auto bad = [](std::span<const double>) { return std::nan(""); };
    CHECK_THROWS_AS((void)simplex_minimize(bad, std::vector<double>{1.0}, 1e-9, 100),
                    std::domain_error);
  }

  TEST_CASE("joint two-channel refinement beats the replicated single-channel optimum") {
    // Start the 2-channel exact objective from the single-channel optimum
    // replicated across both channels; the joint optimum must strictly
    // improve on the best single-channel error at the same total energy.
    const BinaryEnsemble e = BinaryEnsemble::bpsk(0.5, 0.5);
    const BetaOptimum single = optimize_beta(e, Strategy::on_off);
    const DetectorModel det = DetectorModel::ideal_on_off();
    const auto objective = [&](std::span<const double> u) {
      std::vector<double> betas{std::max(0.0, u[0]), std::max(0.0, u[1])};
      const ChannelPlan plan = ChannelPlan::homogeneous(2, betas, det);
      return exact_error(plan, e).error_rate;
    };
    // Replicate in channel units: each channel holds half the energy.
    const double seed_beta = single.beta / std::sqrt(2.0);
    const std::vector<double> x0{seed_beta, seed_beta};
    const SimplexResult best = simplex_minimize(objective, x0, 1e-10, 2000);
    CHECK(best.f < single.error_rate);
    CHECK(best.f < 0.1348);
    CHECK(best.f > helstrom_bound(e));
  }
}
