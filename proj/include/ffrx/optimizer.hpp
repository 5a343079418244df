#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ffrx {

/// Triple lo < mid < hi with f(mid) strictly below f(lo) and f(hi). When a
/// scan hits a monotone edge instead, `boundary` is set and mid coincides
/// with the cheaper endpoint.
struct Bracket {
  double lo = 0.0;
  double mid = 0.0;
  double hi = 0.0;
  bool boundary = false;
};

/// Scans a uniform grid upward from lo and brackets the first local minimum
/// encountered: the first strict descent followed by the end of its valley.
[[nodiscard]] Bracket first_local_min_scan(const std::function<double(double)>& f, double lo,
                                           double hi, int grid_points);

struct ScalarMinimum {
  double x = 0.0;
  double f = 0.0;
  int evaluations = 0;
};

/// Golden-section refinement of an interior bracket until the enclosing
/// interval is narrower than tol. Never evaluates outside [lo, hi].
[[nodiscard]] ScalarMinimum golden_section(const std::function<double(double)>& f,
                                           const Bracket& bracket, double tol);

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  bool converged = false;  ///< simplex collapsed below tol before the iteration cap
  int iterations = 0;
  int evaluations = 0;
};

/// Nelder-Mead downhill simplex with a single restart from the best vertex.
/// The returned value never exceeds f(x0). Dimension is capped at 32.
[[nodiscard]] SimplexResult simplex_minimize(const std::function<double(std::span<const double>)>& f,
                                             std::span<const double> x0, double tol, int max_iter);

}  // namespace ffrx
