#include "ffrx/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ffrx {

Bracket first_local_min_scan(const std::function<double(double)>& f, double lo, double hi,
                             int grid_points) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("first_local_min_scan: requires finite lo < hi");
  }
  if (grid_points < 3) {
    throw std::invalid_argument("first_local_min_scan: requires at least 3 grid points");
  }

  std::vector<double> x(grid_points);
  std::vector<double> fx(grid_points);
  const double step = (hi - lo) / (grid_points - 1);
  for (int i = 0; i < grid_points; ++i) x[i] = lo + i * step;
  x.back() = hi;
  for (int i = 0; i < grid_points; ++i) fx[i] = f(x[i]);

  // Find the first strict descent, then walk to the far side of its valley.
  int i = 1;
  while (i < grid_points && !(fx[i] < fx[i - 1])) ++i;
  if (i == grid_points) {
    return Bracket{lo, lo, x[1], true};  // nondecreasing everywhere: minimum sits at lo
  }
  int j = i;
  while (j + 1 < grid_points && fx[j + 1] <= fx[j]) ++j;
  if (j + 1 == grid_points) {
    return Bracket{x[grid_points - 2], hi, hi, true};  // still descending at hi
  }
  return Bracket{x[i - 1], x[j], x[j + 1], false};
}

ScalarMinimum golden_section(const std::function<double(double)>& f, const Bracket& bracket,
                             double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("golden_section: tol must be positive");
  if (bracket.boundary || !(bracket.lo < bracket.mid && bracket.mid < bracket.hi)) {
    throw std::invalid_argument("golden_section: requires an interior bracket (lo < mid < hi)");
  }

  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = bracket.lo;
  double b = bracket.hi;
  int evaluations = 0;
  const auto eval = [&](double t) {
    ++evaluations;
    return f(t);
  };

  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  return fc < fd ? ScalarMinimum{c, fc, evaluations} : ScalarMinimum{d, fd, evaluations};
}

namespace {

struct SimplexPass {
  std::vector<std::vector<double>> vertices;
  std::vector<double> values;
  bool converged = false;
  int iterations = 0;
};

/// One Nelder-Mead run from `start`; shares the evaluation counter.
SimplexPass nelder_mead_pass(const std::function<double(std::span<const double>)>& f,
                             const std::vector<double>& start, double fstart, double tol,
                             int max_iter, int& evaluations) {
  const int dim = static_cast<int>(start.size());
  const auto eval = [&](const std::vector<double>& p) {
    ++evaluations;
    return f(std::span<const double>(p.data(), p.size()));
  };

  SimplexPass pass;
  pass.vertices.assign(dim + 1, start);
  pass.values.assign(dim + 1, fstart);
  for (int i = 0; i < dim; ++i) {
    const double delta = 0.1 * std::max(1.0, std::fabs(start[i]));
    pass.vertices[i + 1][i] += delta;
    pass.values[i + 1] = eval(pass.vertices[i + 1]);
  }

  std::vector<int> order(dim + 1);
  std::vector<double> centroid(dim), candidate(dim);
  for (pass.iterations = 0; pass.iterations < max_iter; ++pass.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return pass.values[a] < pass.values[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second_worst = order[dim - 1];

    // Converged once the simplex is tiny in both position and value spread.
    double diameter = 0.0;
    for (int v = 0; v <= dim; ++v) {
      for (int i = 0; i < dim; ++i) {
        diameter = std::max(diameter, std::fabs(pass.vertices[v][i] - pass.vertices[best][i]));
      }
    }
    const double spread = pass.values[worst] - pass.values[best];
    if (diameter < tol || spread < tol) {
      pass.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (int v = 0; v <= dim; ++v) {
      if (v == worst) continue;
      for (int i = 0; i < dim; ++i) centroid[i] += pass.vertices[v][i];
    }
    for (double& c : centroid) c /= dim;

    const auto blend = [&](double coeff) {
      for (int i = 0; i < dim; ++i) {
        candidate[i] = centroid[i] + coeff * (centroid[i] - pass.vertices[worst][i]);
      }
    };

    blend(1.0);  // reflection
    std::vector<double> reflected = candidate;
    const double fr = eval(reflected);
    if (fr < pass.values[best]) {
      blend(2.0);  // expansion
      const double fe = eval(candidate);
      if (fe < fr) {
        pass.vertices[worst] = candidate;
        pass.values[worst] = fe;
      } else {
        pass.vertices[worst] = reflected;
        pass.values[worst] = fr;
      }
      continue;
    }
    if (fr < pass.values[second_worst]) {
      pass.vertices[worst] = reflected;
      pass.values[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflection improved on the worst, else inside.
    const bool outside = fr < pass.values[worst];
    blend(outside ? 0.5 : -0.5);
    const double fc = eval(candidate);
    if ((outside && fc <= fr) || (!outside && fc < pass.values[worst])) {
      pass.vertices[worst] = candidate;
      pass.values[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (int v = 0; v <= dim; ++v) {
      if (v == best) continue;
      for (int i = 0; i < dim; ++i) {
        pass.vertices[v][i] = pass.vertices[best][i] + 0.5 * (pass.vertices[v][i] - pass.vertices[best][i]);
      }
      pass.values[v] = eval(pass.vertices[v]);
    }
  }
  return pass;
}

}  // namespace

SimplexResult simplex_minimize(const std::function<double(std::span<const double>)>& f,
                               std::span<const double> x0, double tol, int max_iter) {
  const int dim = static_cast<int>(x0.size());
  if (dim < 1 || dim > 32) {
    throw std::invalid_argument("simplex_minimize: dimension must lie in [1, 32], got " +
                                std::to_string(dim));
  }
  if (!(tol > 0.0)) throw std::invalid_argument("simplex_minimize: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("simplex_minimize: max_iter must be positive");

  int evaluations = 0;
  std::vector<double> start(x0.begin(), x0.end());
  ++evaluations;
  const double fstart = f(x0);
  if (!std::isfinite(fstart)) {
    throw std::domain_error("simplex_minimize: objective is not finite at the start point");
  }

  SimplexPass first = nelder_mead_pass(f, start, fstart, tol, max_iter, evaluations);
  int best_index = 0;
  for (int v = 1; v < static_cast<int>(first.values.size()); ++v) {
    if (first.values[v] < first.values[best_index]) best_index = v;
  }

  // Restart once from the best vertex; a fresh simplex escapes premature collapse.
  SimplexPass second = nelder_mead_pass(f, first.vertices[best_index], first.values[best_index],
                                        tol, max_iter, evaluations);
  SimplexResult result;
  result.x = first.vertices[best_index];
  result.f = first.values[best_index];
  for (int v = 0; v < static_cast<int>(second.values.size()); ++v) {
    if (second.values[v] < result.f) {
      result.f = second.values[v];
      result.x = second.vertices[v];
    }
  }
  result.converged = second.converged;
  result.iterations = first.iterations + second.iterations;
  result.evaluations = evaluations;
  return result;
}

}  // namespace ffrx
