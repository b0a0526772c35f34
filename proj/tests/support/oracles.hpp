#pragma once

// Reference implementations used only to cross-check the library.

#include <cstddef>
#include <vector>

namespace elaudit::oracle {

// Root of sum_i g_i / (1 + l g_i) = 0 by bisection on the open feasible interval.
double bisect_lambda(const std::vector<double>& g);

// -2 log max prod(n p_i) over the simplex subject to sum p_i g_i = 0 (n <= 6),
// by grid search with repeated zoom. Returns +inf when zero is outside the hull.
double simplex_log_ratio(const std::vector<double>& g);

struct BhOutcome {
  std::size_t k_star = 0;
  std::vector<bool> flagged;
};

// Tries every observed p-value as a rejection threshold and keeps the largest admissible one.
BhOutcome bh_threshold_search(const std::vector<double>& p, double alpha);

// Minimizes f over [lo, hi] by a fine grid with zoom refinement.
template <class F>
double grid_minimize(F&& f, double lo, double hi, int points = 201, int zooms = 12) {
  double best_x = lo;
  double best = f(lo);
  for (int z = 0; z < zooms; ++z) {
    const double h = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
      const double x = lo + i * h;
      const double v = f(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    const double nlo = best_x - 2 * h;
    const double nhi = best_x + 2 * h;
    lo = nlo > lo ? nlo : lo;
    hi = nhi < hi ? nhi : hi;
  }
  return best;
}

}  // namespace elaudit::oracle
