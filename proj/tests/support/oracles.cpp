#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace elaudit::oracle {

double bisect_lambda(const std::vector<double>& g) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (double v : g) {
    if (v > 0) lo = std::max(lo, -1.0 / v);
    if (v < 0) hi = std::min(hi, -1.0 / v);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::domain_error("zero outside hull");
  auto score = [&](double l) {
    double s = 0.0;
    for (double v : g) s += v / (1.0 + l * v);
    return s;
  };
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (score(mid) > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double simplex_log_ratio(const std::vector<double>& g_in) {
  const std::size_t n = g_in.size();
  if (n < 2 || n > 6) throw std::invalid_argument("simplex oracle supports 2 <= n <= 6");
  const auto [mn, mx] = std::minmax_element(g_in.begin(), g_in.end());
  if (!(*mn < 0 && *mx > 0)) return std::numeric_limits<double>::infinity();

  // Put one negative and one positive entry last so the two equality constraints solve for them.
  std::vector<double> g = g_in;
  std::iter_swap(g.end() - 2, std::min_element(g.begin(), g.end()));
  std::iter_swap(g.end() - 1, std::max_element(g.begin(), g.end()));
  const std::size_t free = n - 2;
  const double a = g[n - 2];
  const double b = g[n - 1];

  auto objective = [&](const std::vector<double>& q) {
    double s0 = 0.0;
    double s1 = 0.0;
    double lp = 0.0;
    for (std::size_t i = 0; i < free; ++i) {
      if (q[i] <= 0.0) return -std::numeric_limits<double>::infinity();
      s0 += q[i];
      s1 += q[i] * g[i];
      lp += std::log(n * q[i]);
    }
    // pa + pb = 1 - s0 and a pa + b pb = -s1
    const double rest = 1.0 - s0;
    const double pa = (-s1 - b * rest) / (a - b);
    const double pb = rest - pa;
    if (pa <= 0.0 || pb <= 0.0) return -std::numeric_limits<double>::infinity();
    return lp + std::log(n * pa) + std::log(n * pb);
  };

  if (free == 0) return -2.0 * objective({});

  // Equal small weights on the free points always leave a feasible two-point remainder.
  double t = 1.0 / static_cast<double>(n);
  std::vector<double> center(free, t);
  for (int i = 0; i < 200 && !std::isfinite(objective(center)); ++i) center.assign(free, t *= 0.5);
  double best = objective(center);
  double width = 2.0 * t;
  const int k = free <= 2 ? 41 : (free == 3 ? 15 : 9);
  std::vector<double> q(free);
  // Pattern search: widen when the best point sits on the grid edge, otherwise zoom in.
  for (int level = 0; level < 400 && width > 1e-13; ++level) {
    std::vector<double> best_q = center;
    bool on_edge = false;
    std::vector<int> idx(free, 0);
    for (;;) {
      bool edge = false;
      for (std::size_t d = 0; d < free; ++d) {
        q[d] = center[d] + width * (static_cast<double>(idx[d]) / (k - 1) - 0.5);
        edge = edge || idx[d] == 0 || idx[d] == k - 1;
      }
      const double v = objective(q);
      if (v > best) {
        best = v;
        best_q = q;
        on_edge = edge;
      }
      std::size_t d = 0;
      while (d < free && ++idx[d] == k) idx[d++] = 0;
      if (d == free) break;
    }
    center = best_q;
    width = on_edge ? std::min(1.0, 2.0 * width) : 0.5 * width;
  }
  return -2.0 * best;
}

BhOutcome bh_threshold_search(const std::vector<double>& p, double alpha) {
  const double m = static_cast<double>(p.size());
  BhOutcome out;
  out.flagged.assign(p.size(), false);
  double threshold = -1.0;
  for (double t : p) {
    const auto r = static_cast<double>(std::count_if(p.begin(), p.end(), [&](double x) { return x <= t; }));
    if (t <= r * alpha / m && t > threshold) threshold = t;
  }
  if (threshold < 0.0) return out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.flagged[i] = p[i] <= threshold;
    out.k_star += out.flagged[i];
  }
  return out;
}

}  // namespace elaudit::oracle
