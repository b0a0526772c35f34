#include "elaudit/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "elaudit/elcore.hpp"
#include "elaudit/error.hpp"

namespace elaudit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::Domain, "alpha must lie in (0, 1)");
}

void check_group(const EstimatingSystem& sys, Eigen::Index j) {
  if (j < 0 || j >= sys.m()) throw Error(ErrorCode::Domain, "group index out of range");
}

double t04(const EstimatingSystem& single, double eps) {
  Eigen::VectorXd e(1);
  e[0] = eps;
  return el_log_ratio(single, e).log_ratio;
}

double chi2_pvalue(double stat, int df) { return std::isinf(stat) ? 0.0 : 1.0 - chi2_cdf(stat, df); }

TestResult make_result(double stat, DistributionRef ref, double alpha, double eps_hat) {
  TestResult r;
  r.statistic = stat;
  r.reference = ref;
  r.p_value = ref.kind == DistributionRef::Kind::HalfMixtureChiSquare1 ? half_mixture_sf(stat)
                                                                       : chi2_pvalue(stat, ref.df);
  r.alpha = alpha;
  r.reject = r.p_value < alpha;
  r.epsilon_hat = eps_hat;
  return r;
}

double in_group_sd(const EstimatingSystem& sys, Eigen::Index j) {
  const Mask& mk = sys.mask(j);
  const double mean = epsilon_hat(sys.scores(), mk, 0.0);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < sys.n(); ++i) {
    if (mk[static_cast<std::size_t>(i)]) ss += (sys.scores()[i] - mean) * (sys.scores()[i] - mean);
  }
  const auto size = static_cast<double>(sys.group_size(j));
  return size > 1 ? std::sqrt(ss / (size - 1.0)) : 0.0;
}

// Finds the boundary of {e : stat(e) <= threshold} on one side of the estimate.
template <class F>
double invert_side(F&& stat, double center, double step, double direction, double threshold) {
  double inside = center;
  double outside = center + direction * step;
  int doublings = 0;
  while (stat(outside) <= threshold) {
    inside = outside;
    step *= 2.0;
    outside = center + direction * step;
    if (++doublings > 60) throw Error(ErrorCode::BracketFailure, "confidence bound bracket did not close");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (inside + outside);
    if (mid == inside || mid == outside) break;
    const double v = stat(mid);
    if (v <= threshold) {
      inside = mid;
    } else {
      outside = mid;
    }
    if (std::abs(outside - inside) <= 1e-8 && std::abs(v - threshold) <= 1e-8) break;
  }
  return 0.5 * (inside + outside);
}

}  // namespace

HypothesisSpec HypothesisSpec::interval(double eps1, double eps2) {
  if (!(eps1 < eps2)) throw Error(ErrorCode::InvalidInterval, "interval hypothesis needs eps1 < eps2");
  return {Kind::Interval, 0.0, eps1, eps2};
}

CertificationReport certify(const EstimatingSystem& sys, const Eigen::VectorXd& eps0, double alpha, Method method) {
  check_alpha(alpha);
  const ElEvaluation ev = method == Method::EL ? el_log_ratio(sys, eps0) : eel_log_ratio(sys, eps0);
  CertificationReport r;
  r.method = method;
  r.statistic = ev.log_ratio;
  r.df = static_cast<int>(sys.m());
  r.p_value = chi2_pvalue(ev.log_ratio, r.df);
  r.alpha = alpha;
  r.certified = r.p_value >= alpha;
  return r;
}

double point_statistic(const EstimatingSystem& sys, Eigen::Index j, double eps0) {
  check_group(sys, j);
  return t04(sys.single(j), eps0);
}

TestResult test_point(const EstimatingSystem& sys, Eigen::Index j, double eps0, double alpha) {
  check_alpha(alpha);
  const double eh = epsilon_hat(sys.scores(), sys.mask(j), sys.theta());
  return make_result(point_statistic(sys, j, eps0), DistributionRef::chi_square(1), alpha, eh);
}

TestResult test_at_least(const EstimatingSystem& sys, Eigen::Index j, double eps0, double alpha) {
  check_alpha(alpha);
  check_group(sys, j);
  const double eh = epsilon_hat(sys.scores(), sys.mask(j), sys.theta());
  const double stat = eh < eps0 ? point_statistic(sys, j, eps0) : 0.0;
  return make_result(stat, DistributionRef::half_mixture(), alpha, eh);
}

TestResult test_at_most(const EstimatingSystem& sys, Eigen::Index j, double eps0, double alpha) {
  check_alpha(alpha);
  check_group(sys, j);
  const double eh = epsilon_hat(sys.scores(), sys.mask(j), sys.theta());
  const double stat = eh > eps0 ? point_statistic(sys, j, eps0) : 0.0;
  return make_result(stat, DistributionRef::half_mixture(), alpha, eh);
}

TestResult test_interval(const EstimatingSystem& sys, Eigen::Index j, double eps1, double eps2, double alpha) {
  if (!(eps1 < eps2)) throw Error(ErrorCode::InvalidInterval, "interval hypothesis needs eps1 < eps2");
  check_alpha(alpha);
  check_group(sys, j);
  const double eh = epsilon_hat(sys.scores(), sys.mask(j), sys.theta());
  double stat = 0.0;
  if (eh < eps1) {
    stat = point_statistic(sys, j, eps1);
  } else if (eh > eps2) {
    stat = point_statistic(sys, j, eps2);
  }
  return make_result(stat, DistributionRef::half_mixture(), alpha, eh);
}

TestResult test_hypothesis(const EstimatingSystem& sys, Eigen::Index j, const HypothesisSpec& h, double alpha) {
  switch (h.kind) {
    case HypothesisSpec::Kind::PointEquals: return test_point(sys, j, h.eps0, alpha);
    case HypothesisSpec::Kind::AtLeast: return test_at_least(sys, j, h.eps0, alpha);
    case HypothesisSpec::Kind::AtMost: return test_at_most(sys, j, h.eps0, alpha);
    case HypothesisSpec::Kind::Interval: return test_interval(sys, j, h.eps1, h.eps2, alpha);
  }
  throw Error(ErrorCode::Domain, "unknown hypothesis kind");
}

Interval confidence_interval(const EstimatingSystem& sys, Eigen::Index j, double alpha, IntervalKind kind) {
  check_alpha(alpha);
  check_group(sys, j);
  const EstimatingSystem single = sys.single(j);
  const double eh = epsilon_hat(sys.scores(), sys.mask(j), sys.theta());
  const double sd = in_group_sd(sys, j);
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::DegenerateVariance, "group '" + sys.id(j) + "' has constant scores");
  }
  const double step = 4.0 * sd / std::sqrt(static_cast<double>(sys.group_size(j)));
  auto stat = [&](double e) { return t04(single, e); };

  switch (kind) {
    case IntervalKind::TwoSided: {
      const double z = chi2_quantile(1.0 - alpha, 1);
      return {invert_side(stat, eh, step, -1.0, z), invert_side(stat, eh, step, +1.0, z)};
    }
    case IntervalKind::LowerOneSided: {
      // Inverts the at-most test: its statistic vanishes above the estimate.
      if (!(alpha < 0.5)) throw Error(ErrorCode::Domain, "one-sided intervals need alpha < 0.5");
      const double c = chi2_quantile(1.0 - 2.0 * alpha, 1);
      return {invert_side(stat, eh, step, -1.0, c), kInf};
    }
    case IntervalKind::UpperOneSided: {
      if (!(alpha < 0.5)) throw Error(ErrorCode::Domain, "one-sided intervals need alpha < 0.5");
      const double c = chi2_quantile(1.0 - 2.0 * alpha, 1);
      return {-kInf, invert_side(stat, eh, step, +1.0, c)};
    }
  }
  throw Error(ErrorCode::Domain, "unknown interval kind");
}

FlagReport elbh_flag(std::span<const double> p_values, double alpha, std::vector<std::string> group_ids,
                     bool overlap) {
  check_alpha(alpha);
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::Domain, "p-values must lie in [0, 1]");
  }
  if (!group_ids.empty() && group_ids.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "group id count differs from p-value count");
  }
  FlagReport r;
  r.p_values.assign(p_values.begin(), p_values.end());
  r.bh_alpha = alpha;
  r.flagged.assign(m, false);
  r.overlap_warning = overlap;
  if (group_ids.empty()) {
    for (std::size_t i = 0; i < m; ++i) group_ids.push_back("G" + std::to_string(i + 1));
  }
  r.group_ids = std::move(group_ids);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  for (std::size_t k = m; k >= 1; --k) {
    if (p_values[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) {
      r.k_star = k;
      break;
    }
  }
  if (r.k_star > 0) {
    const double cut = p_values[order[r.k_star - 1]];
    for (std::size_t i = 0; i < m; ++i) r.flagged[i] = p_values[i] <= cut;
  }
  return r;
}

FlagReport flag_groups(const EstimatingSystem& sys, const HypothesisSpec& h, double alpha) {
  std::vector<double> p(static_cast<std::size_t>(sys.m()));
  std::vector<std::string> ids;
  for (Eigen::Index j = 0; j < sys.m(); ++j) {
    p[static_cast<std::size_t>(j)] = test_hypothesis(sys, j, h, alpha).p_value;
    ids.push_back(sys.id(j));
  }
  return elbh_flag(p, alpha, std::move(ids), sys.has_overlap());
}

}  // namespace elaudit
