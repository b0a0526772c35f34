#include "elaudit/elcore.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "elaudit/error.hpp"

namespace elaudit {
namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool disjoint_from_rest(const EstimatingSystem& sys, Eigen::Index j) {
  const Mask& mj = sys.mask(j);
  for (Eigen::Index k = 0; k < sys.m(); ++k) {
    if (k == j) continue;
    const Mask& mk = sys.mask(k);
    for (std::size_t i = 0; i < mj.size(); ++i) {
      if (mj[i] && mk[i]) return false;
    }
  }
  return true;
}

std::pair<double, double> score_range(const EstimatingSystem& sys, Eigen::Index k) {
  const auto [lo, hi] = sys.score_range(k);
  return {lo - sys.theta(), hi - sys.theta()};
}

// Minimizes f on [a, b]: coarse scan, then golden-section on the best cell.
template <class F>
double minimize_1d(F&& f, double a, double b, double start) {
  constexpr int kGrid = 24;
  double best_x = start;
  double best_f = f(start);
  const double h = (b - a) / kGrid;
  for (int i = 1; i < kGrid; ++i) {
    const double x = a + i * h;
    const double v = f(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  double lo = std::max(a, best_x - h);
  double hi = std::min(b, best_x + h);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    }
  }
  const double x = 0.5 * (lo + hi);
  return f(x) <= best_f ? x : best_x;
}

}  // namespace

void check_degenerate(const EstimatingSystem& sys, const Eigen::VectorXd& eps) {
  if (eps.size() != sys.m()) {
    throw Error(ErrorCode::DimensionMismatch,
                "eps has length " + std::to_string(eps.size()) + ", expected " + std::to_string(sys.m()));
  }
  for (Eigen::Index j = 0; j < sys.m(); ++j) {
    const auto [lo, hi] = score_range(sys, j);
    if (lo == hi && lo != eps[j]) {
      throw Error(ErrorCode::DegenerateVariance,
                  "group '" + sys.id(j) + "' has constant scores; disparity is fixed at " + std::to_string(lo));
    }
  }
}

ElEvaluation el_log_ratio(const EstimatingSystem& sys, const Eigen::VectorXd& eps, const SolverOptions& options) {
  check_degenerate(sys, eps);
  const Eigen::MatrixXd g = build_estimating_matrix(sys, eps);
  const MultiplierSolution sol = solve_lagrange(g, options);
  ElEvaluation out;
  out.lambda = sol.lambda;
  out.feasible = sol.feasible;
  const double n = static_cast<double>(sys.n());
  if (!sol.feasible) {
    out.log_ratio = kInf;
    out.weights = Eigen::VectorXd::Zero(sys.n());
    return out;
  }
  const Eigen::VectorXd u = g * sol.lambda;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) sum += std::log1p(u[i]);
  out.log_ratio = std::max(0.0, 2.0 * sum);
  out.weights = ((1.0 + u.array()) * n).inverse().matrix();
  return out;
}

ElEvaluation eel_log_ratio(const EstimatingSystem& sys, const Eigen::VectorXd& eps) {
  check_degenerate(sys, eps);
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const double nd = static_cast<double>(n);
  const Eigen::VectorXd& scores = sys.scores();

  // Rows touch few groups, so moments accumulate over memberships only.
  auto entry = [&](Eigen::Index i, Eigen::Index j) { return scores[i] - sys.theta() - eps[j]; };
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = sys.groups_of(i);
    for (const Eigen::Index j : row) {
      const double gj = entry(i, j);
      sum[j] += gj;
      for (const Eigen::Index k : row) cross(j, k) += gj * entry(i, k);
    }
  }

  // Columns that vanish identically carry no constraint.
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (cross(j, j) > 0.0) active.push_back(j);
  }
  ElEvaluation out;
  out.feasible = true;
  out.lambda = Eigen::VectorXd::Zero(m);
  out.weights = Eigen::VectorXd::Constant(n, 1.0 / nd);
  if (active.empty()) return out;

  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::VectorXd gbar(k);
  Eigen::MatrixXd s(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    gbar[a] = sum[active[static_cast<std::size_t>(a)]] / nd;
    for (Eigen::Index b = 0; b < k; ++b) {
      s(a, b) = cross(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]) / nd;
    }
  }
  s.noalias() -= gbar * gbar.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  const double emin = eig.eigenvalues().minCoeff();
  const double emax = eig.eigenvalues().maxCoeff();
  if (!(emin > 0.0) || emax / emin > kMaxCondition) {
    throw Error(ErrorCode::SingularCovariance, "covariance of estimating functions is singular or ill-conditioned");
  }
  const Eigen::VectorXd a = s.ldlt().solve(gbar);
  const double q = gbar.dot(a);
  out.log_ratio = std::max(0.0, nd * q);

  Eigen::VectorXd full_a = Eigen::VectorXd::Zero(m);
  for (Eigen::Index c = 0; c < k; ++c) full_a[active[static_cast<std::size_t>(c)]] = a[c];
  out.lambda = full_a;
  // p_i = 1/n + (1/n) gbar' s^{-1} (gbar - g_i)
  for (Eigen::Index i = 0; i < n; ++i) {
    double gi_a = 0.0;
    for (const Eigen::Index j : sys.groups_of(i)) gi_a += entry(i, j) * full_a[j];
    out.weights[i] = (1.0 + q - gi_a) / nd;
  }
  return out;
}

ElEvaluation plugin_el_log_ratio(const AuditDataset& data, const MetricSpec& metric,
                                 std::span<const GroupSpec> groups, const TargetSpec& target,
                                 const Eigen::VectorXd& eps) {
  if (target.kind == TargetSpec::Kind::Known) {
    throw Error(ErrorCode::Config, "plug-in EL needs an estimated target");
  }
  return el_log_ratio(build_system(data, metric, groups, target), eps);
}

double profile_el2(const EstimatingSystem& sys, Eigen::Index j, double eps_j) {
  if (j < 0 || j >= sys.m()) throw Error(ErrorCode::Domain, "group index out of range");
  if (sys.m() == 1 || disjoint_from_rest(sys, j)) {
    Eigen::VectorXd e(1);
    e[0] = eps_j;
    return el_log_ratio(sys.single(j), e).log_ratio;
  }

  Eigen::VectorXd eps = epsilon_hat(sys);
  eps[j] = eps_j;
  auto value_at = [&](const Eigen::VectorXd& e) {
    try {
      return el_log_ratio(sys, e).log_ratio;
    } catch (const Error& err) {
      if (err.code() == ErrorCode::DegenerateVariance) return kInf;
      throw;
    }
  };
  double current = value_at(eps);
  for (int sweep = 0; sweep < 200; ++sweep) {
    const double before = current;
    for (Eigen::Index k = 0; k < sys.m(); ++k) {
      if (k == j) continue;
      const auto [lo, hi] = score_range(sys, k);
      if (lo == hi) {
        eps[k] = lo;
        continue;
      }
      auto f = [&](double x) {
        Eigen::VectorXd e = eps;
        e[k] = x;
        return value_at(e);
      };
      eps[k] = minimize_1d(f, lo, hi, eps[k]);
      current = value_at(eps);
    }
    if (std::abs(before - current) < 1e-9) break;
  }
  return current;
}

}  // namespace elaudit
