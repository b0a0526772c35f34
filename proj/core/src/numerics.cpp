#include "elaudit/numerics.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <vector>

#include "elaudit/error.hpp"

namespace elaudit {
namespace {

constexpr double kTermCutoff = 1e-14;
constexpr int kMaxTerms = 100000;
constexpr double kTiny = 1e-300;

double gamma_prefactor(double a, double x) {
  return std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int k = 0; k < kMaxTerms; ++k) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kTermCutoff) break;
  }
  return sum * gamma_prefactor(a, x);
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kTermCutoff) break;
  }
  return gamma_prefactor(a, x) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || std::isnan(x) || x < 0.0) {
    throw Error(ErrorCode::Domain, "incomplete gamma requires a > 0 and x >= 0");
  }
}

// Owen's pseudo-logarithm: log(z) above 1/n, quadratic continuation below.
struct PseudoLog {
  double n;
  double eps;
  explicit PseudoLog(double rows) : n(rows), eps(1.0 / rows) {}

  double value(double z) const {
    if (z >= eps) return std::log(z);
    const double nz = n * z;
    return -std::log(n) - 1.5 + 2.0 * nz - 0.5 * nz * nz;
  }
  double d1(double z) const { return z >= eps ? 1.0 / z : 2.0 * n - n * n * z; }
  // Negated second derivative, always positive.
  double neg_d2(double z) const { return z >= eps ? 1.0 / (z * z) : n * n; }
};

}  // namespace

DistributionRef DistributionRef::chi_square(int df) {
  if (df < 1) throw Error(ErrorCode::Domain, "chi-square df must be >= 1");
  return {Kind::ChiSquare, df};
}

double DistributionRef::sf(double x) const {
  switch (kind) {
    case Kind::ChiSquare:
      if (std::isinf(x)) return 0.0;
      return 1.0 - chi2_cdf(x, df);
    case Kind::HalfMixtureChiSquare1:
      if (std::isinf(x)) return 0.0;
      return half_mixture_sf(x);
    case Kind::StandardNormal:
      return 1.0 - normal_cdf(x);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string DistributionRef::describe() const {
  switch (kind) {
    case Kind::ChiSquare: return "chi2(" + std::to_string(df) + ")";
    case Kind::HalfMixtureChiSquare1: return "0.5*chi2(0)+0.5*chi2(1)";
    case Kind::StandardNormal: return "normal(0,1)";
  }
  return "unknown";
}

double regularized_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chi2_cdf(double x, int df) {
  if (df < 1) throw Error(ErrorCode::Domain, "chi2_cdf requires df >= 1");
  if (std::isnan(x) || x < 0.0) throw Error(ErrorCode::Domain, "chi2_cdf requires x >= 0");
  return regularized_gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double p, int df) {
  if (df < 1) throw Error(ErrorCode::Domain, "chi2_quantile requires df >= 1");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::Domain, "chi2_quantile requires 0 < p < 1");
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(df));
  while (chi2_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double half_mixture_sf(double t) {
  if (std::isnan(t) || t < 0.0) throw Error(ErrorCode::Domain, "half_mixture_sf requires t >= 0");
  if (t == 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  return 0.5 * (1.0 - chi2_cdf(t, 1));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

MultiplierSolution solve_lagrange(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                  const SolverOptions& options) {
  const Eigen::Index n = g.rows();
  const Eigen::Index m = g.cols();
  if (n < 1 || m < 1) throw Error(ErrorCode::Domain, "solve_lagrange needs a nonempty matrix");
  if (!g.allFinite()) throw Error(ErrorCode::Domain, "solve_lagrange input contains non-finite entries");

  MultiplierSolution out;
  out.lambda = Eigen::VectorXd::Zero(m);

  // All-zero columns carry no constraint; their multiplier is fixed at zero.
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double lo = g.col(j).minCoeff();
    const double hi = g.col(j).maxCoeff();
    if (lo == 0.0 && hi == 0.0) continue;
    if (!(lo < 0.0 && hi > 0.0)) {
      // A single-signed column gives a separating direction.
      out.residual_norm = std::abs(g.col(j).mean());
      return out;
    }
    active.push_back(j);
  }
  if (active.empty()) {
    out.feasible = true;
    return out;
  }

  Eigen::MatrixXd packed;
  const bool all_active = static_cast<Eigen::Index>(active.size()) == m;
  if (!all_active) {
    packed.resize(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) packed.col(static_cast<Eigen::Index>(k)) = g.col(active[k]);
  }
  const Eigen::Ref<const Eigen::MatrixXd> G = all_active ? g : Eigen::Ref<const Eigen::MatrixXd>(packed);
  const Eigen::Index k = G.cols();
  const double nd = static_cast<double>(n);
  const double gmax = G.cwiseAbs().maxCoeff();
  const PseudoLog psi(nd);

  auto objective = [&](const Eigen::VectorXd& z) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) f -= psi.value(z[i]);
    return f;
  };

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd d1(n), w(n), cand(k), zc(n);
  Eigen::MatrixXd H(k, k);

  auto finish = [&](bool feasible, int iterations, double residual) {
    out.feasible = feasible;
    out.iterations = iterations;
    out.residual_norm = residual;
    for (std::size_t a = 0; a < active.size(); ++a) out.lambda[active[a]] = lambda[static_cast<Eigen::Index>(a)];
    return out;
  };

  for (int it = 0; it <= options.max_iterations; ++it) {
    double residual = std::numeric_limits<double>::infinity();
    if (z.minCoeff() > 0.0) {
      const Eigen::VectorXd inv = z.cwiseInverse();
      residual = (G.transpose() * inv).norm() / nd;
      // Weights must also sum to one; escaping iterates drive the residual to zero without it.
      if (residual <= options.tolerance && std::abs(inv.sum() / nd - 1.0) <= 1e-6) return finish(true, it, residual);
    }
    if (it == options.max_iterations) break;

    for (Eigen::Index i = 0; i < n; ++i) {
      d1[i] = psi.d1(z[i]);
      w[i] = psi.neg_d2(z[i]);
    }
    const Eigen::VectorXd grad = -(G.transpose() * d1);
    H.noalias() = G.transpose() * w.asDiagonal() * G;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || grad.dot(step) >= 0.0) step = -grad;

    const double f0 = objective(z);
    const double slope = grad.dot(step);
    // Near the optimum the decrease falls below rounding in f; allow for it.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0));
    double t = 1.0;
    for (;;) {
      cand = lambda + t * step;
      zc.noalias() = G * cand;
      zc.array() += 1.0;
      const double f1 = objective(zc);
      if (f1 <= f0 + 1e-4 * t * slope + slack || t < 1e-30) break;
      t *= options.contraction;
    }
    lambda = cand;
    z = zc;

    if (lambda.norm() * gmax > options.divergence_bound) {
      return finish(false, it + 1, residual);
    }
  }
  throw Error(ErrorCode::NoConvergence,
              "multiplier solve did not converge in " + std::to_string(options.max_iterations) + " iterations");
}

}  // namespace elaudit
