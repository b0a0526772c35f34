#pragma once

#include <Eigen/Core>
#include <string>

namespace elaudit {

struct DistributionRef {
  enum class Kind { ChiSquare, HalfMixtureChiSquare1, StandardNormal };

  Kind kind = Kind::ChiSquare;
  int df = 1;  // meaningful for ChiSquare only

  static DistributionRef chi_square(int df);
  static DistributionRef half_mixture() { return {Kind::HalfMixtureChiSquare1, 1}; }
  static DistributionRef standard_normal() { return {Kind::StandardNormal, 0}; }

  // Upper tail P(X > x).
  double sf(double x) const;
  std::string describe() const;

  friend bool operator==(const DistributionRef&, const DistributionRef&) = default;
};

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

double chi2_cdf(double x, int df);
double chi2_quantile(double p, int df);

// Survival function of the half-and-half mixture of a point mass at zero and chi2(1).
double half_mixture_sf(double t);

double normal_cdf(double z);

struct SolverOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
  double contraction = 0.5;
  // Iterates with |lambda| * max|g| beyond this are treated as escaping to infinity.
  double divergence_bound = 1e12;
};

struct MultiplierSolution {
  Eigen::VectorXd lambda;
  double residual_norm = 0.0;
  int iterations = 0;
  bool feasible = false;
};

// Solves (1/n) sum_i g_i / (1 + lambda' g_i) = 0 for the rows g_i of g.
// Returns feasible=false when zero is not interior to the convex hull of the rows.
MultiplierSolution solve_lagrange(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                  const SolverOptions& options = {});

}  // namespace elaudit
