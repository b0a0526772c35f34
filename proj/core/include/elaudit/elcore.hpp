#pragma once

#include <Eigen/Core>
#include <span>

#include "elaudit/disparity.hpp"
#include "elaudit/numerics.hpp"

namespace elaudit {

struct ElEvaluation {
  double log_ratio = 0.0;  // +inf when infeasible
  Eigen::VectorXd weights;
  Eigen::VectorXd lambda;
  bool feasible = false;
};

// -2 log of the empirical likelihood ratio at eps.
ElEvaluation el_log_ratio(const EstimatingSystem& sys, const Eigen::VectorXd& eps,
                          const SolverOptions& options = {});

// Euclidean variant n * gbar' s^{-1} gbar with closed-form weights (which may be negative).
ElEvaluation eel_log_ratio(const EstimatingSystem& sys, const Eigen::VectorXd& eps);

// EL with theta replaced by its estimate from the same data.
ElEvaluation plugin_el_log_ratio(const AuditDataset& data, const MetricSpec& metric,
                                 std::span<const GroupSpec> groups, const TargetSpec& target,
                                 const Eigen::VectorXd& eps);

// Profile statistic for group j at eps_j with the remaining disparities maximized out.
double profile_el2(const EstimatingSystem& sys, Eigen::Index j, double eps_j);

// Throws DegenerateVariance if some group has constant scores c and eps_j + theta != c.
void check_degenerate(const EstimatingSystem& sys, const Eigen::VectorXd& eps);

}  // namespace elaudit
