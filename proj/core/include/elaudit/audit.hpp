#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "elaudit/disparity.hpp"
#include "elaudit/numerics.hpp"

namespace elaudit {

struct HypothesisSpec {
  enum class Kind { PointEquals, AtLeast, AtMost, Interval };

  Kind kind = Kind::PointEquals;
  double eps0 = 0.0;
  double eps1 = 0.0;  // Interval only
  double eps2 = 0.0;

  static HypothesisSpec point(double eps0) { return {Kind::PointEquals, eps0, 0.0, 0.0}; }
  static HypothesisSpec at_least(double eps0) { return {Kind::AtLeast, eps0, 0.0, 0.0}; }
  static HypothesisSpec at_most(double eps0) { return {Kind::AtMost, eps0, 0.0, 0.0}; }
  static HypothesisSpec interval(double eps1, double eps2);  // throws InvalidInterval unless eps1 < eps2
};

struct TestResult {
  double statistic = 0.0;
  DistributionRef reference;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  double epsilon_hat = 0.0;
};

enum class Method { EL, EEL };

struct CertificationReport {
  Method method = Method::EL;
  double statistic = 0.0;
  int df = 1;
  double p_value = 1.0;
  bool certified = true;
  double alpha = 0.05;
};

struct FlagReport {
  std::vector<std::string> group_ids;
  std::vector<double> p_values;
  double bh_alpha = 0.05;
  std::size_t k_star = 0;
  std::vector<bool> flagged;
  bool overlap_warning = false;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
  double length() const { return hi - lo; }
};

enum class IntervalKind { TwoSided, LowerOneSided, UpperOneSided };

CertificationReport certify(const EstimatingSystem& sys, const Eigen::VectorXd& eps0, double alpha, Method method);

// Single-group statistic T04 for group j at eps0.
double point_statistic(const EstimatingSystem& sys, Eigen::Index j, double eps0);

TestResult test_point(const EstimatingSystem& sys, Eigen::Index j, double eps0, double alpha);
TestResult test_at_least(const EstimatingSystem& sys, Eigen::Index j, double eps0, double alpha);
TestResult test_at_most(const EstimatingSystem& sys, Eigen::Index j, double eps0, double alpha);
TestResult test_interval(const EstimatingSystem& sys, Eigen::Index j, double eps1, double eps2, double alpha);
TestResult test_hypothesis(const EstimatingSystem& sys, Eigen::Index j, const HypothesisSpec& h, double alpha);

// LowerOneSided gives [lo, +inf) and UpperOneSided gives (-inf, hi].
Interval confidence_interval(const EstimatingSystem& sys, Eigen::Index j, double alpha, IntervalKind kind);

// Benjamini-Hochberg step-up over the given p-values.
FlagReport elbh_flag(std::span<const double> p_values, double alpha, std::vector<std::string> group_ids = {},
                     bool overlap = false);

// Per-group p-values under h, then ELBH; the overlap warning comes from the system.
FlagReport flag_groups(const EstimatingSystem& sys, const HypothesisSpec& h, double alpha);

}  // namespace elaudit
