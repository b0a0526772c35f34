#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "elaudit/audit.hpp"
#include "elaudit/disparity.hpp"

namespace elaudit {

enum class BootstrapScheme { PairsPercentile, MaxTSimultaneous };

struct BootstrapConfig {
  std::size_t B = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  BootstrapScheme scheme = BootstrapScheme::PairsPercentile;
};

struct BootstrapRegion {
  BootstrapScheme scheme = BootstrapScheme::PairsPercentile;
  std::vector<Interval> intervals;
  Eigen::VectorXd estimates;
  std::size_t redraws = 0;

  bool covers(const Eigen::VectorXd& eps0) const;
};

// How theta is re-estimated inside each resample.
struct ResampleTarget {
  TargetSpec::Kind kind = TargetSpec::Kind::Known;
  Mask reference;  // ReferenceGroup only
};

BootstrapRegion bootstrap_region(const EstimatingSystem& sys, const BootstrapConfig& cfg,
                                 const ResampleTarget& target = {});

BootstrapRegion bootstrap_region(const AuditDataset& data, const MetricSpec& metric,
                                 std::span<const GroupSpec> groups, const TargetSpec& target,
                                 const BootstrapConfig& cfg);

// Order-statistic positions used by the percentile scheme for B draws at per-side level a.
std::pair<std::size_t, std::size_t> percentile_positions(std::size_t B, double a);

}  // namespace elaudit
