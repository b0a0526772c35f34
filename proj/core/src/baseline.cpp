#include "elaudit/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "elaudit/error.hpp"
#include "elaudit/rng.hpp"

namespace elaudit {
namespace {

double quantile_sorted(std::vector<double>& v, double p) {
  std::sort(v.begin(), v.end());
  const auto k = std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size()))) - 1);
  return v[k];
}

}  // namespace

bool BootstrapRegion::covers(const Eigen::VectorXd& eps0) const {
  if (static_cast<std::size_t>(eps0.size()) != intervals.size()) {
    throw Error(ErrorCode::DimensionMismatch, "eps0 length differs from group count");
  }
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    if (!intervals[j].contains(eps0[static_cast<Eigen::Index>(j)])) return false;
  }
  return true;
}

std::pair<std::size_t, std::size_t> percentile_positions(std::size_t B, double a) {
  auto lo = static_cast<std::size_t>(std::floor(a * static_cast<double>(B)));
  lo = std::min(lo, B - 1);
  return {lo, B - 1 - lo};
}

BootstrapRegion bootstrap_region(const EstimatingSystem& sys, const BootstrapConfig& cfg,
                                 const ResampleTarget& target) {
  if (cfg.B < 100) throw Error(ErrorCode::Domain, "bootstrap needs B >= 100");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorCode::Domain, "alpha must lie in (0, 1)");
  const auto n = static_cast<std::size_t>(sys.n());
  const auto m = static_cast<std::size_t>(sys.m());
  const bool use_ref = target.kind == TargetSpec::Kind::ReferenceGroup;
  if (use_ref && target.reference.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "reference mask length differs from row count");
  }
  const Eigen::VectorXd& s = sys.scores();

  // Groups containing each row.
  std::vector<std::vector<std::size_t>> lists(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (sys.mask(static_cast<Eigen::Index>(j))[i]) lists[i].push_back(j);
    }
  }

  BootstrapRegion out;
  out.scheme = cfg.scheme;
  out.estimates = epsilon_hat(sys);

  Eigen::MatrixXd draws(static_cast<Eigen::Index>(cfg.B), static_cast<Eigen::Index>(m));
  std::vector<double> sums(m), counts(m);
  const std::size_t cap = 10 * cfg.B;
  for (std::size_t b = 0; b < cfg.B; ++b) {
    Engine rng = make_stream(cfg.seed, b);
    for (;;) {
      std::fill(sums.begin(), sums.end(), 0.0);
      std::fill(counts.begin(), counts.end(), 0.0);
      double total = 0.0;
      double ref_sum = 0.0;
      double ref_count = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = uniform_index(rng, n);
        const double v = s[static_cast<Eigen::Index>(i)];
        total += v;
        for (std::size_t j : lists[i]) {
          sums[j] += v;
          counts[j] += 1.0;
        }
        if (use_ref && target.reference[i]) {
          ref_sum += v;
          ref_count += 1.0;
        }
      }
      const bool empty = std::any_of(counts.begin(), counts.end(), [](double c) { return c == 0.0; }) ||
                         (use_ref && ref_count == 0.0);
      if (empty) {
        if (++out.redraws > cap) {
          throw Error(ErrorCode::EmptyGroupResample, "more than " + std::to_string(cap) + " resamples had an empty group");
        }
        continue;
      }
      double theta = sys.theta();
      if (target.kind == TargetSpec::Kind::PopulationMean) theta = total / static_cast<double>(n);
      if (use_ref) theta = ref_sum / ref_count;
      for (std::size_t j = 0; j < m; ++j) {
        draws(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = sums[j] / counts[j] - theta;
      }
      break;
    }
  }

  out.intervals.resize(m);
  if (cfg.scheme == BootstrapScheme::PairsPercentile) {
    const auto [lo, hi] = percentile_positions(cfg.B, cfg.alpha / static_cast<double>(m));
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> v(cfg.B);
      for (std::size_t b = 0; b < cfg.B; ++b) v[b] = draws(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
      std::sort(v.begin(), v.end());
      out.intervals[j] = {v[lo], v[hi]};
    }
  } else {
    Eigen::VectorXd se(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      const auto col = draws.col(static_cast<Eigen::Index>(j));
      const double mean = col.mean();
      se[static_cast<Eigen::Index>(j)] =
          std::sqrt((col.array() - mean).square().sum() / static_cast<double>(cfg.B - 1));
    }
    std::vector<double> maxt(cfg.B, 0.0);
    for (std::size_t b = 0; b < cfg.B; ++b) {
      for (std::size_t j = 0; j < m; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (se[jj] > 0.0) {
          maxt[b] = std::max(maxt[b], std::abs(draws(static_cast<Eigen::Index>(b), jj) - out.estimates[jj]) / se[jj]);
        }
      }
    }
    const double q = quantile_sorted(maxt, 1.0 - cfg.alpha);
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      out.intervals[j] = {out.estimates[jj] - q * se[jj], out.estimates[jj] + q * se[jj]};
    }
  }
  return out;
}

BootstrapRegion bootstrap_region(const AuditDataset& data, const MetricSpec& metric,
                                 std::span<const GroupSpec> groups, const TargetSpec& target,
                                 const BootstrapConfig& cfg) {
  const EstimatingSystem sys = build_system(data, metric, groups, target);
  ResampleTarget rt;
  rt.kind = target.kind;
  if (target.kind == TargetSpec::Kind::ReferenceGroup) rt.reference = group_mask(data, *target.group);
  return bootstrap_region(sys, cfg, rt);
}

}  // namespace elaudit
