#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "elaudit/dataset.hpp"

namespace elaudit {

using Mask = std::vector<std::uint8_t>;

struct MetricSpec {
  enum class Kind { Column, SquaredError, Residual, PositiveIndicator, OutcomeColumn };

  Kind kind = Kind::Column;
  std::string column;       // Column, OutcomeColumn, and the prediction for the others
  std::string outcome;      // SquaredError, Residual
  double threshold = 0.0;   // PositiveIndicator

  static MetricSpec of_column(std::string name) { return {Kind::Column, std::move(name), {}, 0.0}; }
  static MetricSpec squared_error(std::string pred, std::string y) {
    return {Kind::SquaredError, std::move(pred), std::move(y), 0.0};
  }
  static MetricSpec residual(std::string pred, std::string y) {
    return {Kind::Residual, std::move(pred), std::move(y), 0.0};
  }
  static MetricSpec positive_indicator(std::string pred, double threshold) {
    return {Kind::PositiveIndicator, std::move(pred), {}, threshold};
  }
  static MetricSpec outcome_column(std::string name) { return {Kind::OutcomeColumn, std::move(name), {}, 0.0}; }
};

struct Clause {
  enum class Op { Eq, Ne, Lt, Le, Gt, Ge, InSet };

  std::string column;
  Op op = Op::Eq;
  // Literal text; numeric columns parse it, categorical columns compare it verbatim.
  std::vector<std::string> literals;
};

struct GroupSpec {
  std::string id;
  std::vector<Clause> predicate;  // conjunction; empty means every row
};

struct TargetSpec {
  enum class Kind { Known, PopulationMean, ReferenceGroup };

  Kind kind = Kind::Known;
  double theta = 0.0;
  std::optional<GroupSpec> group;

  static TargetSpec known(double theta) { return {Kind::Known, theta, std::nullopt}; }
  static TargetSpec population_mean() { return {Kind::PopulationMean, 0.0, std::nullopt}; }
  static TargetSpec reference_group(GroupSpec g) { return {Kind::ReferenceGroup, 0.0, std::move(g)}; }
};

// Scores, membership masks, and target defining g_ij(eps) = (M_i - theta - eps_j) 1{i in G_j}.
class EstimatingSystem {
 public:
  // Throws EmptyGroup (naming the group when ids are given) if any mask is all false.
  static EstimatingSystem create(Eigen::VectorXd scores, std::vector<Mask> masks, double theta,
                                 std::vector<std::string> ids = {});

  Eigen::Index n() const noexcept { return scores_.size(); }
  Eigen::Index m() const noexcept { return static_cast<Eigen::Index>(masks_.size()); }
  const Eigen::VectorXd& scores() const noexcept { return scores_; }
  const Mask& mask(Eigen::Index j) const { return masks_.at(static_cast<std::size_t>(j)); }
  const std::vector<Mask>& masks() const noexcept { return masks_; }
  double theta() const noexcept { return theta_; }
  std::size_t group_size(Eigen::Index j) const { return sizes_.at(static_cast<std::size_t>(j)); }
  const std::vector<std::size_t>& group_sizes() const noexcept { return sizes_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::string id(Eigen::Index j) const;

  // System for group j alone, over the same rows.
  EstimatingSystem single(Eigen::Index j) const;
  EstimatingSystem with_theta(double theta) const;
  bool has_overlap() const;
  // Indices of the groups containing row i, ascending.
  std::span<const Eigen::Index> groups_of(Eigen::Index i) const {
    const auto r = static_cast<std::size_t>(i);
    return {row_groups_.data() + row_offsets_.at(r), row_offsets_.at(r + 1) - row_offsets_[r]};
  }
  // Smallest and largest score within group j.
  std::pair<double, double> score_range(Eigen::Index j) const { return ranges_.at(static_cast<std::size_t>(j)); }

 private:
  Eigen::VectorXd scores_;
  std::vector<Mask> masks_;
  double theta_ = 0.0;
  std::vector<std::size_t> sizes_;
  std::vector<std::string> ids_;
  std::vector<std::size_t> row_offsets_;
  std::vector<Eigen::Index> row_groups_;
  std::vector<std::pair<double, double>> ranges_;

  void build_index();
};

Eigen::VectorXd compute_scores(const AuditDataset& data, const MetricSpec& metric);
Mask clause_mask(const AuditDataset& data, const Clause& clause);
Mask group_mask(const AuditDataset& data, const GroupSpec& group);
double estimate_target(const AuditDataset& data, const TargetSpec& target, const Eigen::VectorXd& scores);
double epsilon_hat(const Eigen::VectorXd& scores, const Mask& mask, double theta);
Eigen::VectorXd epsilon_hat(const EstimatingSystem& sys);
Eigen::MatrixXd build_estimating_matrix(const EstimatingSystem& sys, const Eigen::VectorXd& eps);

EstimatingSystem build_system(const AuditDataset& data, const MetricSpec& metric,
                              std::span<const GroupSpec> groups, const TargetSpec& target);

}  // namespace elaudit
