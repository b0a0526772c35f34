#include "elaudit/disparity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "elaudit/error.hpp"

namespace elaudit {
namespace {

double parse_literal(const Clause& clause, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || std::isnan(v)) {
    throw Error(ErrorCode::TypeMismatch,
                "column '" + clause.column + "' is numeric but literal '" + text + "' is not a number");
  }
  return v;
}

template <class T>
bool compare(Clause::Op op, const T& lhs, const T& rhs) {
  switch (op) {
    case Clause::Op::Eq: return lhs == rhs;
    case Clause::Op::Ne: return lhs != rhs;
    case Clause::Op::Lt: return lhs < rhs;
    case Clause::Op::Le: return lhs <= rhs;
    case Clause::Op::Gt: return lhs > rhs;
    case Clause::Op::Ge: return lhs >= rhs;
    case Clause::Op::InSet: break;
  }
  return false;
}

std::size_t count(const Mask& mask) { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }

}  // namespace

EstimatingSystem EstimatingSystem::create(Eigen::VectorXd scores, std::vector<Mask> masks, double theta,
                                          std::vector<std::string> ids) {
  if (scores.size() < 1) throw Error(ErrorCode::Domain, "estimating system needs at least one row");
  if (masks.empty()) throw Error(ErrorCode::Domain, "estimating system needs at least one group");
  if (!scores.allFinite() || !std::isfinite(theta)) throw Error(ErrorCode::Domain, "scores and theta must be finite");
  if (!ids.empty() && ids.size() != masks.size()) {
    throw Error(ErrorCode::DimensionMismatch, "group id count differs from mask count");
  }
  EstimatingSystem sys;
  sys.sizes_.reserve(masks.size());
  for (std::size_t j = 0; j < masks.size(); ++j) {
    if (static_cast<Eigen::Index>(masks[j].size()) != scores.size()) {
      throw Error(ErrorCode::DimensionMismatch, "mask length differs from score length");
    }
    const std::size_t c = count(masks[j]);
    if (c == 0) {
      throw Error(ErrorCode::EmptyGroup,
                  "group '" + (ids.empty() ? std::to_string(j) : ids[j]) + "' matches no rows");
    }
    sys.sizes_.push_back(c);
  }
  sys.scores_ = std::move(scores);
  sys.masks_ = std::move(masks);
  sys.theta_ = theta;
  sys.ids_ = std::move(ids);
  sys.build_index();
  return sys;
}

void EstimatingSystem::build_index() {
  const auto rows = static_cast<std::size_t>(n());
  row_offsets_.assign(rows + 1, 0);
  row_groups_.clear();
  row_groups_.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < masks_.size(); ++j) {
      if (masks_[j][i]) row_groups_.push_back(static_cast<Eigen::Index>(j));
    }
    row_offsets_[i + 1] = row_groups_.size();
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  ranges_.assign(masks_.size(), {inf, -inf});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      auto& [lo, hi] = ranges_[static_cast<std::size_t>(row_groups_[p])];
      lo = std::min(lo, scores_[static_cast<Eigen::Index>(i)]);
      hi = std::max(hi, scores_[static_cast<Eigen::Index>(i)]);
    }
  }
}

std::string EstimatingSystem::id(Eigen::Index j) const {
  if (ids_.empty()) return "G" + std::to_string(j + 1);
  return ids_.at(static_cast<std::size_t>(j));
}

EstimatingSystem EstimatingSystem::single(Eigen::Index j) const {
  EstimatingSystem sys;
  sys.scores_ = scores_;
  sys.masks_ = {mask(j)};
  sys.theta_ = theta_;
  sys.sizes_ = {group_size(j)};
  sys.ids_ = {id(j)};
  sys.build_index();
  return sys;
}

EstimatingSystem EstimatingSystem::with_theta(double theta) const {
  EstimatingSystem sys = *this;
  sys.theta_ = theta;
  return sys;
}

bool EstimatingSystem::has_overlap() const {
  for (Eigen::Index i = 0; i < n(); ++i) {
    if (groups_of(i).size() > 1) return true;
  }
  return false;
}

Eigen::VectorXd compute_scores(const AuditDataset& data, const MetricSpec& metric) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  Eigen::VectorXd out(n);
  switch (metric.kind) {
    case MetricSpec::Kind::Column:
    case MetricSpec::Kind::OutcomeColumn: {
      const auto v = data.numeric(metric.column);
      for (Eigen::Index i = 0; i < n; ++i) out[i] = v[static_cast<std::size_t>(i)];
      break;
    }
    case MetricSpec::Kind::SquaredError:
    case MetricSpec::Kind::Residual: {
      const auto f = data.numeric(metric.column);
      const auto y = data.numeric(metric.outcome);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = y[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(i)];
        out[i] = metric.kind == MetricSpec::Kind::Residual ? r : r * r;
      }
      break;
    }
    case MetricSpec::Kind::PositiveIndicator: {
      const auto f = data.numeric(metric.column);
      for (Eigen::Index i = 0; i < n; ++i) out[i] = f[static_cast<std::size_t>(i)] >= metric.threshold ? 1.0 : 0.0;
      break;
    }
  }
  return out;
}

Mask clause_mask(const AuditDataset& data, const Clause& clause) {
  const Column& col = data.column(clause.column);
  if (clause.literals.empty()) throw Error(ErrorCode::Config, "clause on '" + clause.column + "' has no literal");
  if (clause.op != Clause::Op::InSet && clause.literals.size() != 1) {
    throw Error(ErrorCode::Config, "clause on '" + clause.column + "' takes exactly one literal");
  }
  Mask out(data.rows(), 0);
  if (col.is_numeric()) {
    const auto& v = std::get<std::vector<double>>(col.values);
    std::vector<double> lits;
    for (const auto& t : clause.literals) lits.push_back(parse_literal(clause, t));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (clause.op == Clause::Op::InSet) {
        out[i] = std::find(lits.begin(), lits.end(), v[i]) != lits.end();
      } else {
        out[i] = compare(clause.op, v[i], lits.front());
      }
    }
  } else {
    if (clause.op != Clause::Op::Eq && clause.op != Clause::Op::Ne && clause.op != Clause::Op::InSet) {
      throw Error(ErrorCode::TypeMismatch, "ordering comparison on categorical column '" + clause.column + "'");
    }
    const auto& v = std::get<std::vector<std::string>>(col.values);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (clause.op == Clause::Op::InSet) {
        out[i] = std::find(clause.literals.begin(), clause.literals.end(), v[i]) != clause.literals.end();
      } else {
        out[i] = compare(clause.op, v[i], clause.literals.front());
      }
    }
  }
  return out;
}

Mask group_mask(const AuditDataset& data, const GroupSpec& group) {
  Mask out(data.rows(), 1);
  for (const auto& clause : group.predicate) {
    const Mask m = clause_mask(data, clause);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] & m[i];
  }
  return out;
}

double epsilon_hat(const Eigen::VectorXd& scores, const Mask& mask, double theta) {
  if (static_cast<Eigen::Index>(mask.size()) != scores.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mask length differs from score length");
  }
  double sum = 0.0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      sum += scores[static_cast<Eigen::Index>(i)];
      ++c;
    }
  }
  if (c == 0) throw Error(ErrorCode::EmptyGroup, "group matches no rows");
  return sum / static_cast<double>(c) - theta;
}

Eigen::VectorXd epsilon_hat(const EstimatingSystem& sys) {
  Eigen::VectorXd out(sys.m());
  for (Eigen::Index j = 0; j < sys.m(); ++j) out[j] = epsilon_hat(sys.scores(), sys.mask(j), sys.theta());
  return out;
}

double estimate_target(const AuditDataset& data, const TargetSpec& target, const Eigen::VectorXd& scores) {
  switch (target.kind) {
    case TargetSpec::Kind::Known:
      return target.theta;
    case TargetSpec::Kind::PopulationMean:
      return scores.mean();
    case TargetSpec::Kind::ReferenceGroup: {
      if (!target.group) throw Error(ErrorCode::Config, "reference-group target without a group");
      const Mask m = group_mask(data, *target.group);
      if (std::find(m.begin(), m.end(), 1) == m.end()) {
        throw Error(ErrorCode::EmptyGroup, "reference group '" + target.group->id + "' matches no rows");
      }
      return epsilon_hat(scores, m, 0.0);
    }
  }
  return 0.0;
}

Eigen::MatrixXd build_estimating_matrix(const EstimatingSystem& sys, const Eigen::VectorXd& eps) {
  if (eps.size() != sys.m()) {
    throw Error(ErrorCode::DimensionMismatch,
                "eps has length " + std::to_string(eps.size()) + ", expected " + std::to_string(sys.m()));
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(sys.n(), sys.m());
  const auto& s = sys.scores();
  for (Eigen::Index j = 0; j < sys.m(); ++j) {
    const Mask& mk = sys.mask(j);
    const double shift = sys.theta() + eps[j];
    for (Eigen::Index i = 0; i < sys.n(); ++i) {
      if (mk[static_cast<std::size_t>(i)]) g(i, j) = s[i] - shift;
    }
  }
  return g;
}

EstimatingSystem build_system(const AuditDataset& data, const MetricSpec& metric,
                              std::span<const GroupSpec> groups, const TargetSpec& target) {
  Eigen::VectorXd scores = compute_scores(data, metric);
  std::vector<Mask> masks;
  std::vector<std::string> ids;
  for (const auto& g : groups) {
    masks.push_back(group_mask(data, g));
    ids.push_back(g.id);
  }
  const double theta = estimate_target(data, target, scores);
  return EstimatingSystem::create(std::move(scores), std::move(masks), theta, std::move(ids));
}

}  // namespace elaudit
