#include <gtest/gtest.h>

#include <random>

#include "elaudit/disparity.hpp"
#include "elaudit/error.hpp"

using namespace elaudit;

namespace {

AuditDataset toy() {
  return AuditDataset::from_columns({
      {"y", std::vector<double>{1, 2, 3}},
      {"f", std::vector<double>{1, 1, 1}},
      {"score", std::vector<double>{4, 5, 10}},
      {"age", std::vector<double>{20, 30, 22}},
      {"race", std::vector<std::string>{"AA", "Hispanic", "Caucasian"}},
      {"sex", std::vector<std::string>{"M", "F", "M"}},
  });
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(ComputeScores, Metrics) {
  const auto d = toy();
  EXPECT_EQ(compute_scores(d, MetricSpec::residual("f", "y")), vec({0, 1, 2}));
  EXPECT_EQ(compute_scores(d, MetricSpec::squared_error("f", "y")), vec({0, 1, 4}));
  EXPECT_EQ(compute_scores(d, MetricSpec::positive_indicator("score", 5)), vec({0, 1, 1}));
  EXPECT_EQ(compute_scores(d, MetricSpec::of_column("age")), vec({20, 30, 22}));
  EXPECT_THROW(compute_scores(d, MetricSpec::of_column("race")), Error);
  EXPECT_THROW(compute_scores(d, MetricSpec::of_column("nope")), Error);
}

TEST(GroupMask, Clauses) {
  const auto d = toy();
  EXPECT_EQ(group_mask(d, {"young", {{"age", Clause::Op::Lt, {"25"}}}}), (Mask{1, 0, 1}));
  EXPECT_EQ(group_mask(d, {"s", {{"race", Clause::Op::InSet, {"AA", "Caucasian"}}}}), (Mask{1, 0, 1}));
  EXPECT_EQ(group_mask(d, {"ne", {{"sex", Clause::Op::Ne, {"M"}}}}), (Mask{0, 1, 0}));
  EXPECT_EQ(group_mask(d, {"ge", {{"age", Clause::Op::Ge, {"22"}}}}), (Mask{0, 1, 1}));
  EXPECT_EQ(group_mask(d, {"all", {}}), (Mask{1, 1, 1}));
}

TEST(GroupMask, ConjunctionIsElementwiseAnd) {
  const auto d = toy();
  const Clause a{"race", Clause::Op::Eq, {"AA"}};
  const Clause b{"sex", Clause::Op::Eq, {"M"}};
  const Mask ma = clause_mask(d, a);
  const Mask mb = clause_mask(d, b);
  const Mask both = group_mask(d, {"g", {a, b}});
  for (std::size_t i = 0; i < both.size(); ++i) EXPECT_EQ(both[i], ma[i] & mb[i]);
}

TEST(GroupMask, TypeErrors) {
  const auto d = toy();
  EXPECT_THROW(group_mask(d, {"g", {{"race", Clause::Op::Lt, {"AA"}}}}), Error);
  EXPECT_THROW(group_mask(d, {"g", {{"age", Clause::Op::Eq, {"old"}}}}), Error);
  EXPECT_THROW(group_mask(d, {"g", {{"missing", Clause::Op::Eq, {"1"}}}}), Error);
}

TEST(EstimateTarget, Kinds) {
  const auto d = toy();
  const Eigen::VectorXd s = vec({1, 2, 3});
  EXPECT_EQ(estimate_target(d, TargetSpec::known(0.0), s), 0.0);
  EXPECT_EQ(estimate_target(d, TargetSpec::population_mean(), s), 2.0);
  EXPECT_EQ(estimate_target(d, TargetSpec::reference_group({"m", {{"sex", Clause::Op::Eq, {"M"}}}}), s), 2.0);
  EXPECT_THROW(estimate_target(d, TargetSpec::reference_group({"z", {{"sex", Clause::Op::Eq, {"X"}}}}), s), Error);
}

TEST(EpsilonHat, Values) {
  const Eigen::VectorXd s = vec({1, 2, 3});
  EXPECT_EQ(epsilon_hat(s, Mask{1, 1, 1}, 0.0), 2.0);
  EXPECT_EQ(epsilon_hat(s, Mask{1, 1, 0}, 1.0), 0.5);
  EXPECT_THROW(epsilon_hat(s, Mask{0, 0, 0}, 0.0), Error);
}

TEST(EstimatingSystem, EmptyGroupNamed) {
  try {
    EstimatingSystem::create(vec({1, 2}), {Mask{1, 0}, Mask{0, 0}}, 0.0, {"a", "ghost"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGroup);
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(EstimatingMatrix, TwoPointFixture) {
  const auto sys = EstimatingSystem::create(vec({1, 0}), {Mask{1, 1}}, 0.0);
  EXPECT_EQ(build_estimating_matrix(sys, vec({0.25})).col(0), vec({0.75, -0.25}));
  EXPECT_THROW(build_estimating_matrix(sys, vec({0.1, 0.2})), Error);
}

TEST(EstimatingMatrix, DisjointGroupsHaveOneNonzeroPerRow) {
  const auto sys = EstimatingSystem::create(vec({1, 2, 3, 4}), {Mask{1, 1, 0, 0}, Mask{0, 0, 1, 1}}, 0.5);
  const auto g = build_estimating_matrix(sys, vec({0.1, -0.2}));
  for (Eigen::Index i = 0; i < g.rows(); ++i) EXPECT_LE((g.row(i).array() != 0.0).count(), 1);
  EXPECT_FALSE(sys.has_overlap());
}

class RandomSystems : public ::testing::TestWithParam<int> {};

TEST_P(RandomSystems, ColumnsSumToZeroAtEstimate) {
  std::mt19937_64 rng(GetParam());
  std::normal_distribution<double> nd(3.0, 2.0);
  const int n = 50 + GetParam();
  Eigen::VectorXd s(n);
  for (auto& x : s) x = nd(rng);
  std::vector<Mask> masks(3, Mask(n, 0));
  for (int i = 0; i < n; ++i) {
    for (auto& mk : masks) mk[i] = (rng() % 3) == 0;
    masks[0][0] = masks[1][0] = masks[2][0] = 1;
  }
  const auto sys = EstimatingSystem::create(s, masks, 0.7);
  const auto g = build_estimating_matrix(sys, epsilon_hat(sys));
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(g.col(j).sum(), 0.0, 1e-12 * n * 10);
}

TEST_P(RandomSystems, AffineInEps) {
  std::mt19937_64 rng(GetParam());
  const int n = 30;
  Eigen::VectorXd s = Eigen::VectorXd::Random(n);
  std::vector<Mask> masks(2, Mask(n, 0));
  for (int i = 0; i < n; ++i) {
    masks[0][i] = (rng() % 2) == 0;
    masks[1][i] = (rng() % 2) == 0;
  }
  masks[0][0] = masks[1][1] = 1;
  const auto sys = EstimatingSystem::create(s, masks, 0.0);
  const Eigen::VectorXd e = vec({0.1, 0.2});
  const Eigen::VectorXd e2 = vec({0.1 + 0.5, 0.2});
  const Eigen::MatrixXd diff = build_estimating_matrix(sys, e2) - build_estimating_matrix(sys, e);
  for (int i = 0; i < n; ++i) {
    EXPECT_NEAR(diff(i, 0), masks[0][i] ? -0.5 : 0.0, 1e-15);
    EXPECT_EQ(diff(i, 1), 0.0);
  }
}

TEST_P(RandomSystems, PopulationMeanIdentity) {
  std::mt19937_64 rng(GetParam());
  std::normal_distribution<double> nd(0.0, 1.0);
  const int n = 40;
  std::vector<double> y(n), g(n);
  for (int i = 0; i < n; ++i) {
    y[i] = nd(rng);
    g[i] = static_cast<double>(rng() % 2);
  }
  g[0] = 1;
  const auto d = AuditDataset::from_columns({{"y", y}, {"g", g}});
  const GroupSpec grp{"g1", {{"g", Clause::Op::Eq, {"1"}}}};
  const auto sys = build_system(d, MetricSpec::of_column("y"), std::span(&grp, 1), TargetSpec::population_mean());
  const Eigen::VectorXd s = compute_scores(d, MetricSpec::of_column("y"));
  EXPECT_NEAR(epsilon_hat(sys)[0], epsilon_hat(s, sys.mask(0), 0.0) - s.mean(), 1e-14);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomSystems, ::testing::Range(1, 11));
