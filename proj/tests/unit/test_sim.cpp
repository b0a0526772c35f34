#include <gtest/gtest.h>

#include <sstream>

#include "elaudit/elcore.hpp"
#include "elaudit/rng.hpp"
#include "elaudit/sim.hpp"

using namespace elaudit;

TEST(Rng, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 7), derive_seed(5, 7));
}

TEST(Rng, UniformIndexInRangeAndBalanced) {
  Engine rng = make_stream(3, 0);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = uniform_index(rng, 7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Generate, TrueDisparities) {
  ModelSpec m3;
  m3.kind = ModelKind::LocationShift3;
  m3.tau = 0.2;
  m3.n = 100;
  EXPECT_DOUBLE_EQ(generate(m3).true_eps[0], 0.2);
  m3.m = 2;
  const auto two = generate(m3).true_eps;
  EXPECT_DOUBLE_EQ(two[0], 0.1);
  EXPECT_DOUBLE_EQ(two[1], 0.30000000000000004);
  ModelSpec m2;
  m2.kind = ModelKind::Heteroskedastic2;
  m2.m = 4;
  m2.n = 100;
  const auto h = generate(m2).true_eps;
  EXPECT_DOUBLE_EQ(h[0], 0.125);
  EXPECT_DOUBLE_EQ(h[3], 0.875);
}

TEST(Generate, Model1GroupMeansNearOne) {
  ModelSpec m;
  m.n = 200000;
  m.m = 4;
  m.seed = 1;
  const auto s = generate(m);
  const auto sys = s.system();
  const auto eh = epsilon_hat(sys);
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(eh[j], 1.0, 0.03);
  EXPECT_EQ(s.true_eps, Eigen::VectorXd::Ones(4));
}

TEST(Generate, Model3EstimateNearTau) {
  ModelSpec m;
  m.kind = ModelKind::LocationShift3;
  m.n = 200000;
  m.tau = 0.3;
  m.noise = NoiseKind::CenteredExponential;
  const auto sys = generate(m).system();
  EXPECT_NEAR(epsilon_hat(sys)[0], 0.3, 0.015);
}

TEST(Generate, SameSeedSameBytes) {
  ModelSpec m;
  m.n = 500;
  m.m = 3;
  m.seed = 77;
  std::ostringstream a;
  std::ostringstream b;
  write_dataset(a, generate(m).data);
  write_dataset(b, generate(m).data);
  EXPECT_EQ(a.str(), b.str());
  m.seed = 78;
  std::ostringstream c;
  write_dataset(c, generate(m).data);
  EXPECT_NE(a.str(), c.str());
}

TEST(Generate, RejectsTooFewRows) {
  ModelSpec m;
  m.n = 5;
  m.m = 3;
  EXPECT_THROW(generate(m), std::exception);
}

TEST(Coverage, InvariantToWorkerCount) {
  ModelSpec m;
  m.n = 400;
  m.m = 2;
  m.seed = 5;
  RunOptions one;
  one.threads = 1;
  RunOptions four;
  four.threads = 4;
  const auto a = run_coverage(m, CoverageMethod::EL, 0.05, 120, one);
  const auto b = run_coverage(m, CoverageMethod::EL, 0.05, 120, four);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.replications, 120u);
  EXPECT_NEAR(a.mc_se, std::sqrt(a.estimate * (1 - a.estimate) / 120.0), 1e-15);
}

TEST(Coverage, MedianIntervalReported) {
  ModelSpec m;
  m.n = 300;
  RunOptions opt;
  opt.intervals = true;
  const auto s = run_coverage(m, CoverageMethod::EL, 0.05, 101, opt);
  ASSERT_TRUE(s.median_interval.has_value());
  EXPECT_LT(s.median_interval->lo, 1.0 + 0.5);
  EXPECT_GT(s.median_interval->hi, 1.0 - 0.5);
}

TEST(QQ, SortedWithMatchingQuantiles) {
  ModelSpec m;
  m.n = 500;
  const auto q = run_qq(m, 200);
  ASSERT_EQ(q.statistics.size(), 200u);
  EXPECT_TRUE(std::is_sorted(q.statistics.begin(), q.statistics.end()));
  EXPECT_TRUE(std::is_sorted(q.reference_quantiles.begin(), q.reference_quantiles.end()));
  EXPECT_NEAR(q.reference_quantiles[100], chi2_quantile(100.5 / 200, 1), 1e-12);
}

TEST(QQ, KsDistanceOfExactQuantilesIsSmall) {
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(chi2_quantile((i + 0.5) / 1000.0, 3));
  EXPECT_NEAR(ks_distance_chi2(xs, 3), 0.0005, 1e-9);
}

TEST(Power, GridAndComparator) {
  const auto grid = default_tau_grid(HypothesisSpec::interval(-0.05, 0.05));
  ASSERT_EQ(grid.size(), 41u);
  EXPECT_DOUBLE_EQ(grid.front(), -0.35);
  EXPECT_DOUBLE_EQ(grid.back(), 0.35);
  PowerConfig cfg;
  cfg.n = 500;
  cfg.reps = 200;
  cfg.hypothesis = HypothesisSpec::at_least(0.05);
  cfg.taus = {-0.5, 0.3};
  const auto pts = run_power(cfg);
  EXPECT_GT(pts[0].el_rate, 0.99);
  EXPECT_GT(pts[0].t_rate, 0.99);
  EXPECT_LT(pts[1].el_rate, 0.01);
}

TEST(Fdr, NoFalseNullsMeansZeroPower) {
  FdrConfig cfg;
  cfg.reps = 100;
  cfg.taus = {-0.1, 0.0, 0.5};
  const auto rows = run_fdr(cfg);
  EXPECT_EQ(rows[0].power, 0.0);
  EXPECT_EQ(rows[1].power, 0.0);
  EXPECT_GT(rows[2].power, 0.9);
  EXPECT_EQ(rows[2].fdr, 0.0);
}

TEST(Runtime, ReportsAllMethods) {
  ModelSpec m;
  m.n = 400;
  m.m = 2;
  BootstrapConfig b;
  b.B = 100;
  const auto rows = run_runtime(m, 3, 0.05, b);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].method, "EL");
  EXPECT_EQ(rows[1].method, "EEL");
  EXPECT_EQ(rows[2].method, "Bootstrap");
}
