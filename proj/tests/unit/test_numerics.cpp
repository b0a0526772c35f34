#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "elaudit/error.hpp"
#include "elaudit/numerics.hpp"
#include "oracles.hpp"

using namespace elaudit;

TEST(Chi2Cdf, KnownValues) {
  EXPECT_EQ(chi2_cdf(0.0, 1), 0.0);
  EXPECT_NEAR(chi2_cdf(3.841459, 1), 0.9500000053468042, 1e-12);
  EXPECT_EQ(chi2_cdf(INFINITY, 5), 1.0);
  EXPECT_NEAR(chi2_cdf(1e6, 5), 1.0, 1e-15);
}

// Reference values from 40-digit evaluation of the regularized incomplete gamma.
TEST(Chi2Cdf, HighPrecisionTable) {
  struct Row {
    double x;
    int df;
    double p;
  };
  const Row rows[] = {
      {0.5, 1, 0.5204998778130465376827467},   {1, 1, 0.6826894921370858971704651},
      {2, 3, 0.4275932955291201660009524},     {10, 5, 0.9247647538534878212779231},
      {25, 10, 0.994654494512865935700672},    {0.01, 20, 2.678939970347234993368511e-30},
      {40, 20, 0.9950045876916924128338107},   {100, 3, 0.9999999999999999999984458},
      {1e-6, 1, 0.0007978844278221251511277625}, {7.5, 4, 0.8882907071839567358782819},
  };
  for (const auto& r : rows) EXPECT_NEAR(chi2_cdf(r.x, r.df), r.p, 1e-12) << r.x << " df=" << r.df;
}

TEST(Chi2Cdf, MatchesBoostGammaP) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0.0, 80.0);
  for (int i = 0; i < 5000; ++i) {
    const int df = 1 + static_cast<int>(rng() % 30);
    const double x = ux(rng);
    EXPECT_NEAR(chi2_cdf(x, df), boost::math::gamma_p(0.5 * df, 0.5 * x), 1e-12);
  }
}

TEST(Chi2Cdf, NondecreasingOnRandomGrids) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 60.0);
  for (int df = 1; df <= 12; ++df) {
    std::vector<double> xs(400);
    for (auto& x : xs) x = ux(rng);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 1; i < xs.size(); ++i) EXPECT_LE(chi2_cdf(xs[i - 1], df), chi2_cdf(xs[i], df));
  }
}

TEST(Chi2Cdf, DomainErrors) {
  EXPECT_THROW(chi2_cdf(-1.0, 1), Error);
  EXPECT_THROW(chi2_cdf(1.0, 0), Error);
  EXPECT_THROW(chi2_cdf(NAN, 2), Error);
}

TEST(Chi2Quantile, KnownValues) {
  EXPECT_NEAR(chi2_quantile(0.95, 1), 3.841458820694126, 1e-9);
  EXPECT_NEAR(chi2_quantile(0.90, 1), 2.705543454095415, 1e-9);
  EXPECT_NEAR(chi2_quantile(0.5, 2), 2.0 * std::log(2.0), 1e-9);
}

TEST(Chi2Quantile, RoundTrip) {
  for (int df = 1; df <= 20; ++df) {
    for (int k = 1; k <= 99; ++k) {
      const double p = k / 100.0;
      EXPECT_NEAR(chi2_cdf(chi2_quantile(p, df), df), p, 1e-9);
    }
  }
}

TEST(Chi2Quantile, DomainErrors) {
  EXPECT_THROW(chi2_quantile(0.0, 1), Error);
  EXPECT_THROW(chi2_quantile(1.0, 1), Error);
  EXPECT_THROW(chi2_quantile(0.5, 0), Error);
}

TEST(HalfMixture, Values) {
  EXPECT_EQ(half_mixture_sf(0.0), 1.0);
  EXPECT_NEAR(half_mixture_sf(3.841459), 0.02499999732659788, 1e-12);
  EXPECT_NEAR(half_mixture_sf(2.705543), 0.05000001423635146, 1e-12);
  EXPECT_THROW(half_mixture_sf(-0.1), Error);
}

TEST(HalfMixture, ExactlyHalfComplement) {
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> ex(0.3);
  for (int i = 0; i < 2000; ++i) {
    const double t = ex(rng) + 1e-12;
    EXPECT_EQ(half_mixture_sf(t), 0.5 * (1.0 - chi2_cdf(t, 1)));
  }
}

TEST(NormalCdf, Values) {
  EXPECT_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.644854), 0.9500000384745869, 1e-12);
  EXPECT_NEAR(normal_cdf(-1.644854), 0.0499999615254131, 1e-12);
  EXPECT_NEAR(normal_cdf(-5), 2.866515718791939e-7, 1e-12);
  EXPECT_NEAR(normal_cdf(-1.96), 0.02499789514822044, 1e-12);
  EXPECT_NEAR(normal_cdf(2.5), 0.9937903346742239, 1e-12);
}

TEST(DistributionRef, UpperTails) {
  EXPECT_NEAR(DistributionRef::chi_square(1).sf(3.841459), 0.05, 1e-8);
  EXPECT_EQ(DistributionRef::chi_square(2).sf(INFINITY), 0.0);
  EXPECT_EQ(DistributionRef::half_mixture().sf(0.0), 1.0);
  EXPECT_NEAR(DistributionRef::standard_normal().sf(1.644854), 0.05, 1e-7);
  EXPECT_THROW(DistributionRef::chi_square(0), Error);
}

TEST(SolveLagrange, ZeroMeanGivesZeroMultiplier) {
  Eigen::MatrixXd g(4, 2);
  g << 1, -2, -1, 2, 2, 1, -2, -1;
  const auto sol = solve_lagrange(g);
  ASSERT_TRUE(sol.feasible);
  EXPECT_NEAR(sol.lambda.norm(), 0.0, 1e-14);
}

TEST(SolveLagrange, TwoPointClosedForm) {
  Eigen::MatrixXd g(2, 1);
  g << -0.25, 0.75;
  const auto sol = solve_lagrange(g);
  ASSERT_TRUE(sol.feasible);
  EXPECT_NEAR(sol.lambda[0], 4.0 / 3.0, 1e-10);
  EXPECT_NEAR(sol.lambda[0], oracle::bisect_lambda({-0.25, 0.75}), 1e-10);
}

TEST(SolveLagrange, SingleSignedIsInfeasible) {
  Eigen::MatrixXd g(2, 1);
  g << 0.2, 0.7;
  EXPECT_FALSE(solve_lagrange(g).feasible);
  Eigen::MatrixXd h(3, 1);
  h << 0.0, 0.0, 1.0;  // zero on the hull boundary
  EXPECT_FALSE(solve_lagrange(h).feasible);
}

TEST(SolveLagrange, InfeasibleWithoutSingleSignedColumn) {
  // Zero lies outside the hull even though each column has both signs.
  Eigen::MatrixXd g(3, 2);
  g << 1, 1, 2, -1, -1, 2;
  EXPECT_FALSE(solve_lagrange(g).feasible);
}

TEST(SolveLagrange, RejectsNonFinite) {
  Eigen::MatrixXd g(2, 1);
  g << NAN, 1.0;
  EXPECT_THROW(solve_lagrange(g), Error);
}

TEST(SolveLagrange, AgreesWithBisection1D) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd(0.3, 1.0);
  for (int t = 0; t < 300; ++t) {
    const int n = 3 + static_cast<int>(rng() % 40);
    std::vector<double> v(n);
    for (auto& x : v) x = nd(rng);
    if (*std::min_element(v.begin(), v.end()) >= 0 || *std::max_element(v.begin(), v.end()) <= 0) continue;
    const auto sol = solve_lagrange(Eigen::Map<Eigen::MatrixXd>(v.data(), n, 1));
    ASSERT_TRUE(sol.feasible);
    EXPECT_NEAR(sol.lambda[0], oracle::bisect_lambda(v), 1e-8);
  }
}

TEST(SolveLagrange, FeasibleWeightsFormDistribution) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int n = 20 + static_cast<int>(rng() % 80);
    const int m = 1 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd g(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) g(i, j) = nd(rng) + 0.2 * j;
    }
    const auto sol = solve_lagrange(g);
    if (!sol.feasible) continue;
    const Eigen::VectorXd z = (g * sol.lambda).array() + 1.0;
    ASSERT_GT(z.minCoeff(), 0.0);
    const Eigen::VectorXd p = (z.array() * n).inverse();
    EXPECT_NEAR(p.sum(), 1.0, 1e-10);
    EXPECT_LE(sol.residual_norm, 1e-10);
  }
}

TEST(SolveLagrange, ScoreDecreasingIn1D) {
  const std::vector<double> v{-1.0, -0.2, 0.5, 1.3, 2.0};
  auto score = [&](double l) {
    double s = 0;
    for (double x : v) s += x / (1 + l * x);
    return s / v.size();
  };
  double prev = score(-0.49);
  for (double l = -0.48; l < 0.99; l += 0.01) {
    const double cur = score(l);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}
