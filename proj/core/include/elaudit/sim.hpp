#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "elaudit/audit.hpp"
#include "elaudit/baseline.hpp"
#include "elaudit/dataset.hpp"
#include "elaudit/disparity.hpp"

namespace elaudit {

enum class ModelKind { Homoskedastic1, Heteroskedastic2, LocationShift3 };
enum class NoiseKind { Gaussian, CenteredExponential };

struct ModelSpec {
  ModelKind kind = ModelKind::Homoskedastic1;
  std::size_t n = 2000;
  std::size_t m = 1;
  double beta0 = 2.0;
  double tau = 0.0;  // LocationShift3 only
  NoiseKind noise = NoiseKind::Gaussian;
  std::uint64_t seed = 0;
};

struct GeneratedSample {
  AuditDataset data;
  Eigen::VectorXd true_eps;
  double theta = 0.0;
  MetricSpec metric;
  std::vector<GroupSpec> groups;
  TargetSpec target;

  EstimatingSystem system() const;
};

// Models 1-2 fit f(x) = beta x through the origin on a fresh training sample of size n.
GeneratedSample generate(const ModelSpec& model);

// Groups [(j-1)/m, j/m) on column x.
std::vector<GroupSpec> bin_groups(std::size_t m, const std::string& column = "x");

struct RunOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  BootstrapConfig bootstrap{};
  bool intervals = false;  // m = 1 only: record per-replication two-sided intervals
};

struct SimSummary {
  std::size_t replications = 0;
  std::size_t errors = 0;
  double estimate = 0.0;
  double mc_se = 0.0;
  double wall_time = 0.0;  // seconds
  std::optional<Interval> median_interval;  // interval of median length across replications
};

enum class CoverageMethod { EL, EEL, Bootstrap };

SimSummary run_coverage(const ModelSpec& model, CoverageMethod method, double alpha, std::size_t reps,
                        const RunOptions& options = {});

struct QQResult {
  std::vector<double> statistics;  // sorted
  std::vector<double> reference_quantiles;
  double ks_distance = 0.0;
  std::size_t errors = 0;
};

QQResult run_qq(const ModelSpec& model, std::size_t reps, Method method = Method::EL, const RunOptions& options = {});

// Kolmogorov-Smirnov distance between a sorted sample and chi2(df).
double ks_distance_chi2(const std::vector<double>& sorted, int df);

struct PowerConfig {
  std::size_t n = 2000;
  std::size_t m = 1;
  std::size_t reps = 2000;
  HypothesisSpec hypothesis = HypothesisSpec::point(0.0);
  double alpha = 0.05;
  std::vector<double> taus;  // empty = default grid
  NoiseKind noise = NoiseKind::Gaussian;
  std::uint64_t seed = 0;
};

struct PowerPoint {
  double tau = 0.0;
  double true_eps = 0.0;
  double el_rate = 0.0;
  double el_se = 0.0;
  double t_rate = 0.0;
  double t_se = 0.0;
  std::size_t errors = 0;
};

// 41 equally spaced points 0.3 beyond the null region on both sides.
std::vector<double> default_tau_grid(const HypothesisSpec& h);

// Rejection frequencies of the first group's EL test and a Student t comparator.
std::vector<PowerPoint> run_power(const PowerConfig& cfg, const RunOptions& options = {});

struct LocalPowerResult {
  double local_tau = 0.0;
  double model_tau = 0.0;
  double empirical = 0.0;
  double mc_se = 0.0;
  double predicted = 0.0;
  std::size_t errors = 0;
};

// At-least test at eps0 with the truth at eps0 - t * sigma / sqrt(n), one group covering all rows.
LocalPowerResult run_local_power(std::size_t n, double local_tau, double eps0, double alpha, std::size_t reps,
                                 std::uint64_t seed, const RunOptions& options = {});

struct FdrConfig {
  std::size_t n = 800;
  std::size_t m = 2;
  double eps0 = 0.05;
  double alpha = 0.05;
  std::size_t reps = 2000;
  std::vector<double> taus;  // empty = -0.15 to 0.60 by 0.05
  NoiseKind noise = NoiseKind::Gaussian;
  std::uint64_t seed = 0;
};

struct FdrRow {
  double tau = 0.0;
  Eigen::VectorXd true_eps;
  double fdr = 0.0;
  double fdr_se = 0.0;
  double power = 0.0;
  double power_se = 0.0;
  std::size_t errors = 0;
};

std::vector<double> default_fdr_taus();

// ELBH over at-most tests; a hypothesis is false when its true disparity exceeds eps0.
std::vector<FdrRow> run_fdr(const FdrConfig& cfg, const RunOptions& options = {});

struct RuntimeRow {
  std::string method;
  std::size_t evaluations = 0;
  double seconds = 0.0;
};

// Times certification on pre-generated samples, excluding data generation.
std::vector<RuntimeRow> run_runtime(const ModelSpec& model, std::size_t reps, double alpha,
                                    const BootstrapConfig& bootstrap = {});

// Calls body(r) for r in [0, count) across worker threads.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace elaudit
