#include "elaudit/sim.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "elaudit/elcore.hpp"
#include "elaudit/error.hpp"
#include "elaudit/numerics.hpp"
#include "elaudit/rng.hpp"

namespace elaudit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double proportion_se(double p, std::size_t count) {
  return count == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(count));
}

double mean_se(const std::vector<double>& v, double& mean) {
  mean = 0.0;
  if (v.empty()) return 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Outcome of one replication; nullopt marks a replication-level error.
template <class T>
using Slot = std::optional<T>;

template <class T, class F>
std::vector<Slot<T>> replicate(std::size_t reps, unsigned threads, F&& body) {
  std::vector<Slot<T>> out(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    try {
      out[r] = body(r);
    } catch (const Error&) {
      out[r] = std::nullopt;
    }
  });
  return out;
}

double sample_noise(Engine& rng, NoiseKind kind) {
  if (kind == NoiseKind::Gaussian) return std::normal_distribution<double>(0.0, 1.0)(rng);
  return std::exponential_distribution<double>(1.0)(rng) - 1.0;
}

bool t_test_rejects(const EstimatingSystem& sys, const HypothesisSpec& h, double alpha) {
  const Mask& mk = sys.mask(0);
  const double eh = epsilon_hat(sys.scores(), mk, sys.theta());
  const auto size = static_cast<double>(sys.group_size(0));
  const double mean = eh + sys.theta();
  double ss = 0.0;
  for (Eigen::Index i = 0; i < sys.n(); ++i) {
    if (mk[static_cast<std::size_t>(i)]) ss += (sys.scores()[i] - mean) * (sys.scores()[i] - mean);
  }
  const double se = std::sqrt(ss / (size - 1.0) / size);
  const boost::math::students_t dist(size - 1.0);
  const double one = boost::math::quantile(dist, 1.0 - alpha);
  switch (h.kind) {
    case HypothesisSpec::Kind::PointEquals:
      return std::abs(eh - h.eps0) / se > boost::math::quantile(dist, 1.0 - alpha / 2.0);
    case HypothesisSpec::Kind::AtLeast:
      return (eh - h.eps0) / se < -one;
    case HypothesisSpec::Kind::AtMost:
      return (eh - h.eps0) / se > one;
    case HypothesisSpec::Kind::Interval:
      return (eh - h.eps1) / se < -one || (eh - h.eps2) / se > one;
  }
  return false;
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::vector<GroupSpec> bin_groups(std::size_t m, const std::string& column) {
  std::vector<GroupSpec> groups;
  for (std::size_t j = 1; j <= m; ++j) {
    const double lo = static_cast<double>(j - 1) / static_cast<double>(m);
    const double hi = static_cast<double>(j) / static_cast<double>(m);
    GroupSpec g;
    g.id = "G" + std::to_string(j);
    g.predicate.push_back({column, Clause::Op::Ge, {format_number(lo)}});
    g.predicate.push_back({column, Clause::Op::Lt, {format_number(hi)}});
    groups.push_back(std::move(g));
  }
  return groups;
}

EstimatingSystem GeneratedSample::system() const { return build_system(data, metric, groups, target); }

GeneratedSample generate(const ModelSpec& model) {
  if (model.m < 1 || model.n < 2 * model.m) throw Error(ErrorCode::Domain, "model needs m >= 1 and n >= 2m");
  const std::size_t n = model.n;
  const auto m = static_cast<Eigen::Index>(model.m);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  GeneratedSample out{AuditDataset::from_columns({{"x", std::vector<double>{0.0}}}), Eigen::VectorXd(m), 0.0,
                      MetricSpec{}, bin_groups(model.m), TargetSpec::known(0.0)};
  std::vector<double> x(n), y(n), f(n);

  if (model.kind == ModelKind::LocationShift3) {
    Engine rng = make_stream(model.seed, 2);
    const double beta1 = model.beta0 - 2.0 * model.tau;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = unif(rng);
      y[i] = model.beta0 * x[i] + sample_noise(rng, model.noise);
      f[i] = beta1 * x[i];
    }
    out.metric = MetricSpec::residual("f", "y");
    for (Eigen::Index j = 0; j < m; ++j) {
      out.true_eps[j] = static_cast<double>(2 * j + 1) * model.tau / static_cast<double>(m);
    }
  } else {
    const bool hetero = model.kind == ModelKind::Heteroskedastic2;
    auto draw = [&](Engine& rng, double& xi, double& yi) {
      xi = unif(rng);
      const double sd = hetero ? std::sqrt(xi) : 1.0;
      yi = model.beta0 * xi + sd * normal(rng);
    };
    Engine train = make_stream(model.seed, 1);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double xi = 0.0;
      double yi = 0.0;
      draw(train, xi, yi);
      sxy += xi * yi;
      sxx += xi * xi;
    }
    const double beta_hat = sxy / sxx;
    Engine audit = make_stream(model.seed, 2);
    for (std::size_t i = 0; i < n; ++i) {
      draw(audit, x[i], y[i]);
      f[i] = beta_hat * x[i];
    }
    out.metric = MetricSpec::squared_error("f", "y");
    for (Eigen::Index j = 0; j < m; ++j) {
      out.true_eps[j] = hetero ? static_cast<double>(2 * j + 1) / static_cast<double>(2 * m) : 1.0;
    }
  }
  out.data = AuditDataset::from_columns({{"x", std::move(x)}, {"y", std::move(y)}, {"f", std::move(f)}});
  return out;
}

SimSummary run_coverage(const ModelSpec& model, CoverageMethod method, double alpha, std::size_t reps,
                        const RunOptions& options) {
  if (reps < 1) throw Error(ErrorCode::Domain, "need at least one replication");
  const bool want_ci = options.intervals && model.m == 1;
  const double z = chi2_quantile(1.0 - alpha, static_cast<int>(model.m));
  struct Rep {
    bool covered;
    std::optional<Interval> ci;
  };
  const auto start = Clock::now();
  const auto results = replicate<Rep>(reps, options.threads, [&](std::size_t r) {
    ModelSpec spec = model;
    spec.seed = derive_seed(model.seed, r);
    const GeneratedSample sample = generate(spec);
    const EstimatingSystem sys = sample.system();
    Rep rep{false, std::nullopt};
    switch (method) {
      case CoverageMethod::EL:
        rep.covered = el_log_ratio(sys, sample.true_eps).log_ratio <= z;
        break;
      case CoverageMethod::EEL:
        rep.covered = eel_log_ratio(sys, sample.true_eps).log_ratio <= z;
        break;
      case CoverageMethod::Bootstrap: {
        BootstrapConfig cfg = options.bootstrap;
        cfg.alpha = alpha;
        cfg.seed = derive_seed(spec.seed, 3);
        const BootstrapRegion region = bootstrap_region(sys, cfg);
        rep.covered = region.covers(sample.true_eps);
        if (want_ci) rep.ci = region.intervals.front();
        break;
      }
    }
    if (want_ci && method != CoverageMethod::Bootstrap) {
      rep.ci = confidence_interval(sys, 0, alpha, IntervalKind::TwoSided);
    }
    return rep;
  });

  SimSummary s;
  s.wall_time = seconds_since(start);
  std::size_t covered = 0;
  std::vector<Interval> cis;
  for (const auto& r : results) {
    if (!r) {
      ++s.errors;
      continue;
    }
    ++s.replications;
    covered += r->covered;
    if (r->ci) cis.push_back(*r->ci);
  }
  s.estimate = s.replications ? static_cast<double>(covered) / static_cast<double>(s.replications) : 0.0;
  s.mc_se = proportion_se(s.estimate, s.replications);
  if (!cis.empty()) {
    std::stable_sort(cis.begin(), cis.end(), [](const Interval& a, const Interval& b) { return a.length() < b.length(); });
    s.median_interval = cis[(cis.size() - 1) / 2];
  }
  return s;
}

double ks_distance_chi2(const std::vector<double>& sorted, int df) {
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = std::isinf(sorted[i]) ? 1.0 : chi2_cdf(sorted[i], df);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

QQResult run_qq(const ModelSpec& model, std::size_t reps, Method method, const RunOptions& options) {
  const auto results = replicate<double>(reps, options.threads, [&](std::size_t r) {
    ModelSpec spec = model;
    spec.seed = derive_seed(model.seed, r);
    const GeneratedSample sample = generate(spec);
    const EstimatingSystem sys = sample.system();
    return method == Method::EL ? el_log_ratio(sys, sample.true_eps).log_ratio
                                : eel_log_ratio(sys, sample.true_eps).log_ratio;
  });
  QQResult out;
  for (const auto& r : results) {
    if (r) {
      out.statistics.push_back(*r);
    } else {
      ++out.errors;
    }
  }
  std::sort(out.statistics.begin(), out.statistics.end());
  const auto k = out.statistics.size();
  const int df = static_cast<int>(model.m);
  for (std::size_t i = 0; i < k; ++i) {
    out.reference_quantiles.push_back(chi2_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(k), df));
  }
  out.ks_distance = ks_distance_chi2(out.statistics, df);
  return out;
}

std::vector<double> default_tau_grid(const HypothesisSpec& h) {
  double lo = h.eps0 - 0.3;
  double hi = h.eps0 + 0.3;
  if (h.kind == HypothesisSpec::Kind::Interval) {
    lo = h.eps1 - 0.3;
    hi = h.eps2 + 0.3;
  }
  std::vector<double> grid(41);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / 40.0;
  return grid;
}

std::vector<PowerPoint> run_power(const PowerConfig& cfg, const RunOptions& options) {
  const std::vector<double> taus = cfg.taus.empty() ? default_tau_grid(cfg.hypothesis) : cfg.taus;
  std::vector<PowerPoint> out;
  for (double tau : taus) {
    ModelSpec model;
    model.kind = ModelKind::LocationShift3;
    model.n = cfg.n;
    model.m = cfg.m;
    model.tau = tau;
    model.noise = cfg.noise;
    struct Rep {
      bool el;
      bool t;
    };
    const auto results = replicate<Rep>(cfg.reps, options.threads, [&](std::size_t r) {
      ModelSpec spec = model;
      spec.seed = derive_seed(cfg.seed, r);
      const EstimatingSystem sys = generate(spec).system();
      return Rep{test_hypothesis(sys, 0, cfg.hypothesis, cfg.alpha).reject, t_test_rejects(sys, cfg.hypothesis, cfg.alpha)};
    });
    PowerPoint p;
    p.tau = tau;
    p.true_eps = tau / static_cast<double>(cfg.m);
    std::size_t ok = 0;
    std::size_t el = 0;
    std::size_t t = 0;
    for (const auto& r : results) {
      if (!r) {
        ++p.errors;
        continue;
      }
      ++ok;
      el += r->el;
      t += r->t;
    }
    p.el_rate = ok ? static_cast<double>(el) / static_cast<double>(ok) : 0.0;
    p.t_rate = ok ? static_cast<double>(t) / static_cast<double>(ok) : 0.0;
    p.el_se = proportion_se(p.el_rate, ok);
    p.t_se = proportion_se(p.t_rate, ok);
    out.push_back(p);
  }
  return out;
}

LocalPowerResult run_local_power(std::size_t n, double local_tau, double eps0, double alpha, std::size_t reps,
                                 std::uint64_t seed, const RunOptions& options) {
  // Residual sd with one group is sqrt(tau^2/3 + 1); solve tau = eps0 - t sd / sqrt(n) by fixed point.
  const double rn = std::sqrt(static_cast<double>(n));
  double tau = eps0;
  for (int i = 0; i < 200; ++i) tau = eps0 - local_tau * std::sqrt(tau * tau / 3.0 + 1.0) / rn;

  PowerConfig cfg;
  cfg.n = n;
  cfg.m = 1;
  cfg.reps = reps;
  cfg.hypothesis = HypothesisSpec::at_least(eps0);
  cfg.alpha = alpha;
  cfg.taus = {tau};
  cfg.seed = seed;
  const PowerPoint p = run_power(cfg, options).front();

  LocalPowerResult out;
  out.local_tau = local_tau;
  out.model_tau = tau;
  out.empirical = p.el_rate;
  out.mc_se = p.el_se;
  out.predicted = normal_cdf(local_tau - std::sqrt(chi2_quantile(1.0 - 2.0 * alpha, 1)));
  out.errors = p.errors;
  return out;
}

std::vector<double> default_fdr_taus() {
  std::vector<double> taus;
  for (int k = -3; k <= 12; ++k) taus.push_back(static_cast<double>(k) / 20.0);
  return taus;
}

std::vector<FdrRow> run_fdr(const FdrConfig& cfg, const RunOptions& options) {
  const std::vector<double> taus = cfg.taus.empty() ? default_fdr_taus() : cfg.taus;
  std::vector<FdrRow> out;
  for (double tau : taus) {
    ModelSpec model;
    model.kind = ModelKind::LocationShift3;
    model.n = cfg.n;
    model.m = cfg.m;
    model.tau = tau;
    model.noise = cfg.noise;
    struct Rep {
      double fdp;
      double tpp;
    };
    Eigen::VectorXd truth;
    const auto results = replicate<Rep>(cfg.reps, options.threads, [&](std::size_t r) {
      ModelSpec spec = model;
      spec.seed = derive_seed(cfg.seed, r);
      const GeneratedSample sample = generate(spec);
      const FlagReport report = flag_groups(sample.system(), HypothesisSpec::at_most(cfg.eps0), cfg.alpha);
      std::size_t flagged = 0;
      std::size_t false_flags = 0;
      std::size_t true_flags = 0;
      std::size_t alternatives = 0;
      for (std::size_t j = 0; j < report.flagged.size(); ++j) {
        const bool is_null = sample.true_eps[static_cast<Eigen::Index>(j)] <= cfg.eps0 + 1e-12;
        alternatives += !is_null;
        if (!report.flagged[j]) continue;
        ++flagged;
        if (is_null) {
          ++false_flags;
        } else {
          ++true_flags;
        }
      }
      return Rep{static_cast<double>(false_flags) / static_cast<double>(std::max<std::size_t>(flagged, 1)),
                 alternatives ? static_cast<double>(true_flags) / static_cast<double>(alternatives) : 0.0};
    });
    FdrRow row;
    row.tau = tau;
    row.true_eps = Eigen::VectorXd(static_cast<Eigen::Index>(cfg.m));
    for (Eigen::Index j = 0; j < row.true_eps.size(); ++j) {
      row.true_eps[j] = static_cast<double>(2 * j + 1) * tau / static_cast<double>(cfg.m);
    }
    std::vector<double> fdp;
    std::vector<double> tpp;
    for (const auto& r : results) {
      if (!r) {
        ++row.errors;
        continue;
      }
      fdp.push_back(r->fdp);
      tpp.push_back(r->tpp);
    }
    row.fdr_se = mean_se(fdp, row.fdr);
    row.power_se = mean_se(tpp, row.power);
    out.push_back(row);
  }
  return out;
}

std::vector<RuntimeRow> run_runtime(const ModelSpec& model, std::size_t reps, double alpha,
                                    const BootstrapConfig& bootstrap) {
  std::vector<GeneratedSample> samples;
  std::vector<EstimatingSystem> systems;
  for (std::size_t r = 0; r < reps; ++r) {
    ModelSpec spec = model;
    spec.seed = derive_seed(model.seed, r);
    samples.push_back(generate(spec));
    systems.push_back(samples.back().system());
  }
  const double z = chi2_quantile(1.0 - alpha, static_cast<int>(model.m));
  std::vector<RuntimeRow> rows;
  std::size_t sink = 0;

  auto time = [&](const std::string& name, auto&& eval) {
    const auto start = Clock::now();
    for (std::size_t r = 0; r < reps; ++r) sink += eval(r);
    rows.push_back({name, reps, seconds_since(start)});
  };
  time("EL", [&](std::size_t r) { return el_log_ratio(systems[r], samples[r].true_eps).log_ratio <= z; });
  time("EEL", [&](std::size_t r) { return eel_log_ratio(systems[r], samples[r].true_eps).log_ratio <= z; });
  time("Bootstrap", [&](std::size_t r) {
    BootstrapConfig cfg = bootstrap;
    cfg.alpha = alpha;
    cfg.seed = derive_seed(derive_seed(model.seed, r), 3);
    return bootstrap_region(systems[r], cfg).covers(samples[r].true_eps);
  });
  volatile std::size_t observed = sink;
  (void)observed;
  return rows;
}

}  // namespace elaudit
