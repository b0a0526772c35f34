#include "elaudit/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include "elaudit/baseline.hpp"
#include "elaudit/dataset.hpp"
#include "elaudit/disparity.hpp"
#include "elaudit/error.hpp"

namespace elaudit::cli {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json header(const char* command, const AuditConfig& cfg, const std::string& hash) {
  return json{{"command", command},       {"elaudit_version", kVersion}, {"config_hash", hash},
              {"seed", cfg.seed},         {"alpha", cfg.alpha},          {"method", to_string(cfg.method)},
              {"dataset", cfg.dataset_path}};
}

struct Loaded {
  AuditDataset data;
  EstimatingSystem sys;
};

Loaded load(const AuditConfig& cfg) {
  AuditDataset data = read_dataset(cfg.dataset_path);
  EstimatingSystem sys = build_system(data, cfg.metric, cfg.groups, cfg.target);
  return {std::move(data), std::move(sys)};
}

json hypothesis_json(const HypothesisSpec& h) {
  switch (h.kind) {
    case HypothesisSpec::Kind::PointEquals: return {{"kind", "point"}, {"eps0", h.eps0}};
    case HypothesisSpec::Kind::AtLeast: return {{"kind", "at_least"}, {"eps0", h.eps0}};
    case HypothesisSpec::Kind::AtMost: return {{"kind", "at_most"}, {"eps0", h.eps0}};
    case HypothesisSpec::Kind::Interval: return {{"kind", "interval"}, {"eps1", h.eps1}, {"eps2", h.eps2}};
  }
  return {};
}

ResampleTarget resample_target(const AuditDataset& data, const TargetSpec& target) {
  ResampleTarget rt;
  rt.kind = target.kind;
  if (target.kind == TargetSpec::Kind::ReferenceGroup) rt.reference = group_mask(data, *target.group);
  return rt;
}

void write_tsv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "\t" : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "\t" : "") << row[c];
    out << '\n';
  }
}

std::string fmt(double x) { return std::isfinite(x) ? format_number(x) : (std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf")); }
std::string fmt(std::size_t x) { return std::to_string(x); }

const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::Homoskedastic1: return "1";
    case ModelKind::Heteroskedastic2: return "2";
    case ModelKind::LocationShift3: return "3";
  }
  return "1";
}

const char* method_name(CoverageMethod m) {
  switch (m) {
    case CoverageMethod::EL: return "el";
    case CoverageMethod::EEL: return "eel";
    case CoverageMethod::Bootstrap: return "bootstrap";
  }
  return "el";
}

}  // namespace

IntervalKind parse_interval_kind(const std::string& text) {
  if (text == "two-sided") return IntervalKind::TwoSided;
  if (text == "lower") return IntervalKind::LowerOneSided;
  if (text == "upper") return IntervalKind::UpperOneSided;
  throw Error(ErrorCode::Config, "unknown interval kind '" + text + "'");
}

CommandResult cmd_certify(const AuditConfig& cfg, const std::string& hash) {
  if (cfg.hypothesis.kind != HypothesisSpec::Kind::PointEquals) {
    throw Error(ErrorCode::Config, "certify requires a point hypothesis");
  }
  const Loaded in = load(cfg);
  const Eigen::VectorXd eps0 = Eigen::VectorXd::Constant(in.sys.m(), cfg.hypothesis.eps0);
  const Eigen::VectorXd eps_hat = epsilon_hat(in.sys);

  json report = header("certify", cfg, hash);
  report["n"] = in.sys.n();
  report["eps0"] = cfg.hypothesis.eps0;
  json warnings = json::array();
  if (in.sys.has_overlap()) warnings.push_back("groups overlap");

  json groups = json::array();
  bool certified = false;
  if (cfg.method == AuditMethod::Bootstrap) {
    BootstrapConfig bc;
    bc.alpha = cfg.alpha;
    bc.seed = cfg.seed;
    const BootstrapRegion region = bootstrap_region(in.sys, bc, resample_target(in.data, cfg.target));
    certified = region.covers(eps0);
    report["statistic"] = nullptr;
    report["reference_distribution"] = "bootstrap percentile, B=" + std::to_string(bc.B);
    report["p_value"] = nullptr;
    for (Eigen::Index j = 0; j < in.sys.m(); ++j) {
      const Interval& iv = region.intervals[static_cast<std::size_t>(j)];
      groups.push_back({{"id", in.sys.id(j)},
                        {"size", in.sys.group_size(j)},
                        {"epsilon_hat", eps_hat(j)},
                        {"lo", iv.lo},
                        {"hi", iv.hi}});
    }
  } else {
    const Method m = cfg.method == AuditMethod::EEL ? Method::EEL : Method::EL;
    const CertificationReport cr = certify(in.sys, eps0, cfg.alpha, m);
    certified = cr.certified;
    report["statistic"] = number(cr.statistic);
    report["reference_distribution"] = DistributionRef::chi_square(cr.df).describe();
    report["p_value"] = cr.p_value;
    if (!std::isfinite(cr.statistic)) warnings.push_back("eps0 lies outside the convex hull of the estimating functions");
    for (Eigen::Index j = 0; j < in.sys.m(); ++j) {
      groups.push_back({{"id", in.sys.id(j)}, {"size", in.sys.group_size(j)}, {"epsilon_hat", eps_hat(j)}});
    }
  }
  report["decision"] = certified ? "certified" : "not certified";
  report["groups"] = std::move(groups);
  report["warnings"] = std::move(warnings);
  return {certified ? kExitOk : kExitNotCertified, std::move(report)};
}

CommandResult cmd_flag(const AuditConfig& cfg, const std::string& hash) {
  if (cfg.method != AuditMethod::EL) throw Error(ErrorCode::Config, "flag supports method 'el' only");
  const Loaded in = load(cfg);
  json report = header("flag", cfg, hash);
  report["n"] = in.sys.n();
  report["hypothesis"] = hypothesis_json(cfg.hypothesis);

  std::vector<TestResult> tests;
  std::vector<double> p;
  for (Eigen::Index j = 0; j < in.sys.m(); ++j) {
    tests.push_back(test_hypothesis(in.sys, j, cfg.hypothesis, cfg.alpha));
    p.push_back(tests.back().p_value);
  }
  const FlagReport fr = elbh_flag(p, cfg.alpha, in.sys.ids(), in.sys.has_overlap());

  json groups = json::array();
  json flagged = json::array();
  for (Eigen::Index j = 0; j < in.sys.m(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    groups.push_back({{"id", in.sys.id(j)},
                      {"size", in.sys.group_size(j)},
                      {"epsilon_hat", tests[k].epsilon_hat},
                      {"statistic", number(tests[k].statistic)},
                      {"reference_distribution", tests[k].reference.describe()},
                      {"p_value", tests[k].p_value},
                      {"flagged", static_cast<bool>(fr.flagged[k])}});
    if (fr.flagged[k]) flagged.push_back(in.sys.id(j));
  }
  json warnings = json::array();
  if (fr.overlap_warning) warnings.push_back("groups overlap; false discovery rate control assumes disjoint groups");
  report["k_star"] = fr.k_star;
  report["groups"] = std::move(groups);
  report["flagged"] = std::move(flagged);
  report["warnings"] = std::move(warnings);
  return {kExitOk, std::move(report)};
}

CommandResult cmd_ci(const AuditConfig& cfg, const std::string& hash, IntervalKind kind) {
  const Loaded in = load(cfg);
  json report = header("ci", cfg, hash);
  report["n"] = in.sys.n();
  report["theta"] = in.sys.theta();
  report["kind"] = kind == IntervalKind::TwoSided ? "two-sided" : (kind == IntervalKind::LowerOneSided ? "lower" : "upper");
  json groups = json::array();
  for (Eigen::Index j = 0; j < in.sys.m(); ++j) {
    const Interval iv = confidence_interval(in.sys, j, cfg.alpha, kind);
    groups.push_back({{"id", in.sys.id(j)},
                      {"size", in.sys.group_size(j)},
                      {"epsilon_hat", epsilon_hat(in.sys.scores(), in.sys.mask(j), in.sys.theta())},
                      {"lo", number(iv.lo)},
                      {"hi", number(iv.hi)}});
  }
  report["groups"] = std::move(groups);
  report["warnings"] = json::array();
  return {kExitOk, std::move(report)};
}

void write_report(const json& report, const std::string& output_path) {
  const std::string text = report.dump(2) + "\n";
  if (output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write report '" + output_path + "'");
  out << text;
}

json cmd_simulate(const std::string& sub, const SimulateParams& p) {
  ModelSpec model;
  model.kind = p.model;
  model.n = p.n;
  model.m = p.m;
  model.tau = p.tau;
  model.noise = p.noise;
  model.seed = p.seed;

  RunOptions opts;
  opts.threads = p.threads;
  opts.bootstrap.B = p.bootstrap_resamples;
  opts.bootstrap.alpha = p.alpha;

  json manifest{{"command", "simulate " + sub},
                {"elaudit_version", kVersion},
                {"model", {{"kind", model_name(p.model)}, {"n", p.n}, {"m", p.m}, {"tau", p.tau},
                           {"noise", p.noise == NoiseKind::Gaussian ? "gaussian" : "exponential"}}},
                {"seed", p.seed},
                {"seed_derivation", "replication r uses splitmix64(seed, r)"},
                {"reps", p.reps},
                {"alpha", p.alpha}};
  std::vector<std::string> cols;
  std::vector<std::vector<std::string>> rows;
  double wall = 0.0;

  if (sub == "coverage") {
    const SimSummary s = run_coverage(model, p.method, p.alpha, p.reps, opts);
    manifest["method"] = method_name(p.method);
    if (p.method == CoverageMethod::Bootstrap) manifest["bootstrap_resamples"] = p.bootstrap_resamples;
    cols = {"method", "n", "m", "replications", "errors", "coverage", "mc_se"};
    rows.push_back({method_name(p.method), fmt(p.n), fmt(p.m), fmt(s.replications), fmt(s.errors), fmt(s.estimate),
                    fmt(s.mc_se)});
    wall = s.wall_time;
  } else if (sub == "qq") {
    const Method m = p.method == CoverageMethod::EEL ? Method::EEL : Method::EL;
    if (p.method == CoverageMethod::Bootstrap) throw Error(ErrorCode::Config, "qq supports el and eel");
    const QQResult q = run_qq(model, p.reps, m, opts);
    manifest["method"] = method_name(p.method);
    manifest["ks_distance"] = q.ks_distance;
    manifest["errors"] = q.errors;
    cols = {"rank", "statistic", "chi2_quantile"};
    for (std::size_t i = 0; i < q.statistics.size(); ++i) {
      rows.push_back({fmt(i + 1), fmt(q.statistics[i]), fmt(q.reference_quantiles[i])});
    }
  } else if (sub == "power") {
    PowerConfig pc;
    pc.n = p.n;
    pc.m = p.m;
    pc.reps = p.reps;
    pc.hypothesis = p.hypothesis;
    pc.alpha = p.alpha;
    pc.taus = p.taus;
    pc.noise = p.noise;
    pc.seed = p.seed;
    const auto points = run_power(pc, opts);
    manifest["hypothesis"] = hypothesis_json(p.hypothesis);
    cols = {"tau", "true_eps", "el_rate", "el_se", "t_rate", "t_se", "errors"};
    for (const auto& pt : points) {
      rows.push_back({fmt(pt.tau), fmt(pt.true_eps), fmt(pt.el_rate), fmt(pt.el_se), fmt(pt.t_rate), fmt(pt.t_se),
                      fmt(pt.errors)});
    }
  } else if (sub == "fdr") {
    FdrConfig fc;
    fc.n = p.n;
    fc.m = p.m;
    fc.eps0 = p.hypothesis.eps0;
    fc.alpha = p.alpha;
    fc.reps = p.reps;
    fc.taus = p.taus;
    fc.noise = p.noise;
    fc.seed = p.seed;
    const auto table = run_fdr(fc, opts);
    manifest["eps0"] = fc.eps0;
    cols = {"tau", "fdr", "fdr_se", "power", "power_se", "errors"};
    for (const auto& r : table) {
      rows.push_back({fmt(r.tau), fmt(r.fdr), fmt(r.fdr_se), fmt(r.power), fmt(r.power_se), fmt(r.errors)});
    }
  } else if (sub == "runtime") {
    BootstrapConfig bc;
    bc.B = p.bootstrap_resamples;
    bc.alpha = p.alpha;
    bc.seed = p.seed;
    const auto table = run_runtime(model, p.reps, p.alpha, bc);
    manifest["bootstrap_resamples"] = p.bootstrap_resamples;
    cols = {"method", "evaluations", "seconds", "seconds_per_evaluation"};
    for (const auto& r : table) {
      rows.push_back({r.method, fmt(r.evaluations), fmt(r.seconds),
                      fmt(r.seconds / static_cast<double>(std::max<std::size_t>(r.evaluations, 1)))});
    }
  } else {
    throw Error(ErrorCode::Config, "unknown simulation '" + sub + "'");
  }

  std::filesystem::create_directories(p.output_dir);
  const std::string table = sub + ".tsv";
  write_tsv(p.output_dir / table, cols, rows);
  manifest["table"] = table;
  manifest["columns"] = cols;
  if (wall > 0.0) manifest["wall_seconds"] = wall;
  write_report(manifest, (p.output_dir / "manifest.json").string());
  return manifest;
}

}  // namespace elaudit::cli
