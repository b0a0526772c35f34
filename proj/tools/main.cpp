#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "elaudit/cli/commands.hpp"
#include "elaudit/cli/compas.hpp"
#include "elaudit/cli/config.hpp"
#include "elaudit/error.hpp"

namespace {

using namespace elaudit;
using namespace elaudit::cli;

struct AuditFlags {
  std::string config;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::string> output;
};

void add_audit_flags(CLI::App* cmd, AuditFlags& f) {
  cmd->add_option("--config", f.config, "Audit config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--alpha", f.alpha, "Significance level");
  cmd->add_option("--seed", f.seed, "Seed for resampling methods");
  cmd->add_option("--method", f.method, "el, eel or bootstrap")->check(CLI::IsMember({"el", "eel", "bootstrap"}));
  cmd->add_option("--output", f.output, "Report path; stdout when omitted");
}

std::pair<AuditConfig, std::string> load_config(const AuditFlags& f) {
  nlohmann::json doc = read_config_json(f.config);
  apply_overrides(doc, {f.alpha, f.seed, f.method, f.output});
  const auto base = std::filesystem::path(f.config).parent_path();
  return {parse_config(doc, base), config_hash(doc)};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical likelihood fairness auditing"};
  app.require_subcommand(1);

  AuditFlags certify_flags;
  auto* certify_cmd = app.add_subcommand("certify", "Test that every group disparity equals eps0");
  add_audit_flags(certify_cmd, certify_flags);

  AuditFlags flag_flags;
  auto* flag_cmd = app.add_subcommand("flag", "Flag groups with false discovery rate control");
  add_audit_flags(flag_cmd, flag_flags);

  AuditFlags ci_flags;
  std::string ci_kind = "two-sided";
  auto* ci_cmd = app.add_subcommand("ci", "Per-group disparity estimates and confidence intervals");
  add_audit_flags(ci_cmd, ci_flags);
  ci_cmd->add_option("--kind", ci_kind, "two-sided, lower or upper")
      ->check(CLI::IsMember({"two-sided", "lower", "upper"}));

  SimulateParams sim;
  std::string sim_model = "1";
  std::string sim_noise = "gaussian";
  std::string sim_method = "el";
  std::string sim_hypothesis = "point";
  double eps0 = 0.0, eps1 = 0.0, eps2 = 0.0;
  std::string taus;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo experiments");
  sim_cmd->require_subcommand(1);
  for (const char* name : {"coverage", "qq", "power", "fdr", "runtime"}) {
    auto* sub = sim_cmd->add_subcommand(name);
    sub->add_option("--model", sim_model, "1, 2 or 3")->check(CLI::IsMember({"1", "2", "3"}));
    sub->add_option("--n", sim.n, "Sample size")->check(CLI::PositiveNumber);
    sub->add_option("--m", sim.m, "Number of groups")->check(CLI::PositiveNumber);
    sub->add_option("--tau", sim.tau, "Location shift for model 3");
    sub->add_option("--noise", sim_noise)->check(CLI::IsMember({"gaussian", "exponential"}));
    sub->add_option("--reps", sim.reps, "Replications")->check(CLI::PositiveNumber);
    sub->add_option("--alpha", sim.alpha)->check(CLI::Range(1e-6, 0.5));
    sub->add_option("--seed", sim.seed);
    sub->add_option("--method", sim_method)->check(CLI::IsMember({"el", "eel", "bootstrap"}));
    sub->add_option("--threads", sim.threads, "Worker threads; 0 uses all cores");
    sub->add_option("--bootstrap-resamples", sim.bootstrap_resamples)->check(CLI::Range(100, 1000000));
    sub->add_option("--hypothesis", sim_hypothesis)->check(CLI::IsMember({"point", "at_least", "at_most", "interval"}));
    sub->add_option("--eps0", eps0);
    sub->add_option("--eps1", eps1);
    sub->add_option("--eps2", eps2);
    sub->add_option("--taus", taus, "Comma-separated tau grid");
    sub->add_option("--output", sim.output_dir, "Output directory");
  }

  std::string raw_path, out_dir = ".", races = "African-American,Caucasian";
  CompasOptions compas;
  auto* compas_cmd = app.add_subcommand("compas-prepare", "Filter the ProPublica two-year file into audit tables");
  compas_cmd->add_option("--input", raw_path, "Raw compas-scores-two-years.csv")->required()->check(CLI::ExistingFile);
  compas_cmd->add_option("--output", out_dir, "Output directory");
  compas_cmd->add_option("--threshold", compas.threshold, "Positive prediction when the score is at least this");
  compas_cmd->add_option("--races", races, "Comma-separated race pair");
  compas_cmd->add_option("--score-column", compas.score_column);
  compas_cmd->add_option("--outcome-column", compas.outcome_column);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (certify_cmd->parsed()) {
      auto [cfg, hash] = load_config(certify_flags);
      auto res = cmd_certify(cfg, hash);
      write_report(res.report, cfg.output_path);
      return res.exit_code;
    }
    if (flag_cmd->parsed()) {
      auto [cfg, hash] = load_config(flag_flags);
      auto res = cmd_flag(cfg, hash);
      write_report(res.report, cfg.output_path);
      return res.exit_code;
    }
    if (ci_cmd->parsed()) {
      auto [cfg, hash] = load_config(ci_flags);
      auto res = cmd_ci(cfg, hash, parse_interval_kind(ci_kind));
      write_report(res.report, cfg.output_path);
      return res.exit_code;
    }
    if (sim_cmd->parsed()) {
      sim.model = sim_model == "1" ? ModelKind::Homoskedastic1
                                   : (sim_model == "2" ? ModelKind::Heteroskedastic2 : ModelKind::LocationShift3);
      sim.noise = sim_noise == "gaussian" ? NoiseKind::Gaussian : NoiseKind::CenteredExponential;
      sim.method = sim_method == "el" ? CoverageMethod::EL
                                      : (sim_method == "eel" ? CoverageMethod::EEL : CoverageMethod::Bootstrap);
      if (sim_hypothesis == "point") sim.hypothesis = HypothesisSpec::point(eps0);
      if (sim_hypothesis == "at_least") sim.hypothesis = HypothesisSpec::at_least(eps0);
      if (sim_hypothesis == "at_most") sim.hypothesis = HypothesisSpec::at_most(eps0);
      if (sim_hypothesis == "interval") sim.hypothesis = HypothesisSpec::interval(eps1, eps2);
      sim.taus = parse_list(taus);
      const std::string sub = sim_cmd->get_subcommands().front()->get_name();
      const auto manifest = cmd_simulate(sub, sim);
      std::cout << "wrote " << (sim.output_dir / manifest["table"].get<std::string>()).string() << "\n";
      return kExitOk;
    }
    if (compas_cmd->parsed()) {
      compas.races.clear();
      std::stringstream ss(races);
      for (std::string r; std::getline(ss, r, ',');) compas.races.push_back(r);
      const auto tables = compas_prepare(read_csv_table(raw_path), compas);
      write_compas(tables, out_dir);
      std::cout << tables.manifest.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
