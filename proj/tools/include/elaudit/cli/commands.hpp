#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "elaudit/audit.hpp"
#include "elaudit/cli/config.hpp"
#include "elaudit/sim.hpp"
#include "json.hpp"

namespace elaudit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNotCertified = 3;

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json report;
};

// Each report embeds the config hash and seed and carries no timestamps.
CommandResult cmd_certify(const AuditConfig& cfg, const std::string& hash);
CommandResult cmd_flag(const AuditConfig& cfg, const std::string& hash);
CommandResult cmd_ci(const AuditConfig& cfg, const std::string& hash, IntervalKind kind = IntervalKind::TwoSided);

// Pretty-printed JSON to the path, or to stdout when the path is empty.
void write_report(const nlohmann::json& report, const std::string& output_path);

IntervalKind parse_interval_kind(const std::string& text);

struct SimulateParams {
  ModelKind model = ModelKind::Homoskedastic1;
  std::size_t n = 2000;
  std::size_t m = 1;
  double tau = 0.0;
  NoiseKind noise = NoiseKind::Gaussian;
  std::size_t reps = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  CoverageMethod method = CoverageMethod::EL;
  unsigned threads = 0;
  std::size_t bootstrap_resamples = 1000;
  HypothesisSpec hypothesis = HypothesisSpec::point(0.0);
  std::vector<double> taus;  // power and fdr grids; empty selects the defaults
  std::filesystem::path output_dir = ".";
};

// Runs one of coverage, qq, power, fdr, runtime; writes <sub>.tsv and manifest.json and returns the manifest.
nlohmann::json cmd_simulate(const std::string& sub, const SimulateParams& params);

}  // namespace elaudit::cli
