#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "elaudit/audit.hpp"
#include "elaudit/disparity.hpp"
#include "json.hpp"

namespace elaudit::cli {

enum class AuditMethod { EL, EEL, Bootstrap };

struct AuditConfig {
  std::string dataset_path;  // resolved against the config file's directory
  MetricSpec metric;
  std::vector<GroupSpec> groups;
  TargetSpec target;
  HypothesisSpec hypothesis;
  double alpha = 0.05;
  AuditMethod method = AuditMethod::EL;
  std::uint64_t seed = 0;
  std::string output_path;  // empty writes the report to stdout
};

// Strict conversion: unknown keys, wrong types and out-of-range values throw Config errors.
AuditConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json read_config_json(const std::filesystem::path& path);

// Command-line values that replace the corresponding config fields before hashing.
struct ConfigOverrides {
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::string> output_path;
};
void apply_overrides(nlohmann::json& doc, const ConfigOverrides& overrides);

// FNV-1a over the canonical serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

std::string to_string(AuditMethod method);
AuditMethod parse_method(const std::string& text);

}  // namespace elaudit::cli
