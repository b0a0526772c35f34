#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "elaudit/dataset.hpp"
#include "json.hpp"

namespace elaudit::cli {

struct CompasOptions {
  double threshold = 5.0;  // a score at or above this counts as a positive prediction
  std::vector<std::string> races{"African-American", "Caucasian"};
  std::string score_column = "decile_score";
  std::string outcome_column = "two_year_recid";
};

struct CompasTables {
  AuditDataset two_race;  // positive predictions within the race pair
  AuditDataset sex_age;   // positive predictions across all races
  nlohmann::json manifest;
};

// Throws Schema naming the first missing column.
CompasTables compas_prepare(const CsvTable& raw, const CompasOptions& options = {});

// Writes compas_two_race.csv, compas_sex_age.csv and compas_manifest.json.
void write_compas(const CompasTables& tables, const std::filesystem::path& dir);

}  // namespace elaudit::cli
