#include "elaudit/cli/compas.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

#include "elaudit/error.hpp"

namespace elaudit::cli {
namespace {

double parse_score(const std::string& cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::Parse, "column '" + column + "', data row " + std::to_string(row + 1) +
                                      ": non-numeric value '" + cell + "'");
  }
  return v;
}

AuditDataset build(const CsvTable& raw, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& idx,
                   const std::vector<std::string>& names, std::size_t outcome_pos) {
  std::vector<Column> cols;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    if (c == outcome_pos) {
      std::vector<double> v;
      for (std::size_t r : rows) v.push_back(parse_score(raw.rows[r][idx[c]], r, names[c]));
      cols.push_back({names[c], std::move(v)});
    } else {
      std::vector<std::string> v;
      for (std::size_t r : rows) v.push_back(raw.rows[r][idx[c]]);
      cols.push_back({names[c], std::move(v)});
    }
  }
  return AuditDataset::from_columns(std::move(cols));
}

}  // namespace

CompasTables compas_prepare(const CsvTable& raw, const CompasOptions& options) {
  const std::vector<std::string> kept{"race", "sex", "age_cat", options.outcome_column};
  std::vector<std::string> required = kept;
  required.push_back(options.score_column);
  std::vector<std::size_t> idx;
  for (const auto& name : required) {
    const std::size_t i = raw.index_of(name);
    if (i == static_cast<std::size_t>(-1)) throw Error(ErrorCode::Schema, "raw COMPAS file lacks column '" + name + "'");
    idx.push_back(i);
  }
  const std::size_t race_i = idx[0];
  const std::size_t score_i = idx.back();
  idx.pop_back();

  std::vector<std::size_t> positive;
  std::vector<std::size_t> pair;
  std::map<std::string, std::size_t> race_counts;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    if (parse_score(raw.rows[r][score_i], r, options.score_column) < options.threshold) continue;
    positive.push_back(r);
    const std::string& race = raw.rows[r][race_i];
    if (std::find(options.races.begin(), options.races.end(), race) != options.races.end()) {
      pair.push_back(r);
      ++race_counts[race];
    }
  }
  if (pair.empty()) throw Error(ErrorCode::EmptyGroup, "no positive predictions within the selected races");

  CompasTables out{build(raw, pair, idx, kept, 3), build(raw, positive, idx, kept, 3), {}};
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& race : options.races) counts[race] = race_counts[race];
  out.manifest = {{"raw_rows", raw.rows.size()},
                  {"threshold", options.threshold},
                  {"score_column", options.score_column},
                  {"outcome_column", options.outcome_column},
                  {"races", options.races},
                  {"two_race_rows", out.two_race.rows()},
                  {"two_race_counts", counts},
                  {"sex_age_rows", out.sex_age.rows()},
                  {"tables", {{"two_race", "compas_two_race.csv"}, {"sex_age", "compas_sex_age.csv"}}}};
  return out;
}

void write_compas(const CompasTables& tables, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_dataset(dir / "compas_two_race.csv", tables.two_race);
  write_dataset(dir / "compas_sex_age.csv", tables.sex_age);
  std::ofstream out(dir / "compas_manifest.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write manifest in '" + dir.string() + "'");
  out << tables.manifest.dump(2) << "\n";
}

}  // namespace elaudit::cli
