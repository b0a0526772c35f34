#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace elaudit {

// A column is either all-numeric or all-categorical; the type is fixed at ingestion.
struct Column {
  std::string name;
  std::variant<std::vector<double>, std::vector<std::string>> values;

  bool is_numeric() const { return std::holds_alternative<std::vector<double>>(values); }
  std::size_t size() const;
};

// Immutable tabular holdout data.
class AuditDataset {
 public:
  static AuditDataset from_columns(std::vector<Column> columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }
  std::vector<std::string> column_names() const;
  bool has_column(std::string_view name) const noexcept;

  const Column& column(std::string_view name) const;
  const Column& column(std::size_t index) const { return columns_.at(index); }
  std::span<const double> numeric(std::string_view name) const;
  std::span<const std::string> categorical(std::string_view name) const;

  // New dataset holding the given rows, in order.
  AuditDataset select_rows(std::span<const std::size_t> rows) const;

  friend bool operator==(const AuditDataset&, const AuditDataset&);

 private:
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

// Raw comma-separated table: header plus string cells, arity checked.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t index_of(std::string_view name) const;  // npos when absent
};

CsvTable parse_csv(std::istream& in);
CsvTable read_csv_table(const std::filesystem::path& path);

// Strict conversion: empty and NaN cells are rejected; a column is numeric
// when every cell parses as a finite number.
AuditDataset to_dataset(const CsvTable& table);
AuditDataset read_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const AuditDataset& data);
void write_dataset(const std::filesystem::path& path, const AuditDataset& data);

// Shortest round-trip decimal representation.
std::string format_number(double value);

}  // namespace elaudit
