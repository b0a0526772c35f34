#include "elaudit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "elaudit/error.hpp"

namespace elaudit {
namespace {

std::string where(std::size_t line, std::size_t col) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_cell(std::ostream& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::size_t Column::size() const {
  return std::visit([](const auto& v) { return v.size(); }, values);
}

AuditDataset AuditDataset::from_columns(std::vector<Column> columns) {
  if (columns.empty()) throw Error(ErrorCode::Schema, "dataset has no columns");
  AuditDataset out;
  out.rows_ = columns.front().size();
  if (out.rows_ == 0) throw Error(ErrorCode::Schema, "dataset has no rows");
  for (const auto& c : columns) {
    if (c.size() != out.rows_) {
      throw Error(ErrorCode::Schema, "column '" + c.name + "' has " + std::to_string(c.size()) +
                                         " rows, expected " + std::to_string(out.rows_));
    }
    if (std::count_if(columns.begin(), columns.end(), [&](const Column& o) { return o.name == c.name; }) > 1) {
      throw Error(ErrorCode::Schema, "duplicate column '" + c.name + "'");
    }
    if (const auto* v = std::get_if<std::vector<double>>(&c.values)) {
      if (std::any_of(v->begin(), v->end(), [](double x) { return std::isnan(x); })) {
        throw Error(ErrorCode::Schema, "column '" + c.name + "' contains NaN");
      }
    }
  }
  out.columns_ = std::move(columns);
  return out;
}

std::vector<std::string> AuditDataset::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& c : columns_) names.push_back(c.name);
  return names;
}

bool AuditDataset::has_column(std::string_view name) const noexcept {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

const Column& AuditDataset::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::MissingColumn, "no column named '" + std::string(name) + "'");
}

std::span<const double> AuditDataset::numeric(std::string_view name) const {
  const Column& c = column(name);
  if (const auto* v = std::get_if<std::vector<double>>(&c.values)) return *v;
  throw Error(ErrorCode::NonNumeric, "column '" + std::string(name) + "' is not numeric");
}

std::span<const std::string> AuditDataset::categorical(std::string_view name) const {
  const Column& c = column(name);
  if (const auto* v = std::get_if<std::vector<std::string>>(&c.values)) return *v;
  throw Error(ErrorCode::TypeMismatch, "column '" + std::string(name) + "' is numeric");
}

AuditDataset AuditDataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) {
    Column out{c.name, {}};
    std::visit(
        [&](const auto& v) {
          std::decay_t<decltype(v)> picked;
          picked.reserve(rows.size());
          for (std::size_t r : rows) picked.push_back(v.at(r));
          out.values = std::move(picked);
        },
        c.values);
    cols.push_back(std::move(out));
  }
  return from_columns(std::move(cols));
}

bool operator==(const AuditDataset& a, const AuditDataset& b) {
  if (a.rows_ != b.rows_ || a.columns_.size() != b.columns_.size()) return false;
  for (std::size_t j = 0; j < a.columns_.size(); ++j) {
    if (a.columns_[j].name != b.columns_[j].name || a.columns_[j].values != b.columns_[j].values) return false;
  }
  return true;
}

std::size_t CsvTable::index_of(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? std::string::npos : static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  std::size_t line = 1;
  std::size_t col = 1;
  bool in_quotes = false;
  bool was_quoted = false;
  bool any = false;

  auto end_cell = [&] {
    record.push_back(std::move(cell));
    cell.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    end_cell();
    records.push_back(std::move(record));
    record.clear();
  };

  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell.push_back('"');
          ++col;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') {
          ++line;
          col = 0;
        }
        cell.push_back(c);
      }
    } else if (c == '"') {
      if (!cell.empty() || was_quoted) throw Error(ErrorCode::Parse, where(line, col) + ": stray quote");
      in_quotes = true;
      was_quoted = true;
    } else if (c == ',') {
      end_cell();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      end_record();
      ++line;
      col = 0;
    } else {
      if (was_quoted) throw Error(ErrorCode::Parse, where(line, col) + ": text after closing quote");
      cell.push_back(c);
    }
    ++col;
  }
  if (in_quotes) throw Error(ErrorCode::Parse, where(line, col) + ": unterminated quoted field");
  if (!cell.empty() || !record.empty() || was_quoted) end_record();
  if (!any || records.empty()) throw Error(ErrorCode::Parse, "empty input");

  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& rec = records[r];
    if (rec.size() == 1 && rec.front().empty()) {
      throw Error(ErrorCode::Parse, where(r + 1, 1) + ": blank line");
    }
    if (rec.size() != table.header.size()) {
      throw Error(ErrorCode::Parse, where(r + 1, std::min(rec.size(), table.header.size()) + 1) + ": expected " +
                                        std::to_string(table.header.size()) + " fields, found " +
                                        std::to_string(rec.size()));
    }
    table.rows.push_back(std::move(rec));
  }
  return table;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  try {
    return parse_csv(in);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    throw;
  }
}

AuditDataset to_dataset(const CsvTable& table) {
  if (table.rows.empty()) throw Error(ErrorCode::Parse, "no data rows");
  std::vector<Column> columns;
  columns.reserve(table.header.size());
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j].empty()) throw Error(ErrorCode::Parse, where(1, j + 1) + ": empty column name");
    std::vector<double> nums;
    nums.reserve(table.rows.size());
    bool numeric = true;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string& cell = table.rows[r][j];
      if (cell.empty()) throw Error(ErrorCode::Parse, where(r + 2, j + 1) + ": empty cell");
      double v = 0.0;
      if (parse_double(cell, v)) {
        if (std::isnan(v) || std::isinf(v)) {
          throw Error(ErrorCode::Parse, where(r + 2, j + 1) + ": non-finite value '" + cell + "'");
        }
        nums.push_back(v);
      } else {
        numeric = false;
      }
    }
    if (numeric) {
      columns.push_back({table.header[j], std::move(nums)});
    } else {
      std::vector<std::string> text;
      text.reserve(table.rows.size());
      for (const auto& row : table.rows) text.push_back(row[j]);
      columns.push_back({table.header[j], std::move(text)});
    }
  }
  return AuditDataset::from_columns(std::move(columns));
}

AuditDataset read_dataset(const std::filesystem::path& path) {
  const CsvTable table = read_csv_table(path);
  try {
    return to_dataset(table);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error(ErrorCode::Io, "cannot format number");
  return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const AuditDataset& data) {
  for (std::size_t j = 0; j < data.cols(); ++j) {
    if (j) out << ',';
    write_cell(out, data.column(j).name);
  }
  out << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (j) out << ',';
      std::visit(
          [&](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::vector<double>>) {
              out << format_number(v[r]);
            } else {
              write_cell(out, v[r]);
            }
          },
          data.column(j).values);
    }
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const AuditDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  write_dataset(out, data);
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace elaudit
