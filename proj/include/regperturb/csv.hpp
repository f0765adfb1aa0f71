// Copyright 2026 The regperturb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef REGPERTURB_CSV_HPP_
#define REGPERTURB_CSV_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "regperturb/dataset.hpp"
#include "regperturb/error.hpp"
#include "regperturb/format.hpp"

namespace regperturb {

enum class ColumnKind { kContinuous, kDummy };
enum class ColumnRole { kResponse, kExplanatory, kIgnored };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  ColumnRole role = ColumnRole::kExplanatory;
};

// Raw cells as read, so that untouched columns can be written back verbatim.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> ColumnIndex(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }
};

namespace detail {

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one record. Double-quoted fields may contain commas and "" escapes;
// records spanning lines are not supported.
inline std::vector<std::string> SplitCsvLine(std::string_view line,
                                             std::size_t line_number) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && Trim(field).empty()) {
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : std::string(Trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) {
    throw Error(ErrorCode::kParseError,
                "line " + std::to_string(line_number) + ": unterminated quote");
  }
  fields.push_back(was_quoted ? field : std::string(Trim(field)));
  return fields;
}

inline std::string QuoteIfNeeded(const std::string& cell) {
  if (cell.find_first_of(",\"") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline CsvTable ParseCsv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (detail::Trim(line).empty()) continue;
    auto fields = detail::SplitCsvLine(line, line_number);
    if (table.header.empty()) {
      table.header = std::move(fields);
      std::set<std::string> seen;
      for (const auto& name : table.header) {
        if (name.empty() || !seen.insert(name).second) {
          throw Error(ErrorCode::kParseError,
                      "header has an empty or duplicate column name '" + name + "'");
        }
      }
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_number) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) {
    throw Error(ErrorCode::kParseError, "missing header row");
  }
  return table;
}

inline CsvTable ReadCsvTable(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return ParseCsv(in);
}

// Every column of `header` is explanatory and continuous unless named in
// `dummies` or `ignored`.
inline std::vector<ColumnSchema> InferSchema(const std::vector<std::string>& header,
                                             const std::string& response,
                                             const std::vector<std::string>& dummies = {},
                                             const std::vector<std::string>& ignored = {}) {
  auto contains = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  if (!contains(header, response)) {
    throw Error(ErrorCode::kSchemaMismatch, "response column '" + response + "' not in header");
  }
  for (const auto& name : dummies) {
    if (!contains(header, name)) {
      throw Error(ErrorCode::kSchemaMismatch, "dummy column '" + name + "' not in header");
    }
  }
  for (const auto& name : ignored) {
    if (!contains(header, name)) {
      throw Error(ErrorCode::kSchemaMismatch, "ignored column '" + name + "' not in header");
    }
  }
  std::vector<ColumnSchema> schema;
  for (const auto& name : header) {
    ColumnSchema col;
    col.name = name;
    if (name == response) {
      col.role = ColumnRole::kResponse;
    } else if (contains(ignored, name)) {
      col.role = ColumnRole::kIgnored;
    }
    if (contains(dummies, name)) col.kind = ColumnKind::kDummy;
    schema.push_back(std::move(col));
  }
  return schema;
}

inline double ParseNumber(const std::string& cell, std::size_t data_row,
                          const std::string& column) {
  const std::string where =
      "row " + std::to_string(data_row) + ", column '" + column + "'";
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::kParseError,
                where + ": cannot parse '" + cell + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNonFiniteValue, where + ": value '" + cell + "' is not finite");
  }
  return value;
}

// Builds a Dataset from `table`. The header must list exactly the schema
// columns (in any order); design columns follow header order after the
// intercept. Row order is preserved. `data_row` in messages is 1-based
// over data rows.
inline Dataset DatasetFromTable(const CsvTable& table,
                                const std::vector<ColumnSchema>& schema) {
  const auto responses = std::count_if(schema.begin(), schema.end(), [](const auto& c) {
    return c.role == ColumnRole::kResponse;
  });
  if (responses != 1) {
    throw Error(ErrorCode::kSchemaMismatch,
                "schema must have exactly one response column, has " +
                    std::to_string(responses));
  }
  std::set<std::string> schema_names;
  for (const auto& col : schema) schema_names.insert(col.name);
  const std::set<std::string> header_names(table.header.begin(), table.header.end());
  for (const auto& col : schema) {
    if (!header_names.count(col.name)) {
      throw Error(ErrorCode::kSchemaMismatch, "column '" + col.name + "' missing from header");
    }
  }
  for (const auto& name : table.header) {
    if (!schema_names.count(name)) {
      throw Error(ErrorCode::kSchemaMismatch, "column '" + name + "' not in schema");
    }
  }

  std::vector<const ColumnSchema*> by_header;
  for (const auto& name : table.header) {
    by_header.push_back(&*std::find_if(schema.begin(), schema.end(),
                                       [&](const auto& c) { return c.name == name; }));
  }

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  std::vector<std::size_t> explanatory;
  std::size_t response_col = 0;
  for (std::size_t c = 0; c < by_header.size(); ++c) {
    if (by_header[c]->role == ColumnRole::kExplanatory) explanatory.push_back(c);
    if (by_header[c]->role == ColumnRole::kResponse) response_col = c;
  }

  Eigen::MatrixXd regressors(n, static_cast<Eigen::Index>(explanatory.size()));
  Eigen::VectorXd response(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const std::size_t data_row = static_cast<std::size_t>(i) + 1;
    response(i) = ParseNumber(row[response_col], data_row, table.header[response_col]);
    for (std::size_t j = 0; j < explanatory.size(); ++j) {
      const std::size_t c = explanatory[j];
      const double v = ParseNumber(row[c], data_row, table.header[c]);
      if (by_header[c]->kind == ColumnKind::kDummy && v != 0.0 && v != 1.0) {
        throw Error(ErrorCode::kSchemaMismatch,
                    "row " + std::to_string(data_row) + ", column '" +
                        table.header[c] + "': dummy value must be 0 or 1");
      }
      regressors(i, static_cast<Eigen::Index>(j)) = v;
    }
  }
  std::vector<std::string> names;
  for (std::size_t c : explanatory) names.push_back(table.header[c]);
  return Dataset::FromRegressors(regressors, std::move(response), std::move(names),
                                 table.header[response_col]);
}

inline Dataset LoadCsv(const std::filesystem::path& path,
                       const std::vector<ColumnSchema>& schema) {
  return DatasetFromTable(ReadCsvTable(path), schema);
}

inline std::string TableToCsv(const CsvTable& table) {
  std::string out;
  auto write_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += detail::QuoteIfNeeded(row[i]);
    }
    out += '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  return out;
}

// Copy of `table` with column `column` replaced by `values`, printed with
// 17 significant digits (or as integers when `round_to_integer`).
inline CsvTable ReplaceColumn(const CsvTable& table, const std::string& column,
                              const Eigen::VectorXd& values, bool round_to_integer) {
  const auto index = table.ColumnIndex(column);
  if (!index) {
    throw Error(ErrorCode::kSchemaMismatch, "column '" + column + "' not in table");
  }
  if (values.size() != static_cast<Eigen::Index>(table.rows.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "replacement column has wrong length");
  }
  CsvTable out = table;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const double v = values(static_cast<Eigen::Index>(i));
    out.rows[i][*index] = round_to_integer ? FormatFixed(std::round(v), 0) : FormatDouble(v);
  }
  return out;
}

inline CsvTable DatasetToTable(const Dataset& data) {
  CsvTable table;
  const auto& names = data.column_names();
  for (std::size_t j = 1; j < names.size(); ++j) table.header.push_back(names[j]);
  table.header.push_back(data.response_name());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index j = 1; j < data.parameters(); ++j) {
      row.push_back(FormatDouble(data.design()(i, j)));
    }
    row.push_back(FormatDouble(data.response()(i)));
    table.rows.push_back(std::move(row));
  }
  return table;
}

// Writes `content` to a temporary file in the destination directory and
// renames it into place, so readers never see a partial file.
inline void AtomicWriteFile(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(ErrorCode::kIoError, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

}  // namespace regperturb

#endif  // REGPERTURB_CSV_HPP_
