#pragma once

// Minimal RFC 4180 reader/writer: comma separated, optional double-quoted
// fields with "" escapes, CRLF or LF line endings, mandatory header row.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "treg/errors.hpp"
#include "treg/matrix.hpp"

namespace treg::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> records;
};

inline CsvTable parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // Blank lines carry no data.
    if (!(record.size() == 1 && record.front().empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw DataError("csv: stray quote on line " + std::to_string(line));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  if (field_started || !record.empty()) end_record();

  if (records.empty()) throw DataError("csv: file is empty");
  CsvTable table;
  table.header = std::move(records.front());
  table.records.assign(std::make_move_iterator(records.begin() + 1),
                       std::make_move_iterator(records.end()));
  return table;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct ColumnSchema {
  std::vector<std::string> feature_columns;
  std::vector<std::string> target_columns;
};

// Row-per-sample numeric data: features is p×n, targets is p×m.
struct Dataset {
  Matrix features;
  Matrix targets;

  std::size_t samples() const { return features.rows(); }
};

inline double parse_number(std::string_view cell) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() ||
      !std::isfinite(value)) {
    throw DataError("not a finite number");
  }
  return value;
}

inline void validate(const ColumnSchema& schema) {
  if (schema.feature_columns.empty() || schema.target_columns.empty()) {
    throw DataError("schema needs at least one feature and one target column");
  }
  for (const auto& f : schema.feature_columns) {
    if (std::find(schema.target_columns.begin(), schema.target_columns.end(), f) !=
        schema.target_columns.end()) {
      throw DataError("column '" + f + "' is both a feature and a target");
    }
  }
}

// Extracts `columns` from the table. Rows are numbered as in the file, the
// header being row 1.
inline Matrix select_columns(const CsvTable& table,
                             const std::vector<std::string>& columns) {
  std::vector<std::size_t> index;
  for (const auto& name : columns) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw DataError("missing column '" + name + "'");
    index.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  Matrix out(table.records.size(), columns.size());
  for (std::size_t r = 0; r < table.records.size(); ++r) {
    const auto& rec = table.records[r];
    for (std::size_t c = 0; c < index.size(); ++c) {
      const std::string where =
          "row " + std::to_string(r + 2) + ", column '" + columns[c] + "'";
      if (index[c] >= rec.size()) throw DataError(where + ": missing cell");
      try {
        out(r, c) = parse_number(rec[index[c]]);
      } catch (const DataError&) {
        throw DataError(where + ": cannot parse '" + rec[index[c]] + "' as a number");
      }
    }
  }
  return out;
}

inline Dataset load_csv_text(std::string_view text, const ColumnSchema& schema) {
  validate(schema);
  const CsvTable table = parse_csv(text);
  if (table.records.empty()) throw DataError("csv: no data rows");
  return {select_columns(table, schema.feature_columns),
          select_columns(table, schema.target_columns)};
}

inline Dataset load_csv(const std::string& path, const ColumnSchema& schema) {
  return load_csv_text(read_file(path), schema);
}

// Shortest decimal form that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const Matrix& rows) {
  if (header.size() != rows.cols()) {
    throw ShapeError("write_csv: " + std::to_string(header.size()) +
                     " header names for " + std::to_string(rows.cols()) + " columns");
  }
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << quote_field(header[c]);
  os << '\n';
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    for (std::size_t c = 0; c < rows.cols(); ++c) os << (c ? "," : "") << format_number(rows(r, c));
    os << '\n';
  }
}

}  // namespace treg::io
