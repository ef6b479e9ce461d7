#pragma once

// Minimal CSV reader: header row, comma separated, optional double quotes
// (no embedded newlines). Errors name the 1-based input line.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "surprisal/error.hpp"

namespace surprisal {

class CsvTable {
 public:
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // input line of each row

  std::size_t size() const noexcept { return rows.size(); }

  std::optional<std::size_t> find_column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  }

  std::size_t column(const std::string& name) const {
    if (auto c = find_column(name)) return *c;
    throw ValidationError("CSV: missing column '" + name + "'");
  }

  double number(std::size_t row, std::size_t col) const {
    const std::string& text = rows[row][col];
    if (text.empty()) fail(row, "empty cell in column '" + header[col] + "'");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE)
      fail(row, "'" + text + "' in column '" + header[col] + "' is not a number");
    return v;
  }

  std::int64_t integer(std::size_t row, std::size_t col) const {
    const double v = number(row, col);
    if (v != std::floor(v) || std::fabs(v) > 9.0e15)
      fail(row, "'" + rows[row][col] + "' in column '" + header[col] + "' is not an integer");
    return static_cast<std::int64_t>(v);
  }

  [[noreturn]] void fail(std::size_t row, const std::string& what) const {
    throw ValidationError("CSV line " + std::to_string(lines[row]) + ": " + what);
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
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
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ValidationError("CSV line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(was_quoted ? field : trim(field));
  return fields;
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line, line_no);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ValidationError("CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.lines.push_back(line_no);
  }
  if (!have_header) throw ValidationError("CSV: input is empty");
  return table;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace surprisal
