// Copyright 2026 The Shiftscope Authors.
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

// Minimal CSV reading/writing shared by the artifact files.

#ifndef SHIFTSCOPE_SRC_CSV_HPP_
#define SHIFTSCOPE_SRC_CSV_HPP_

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "shiftscope/error.hpp"

namespace shiftscope::csv {

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Shortest form that still round-trips a double.
inline std::string number(double value) {
  char buffer[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

inline double parse_number(const std::string& field, const std::string& where) {
  if (field.empty()) fail(ErrorCode::kParseError, "empty number in " + where);
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    fail(ErrorCode::kParseError, "bad number '" + field + "' in " + where);
  }
  return value;
}

// Reads every non-empty line; checks the header and field count.
inline std::vector<std::vector<std::string>> read_table(
    const std::filesystem::path& path, std::string_view header,
    ErrorCode missing_code = ErrorCode::kIoError) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(missing_code, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    fail(ErrorCode::kParseError, path.string() + " is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    fail(ErrorCode::kParseError, path.string() + ": expected header '" +
                                     std::string(header) + "'");
  }
  const std::size_t width = split_line(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != width) {
      fail(ErrorCode::kParseError,
           path.string() + ": wrong field count on line " +
               std::to_string(rows.size() + 2));
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << contents;
}

}  // namespace shiftscope::csv

#endif  // SHIFTSCOPE_SRC_CSV_HPP_
