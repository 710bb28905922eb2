#include "based/csv.hpp"

#include <cstdio>
#include <fstream>

#include "based/errors.hpp"

namespace based {

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
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
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_record(line);
    if (table.header.empty() && line_no == 1) {
      table.header = std::move(fields);
      continue;
    }
    if (table.header.empty()) {
      throw ValidationError("'" + path.string() + "': missing header line");
    }
    if (fields.size() != table.header.size()) {
      throw ValidationError("'" + path.string() + "' row " + std::to_string(line_no) + ": " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw ValidationError("'" + path.string() + "' is empty");
  return table;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::string& what) {
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= table.header.size()) {
      throw ValidationError(what + ": missing column '" + expected[i] + "'");
    }
    if (table.header[i] != expected[i]) {
      throw ValidationError(what + ": column " + std::to_string(i + 1) + " is '" +
                            table.header[i] + "', expected '" + expected[i] + "'");
    }
  }
  if (table.header.size() > expected.size()) {
    throw ValidationError(what + ": unexpected column '" + table.header[expected.size()] + "'");
  }
}

}  // namespace based
