#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace based {

/// A parsed CSV file. `line_numbers[i]` is the 1-based line of rows[i]; the
/// header is line 1.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

/// Splits one RFC 4180 record; fields may be double-quoted with "" escapes.
std::vector<std::string> split_csv_record(std::string_view line);

/// Reads a comma-separated file. Blank lines are skipped, a trailing CR is
/// stripped. Throws IoError when unreadable and ValidationError when a row's
/// field count differs from the header.
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view value);

/// printf("%.17g"), the round-trip format used in every CSV output.
std::string format_double(double v);

/// Throws ValidationError naming the first column that differs from `expected`.
void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::string& what);

}  // namespace based
