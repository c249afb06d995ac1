#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dkfsel {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  /// Column index of `name`; throws ValidationError if absent.
  std::size_t column(const std::string& name) const;
};

/// 17 significant digits, '.' decimal separator, locale independent.
std::string format_double(double v);
std::string format_int(long long v);

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

/// Throws IoError when the file cannot be written or read.
void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

double parse_double(const std::string& s);

}  // namespace dkfsel
