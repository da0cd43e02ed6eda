#pragma once

// Plain-text formats shared by the outputs: CSV tables and key=value files.

#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace coneflow {

/// Shortest round-trip representation, locale independent.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);

  void row(std::span<const double> values);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t width_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Ordered key=value pairs; '#' starts a comment, blank lines are ignored.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

}  // namespace coneflow
