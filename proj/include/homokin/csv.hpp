#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace homokin {

// 17 significant digits, '.' decimal point.
std::string format_number(double v);

// Comma separated, header row, LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::initializer_list<double> row);
  void add_row(const std::vector<double>& row);
  // Row with a leading text column followed by numbers.
  void add_row(const std::string& label, const std::vector<double>& row);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return lines_.size(); }

  void write(std::ostream& out) const;
  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> lines_;
};

}  // namespace homokin
