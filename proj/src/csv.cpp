#include "homokin/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "homokin/errors.hpp"

namespace homokin {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::initializer_list<double> row) { add_row(std::vector<double>(row)); }

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != header_.size()) throw DimensionError("CsvTable: row width does not match header");
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) line += ',';
    line += format_number(row[i]);
  }
  lines_.push_back(std::move(line));
}

void CsvTable::add_row(const std::string& label, const std::vector<double>& row) {
  if (row.size() + 1 != header_.size()) throw DimensionError("CsvTable: row width does not match header");
  std::string line = label;
  for (double v : row) line += ',' + format_number(v);
  lines_.push_back(std::move(line));
}

void CsvTable::write(std::ostream& out) const {
  for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
  out << '\n';
  for (const auto& l : lines_) out << l << '\n';
}

std::string CsvTable::str() const {
  std::ostringstream s;
  write(s);
  return s.str();
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  write(out);
}

}  // namespace homokin
