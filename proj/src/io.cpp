#include "twophase/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "twophase/error.hpp"

namespace twophase {

std::string CsvWriter::quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CsvWriter::format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvWriter::header(const std::vector<std::string>& names) {
  std::vector<Cell> cells(names.begin(), names.end());
  row(cells);
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os_ << ',';
    first = false;
    if (const auto* d = std::get_if<double>(&c)) {
      os_ << format(*d);
    } else if (const auto* i = std::get_if<std::int64_t>(&c)) {
      os_ << *i;
    } else {
      os_ << quote(std::get<std::string>(c));
    }
  }
  os_ << "\r\n";
}

void write_provenance(std::ostream& os, const ConfigDoc& doc, std::uint64_t seed) {
  os << "# config_hash = " << doc.hash_hex() << "\n";
  os << "# seed = " << seed << "\n";
  std::istringstream lines(doc.serialize());
  std::string line;
  while (std::getline(lines, line)) os << "# config: " << line << "\n";
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open table " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        numeric = numeric && used == cell.size();
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw Error(ErrorCode::ConfigError, "non-numeric row in " + path + ": " + line);
    }
    header_allowed = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace twophase
