#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "twophase/config.hpp"

namespace twophase {

/// Minimal CSV writer: RFC 4180 quoting, doubles at full precision.
class CsvWriter {
 public:
  using Cell = std::variant<double, std::int64_t, std::string>;

  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void row(const std::vector<Cell>& cells);
  void header(const std::vector<std::string>& names);

  static std::string quote(const std::string& s);
  static std::string format(double v);

 private:
  std::ostream& os_;
};

/// Comment lines with the canonical config, its hash and the seed, so the
/// file can be regenerated.
void write_provenance(std::ostream& os, const ConfigDoc& doc, std::uint64_t seed);

/// Numeric rows of a CSV file, skipping '#' comments and a non-numeric header.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path);

}  // namespace twophase
