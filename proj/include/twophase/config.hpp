#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twophase/model.hpp"

namespace twophase {

/// Flat configuration document: dotted keys to string values.
///
/// Reads either JSON (nested objects flatten to dotted keys) or a key-value
/// text with optional [section] headers. Serialization is canonical (sorted
/// "key = value" lines), so the hash identifies the run.
class ConfigDoc {
 public:
  static ConfigDoc parse(const std::string& text);
  static ConfigDoc load(const std::string& path);

  std::string serialize() const;
  std::string to_json(int indent = 2) const;
  /// FNV-1a over serialize().
  std::uint64_t hash() const;
  std::string hash_hex() const;

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void set(const std::string& key, double value);
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  /// Relative file paths in the document resolve against the directory of
  /// the file it was loaded from.
  std::string resolve_path(const std::string& path) const;

  bool operator==(const ConfigDoc& other) const { return entries_ == other.entries_; }

 private:
  std::map<std::string, std::string> entries_;
  std::string base_dir_;
};

/// Builds the model block ("model.*"). Throws ConfigError on bad input.
TwoPhaseModel model_from_config(const ConfigDoc& doc);

/// Command parameters ("run.*" and "closed.*").
struct RunParams {
  double dt = 1e-3;
  double horizon = 100.0;
  std::uint64_t replicates = 100;
  std::uint64_t chain_length = 1000;
  std::uint64_t paths = 10000;
  std::uint64_t seed = 1;
  std::string out = ".";
  bool bridge = true;
  int parallel = 1;
  std::vector<double> probes;
  double hit_z = 5.0;
  double hit_c = 1.0;
  double closed_b = 1.0;
  double closed_c = 0.5;  // may be +inf
  double closed_gamma = 1.0;
  double closed_a = 1.0;
};

RunParams run_from_config(const ConfigDoc& doc);

/// Seed precedence: explicit flag, then TWOPHASE_SEED, then the config.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const ConfigDoc& doc);

}  // namespace twophase
