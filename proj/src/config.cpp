#include "twophase/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "twophase/io.hpp"
#include "twophase/regeneration.hpp"
#include "twophase/scale.hpp"

namespace twophase {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void flatten(const json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  auto scalar = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return format_double(v.get<double>());
    config_error("unsupported JSON value " + v.dump());
  };
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array()) {
    std::string joined;
    for (const auto& e : j) {
      if (!joined.empty()) joined += ",";
      if (e.is_array()) {
        // [depth, coefficient] pairs
        std::string pair;
        for (const auto& p : e) pair += (pair.empty() ? "" : ":") + scalar(p);
        joined += pair;
      } else {
        joined += scalar(e);
      }
    }
    out[prefix] = joined;
  } else if (!j.is_null()) {
    out[prefix] = scalar(j);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

}  // namespace

ConfigDoc ConfigDoc::parse(const std::string& text) {
  ConfigDoc doc;
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    json j;
    try {
      j = json::parse(t);
    } catch (const json::exception& e) {
      config_error(std::string("bad JSON config: ") + e.what());
    }
    flatten(j, "", doc.entries_);
    return doc;
  }
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error("unterminated section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) config_error("empty key at line " + std::to_string(lineno));
    doc.entries_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ConfigDoc doc = parse(ss.str());
  doc.base_dir_ = std::filesystem::path(path).parent_path().string();
  return doc;
}

std::string ConfigDoc::resolve_path(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir_.empty()) return path;
  return (std::filesystem::path(base_dir_) / p).string();
}

std::string ConfigDoc::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

std::string ConfigDoc::to_json(int indent) const {
  json root = json::object();
  for (const auto& [k, v] : entries_) {
    json* node = &root;
    for (const auto& part : split(k, '.')) node = &(*node)[part];
    // Only canonical numbers become JSON numbers, so parsing back is lossless.
    const auto d = parse_double(v);
    if (d && std::isfinite(*d) && format_double(*d) == v) {
      *node = *d;
    } else if (v == "true" || v == "false") {
      *node = v == "true";
    } else {
      *node = v;
    }
  }
  return root.dump(indent);
}

std::uint64_t ConfigDoc::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string ConfigDoc::hash_hex() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::optional<std::string> ConfigDoc::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string ConfigDoc::text(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double ConfigDoc::number(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const auto d = parse_double(*v);
  if (!d) config_error("key " + key + " expects a number, got '" + *v + "'");
  return *d;
}

std::uint64_t ConfigDoc::integer(const std::string& key, std::uint64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const std::string s = trim(*v);
  std::uint64_t out = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty()) return out;
  // Accept 1e6-style counts when they are whole numbers.
  const auto d = parse_double(s);
  if (d && *d >= 0 && *d == std::floor(*d) && *d < 1.8e19) return static_cast<std::uint64_t>(*d);
  config_error("key " + key + " expects a non-negative integer, got '" + *v + "'");
}

bool ConfigDoc::flag(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  config_error("key " + key + " expects a boolean, got '" + *v + "'");
}

std::vector<double> ConfigDoc::numbers(const std::string& key) const {
  std::vector<double> out;
  const auto v = get(key);
  if (!v) return out;
  for (const auto& part : split(*v, ',')) {
    const auto d = parse_double(part);
    if (!d) config_error("key " + key + " has a non-numeric entry '" + part + "'");
    out.push_back(*d);
  }
  return out;
}

void ConfigDoc::set(const std::string& key, double value) { entries_[key] = format_double(value); }

// ---------------------------------------------------------------------------

namespace {

std::vector<LogTerm> parse_terms(const ConfigDoc& doc, const std::string& key) {
  std::vector<LogTerm> terms;
  const auto v = doc.get(key);
  if (!v) config_error("missing " + key);
  for (const auto& part : split(*v, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) config_error(key + " entries must be depth:coefficient");
    const auto depth = parse_double(part.substr(0, colon));
    const auto coef = parse_double(part.substr(colon + 1));
    if (!depth || !coef || *depth != std::floor(*depth)) {
      config_error("bad term '" + part + "' in " + key);
    }
    terms.push_back({static_cast<int>(*depth), *coef});
  }
  return terms;
}

std::optional<double> optional_number(const ConfigDoc& doc, const std::string& key) {
  if (!doc.has(key)) return std::nullopt;
  return doc.number(key, 0.0);
}

std::pair<std::vector<double>, std::vector<double>> grid_values(const ConfigDoc& doc,
                                                                const std::string& p) {
  if (const auto file = doc.get(p + ".file")) {
    std::vector<double> g, v;
    for (const auto& row : read_numeric_csv(doc.resolve_path(*file))) {
      if (row.size() < 2) config_error("table " + *file + " needs two columns");
      g.push_back(row[0]);
      v.push_back(row[1]);
    }
    return {g, v};
  }
  return {doc.numbers(p + ".grid"), doc.numbers(p + ".values")};
}

DriftFunction drift_from(const ConfigDoc& doc, const std::string& p, double a, double x0,
                         const DownCrossing& gamma, std::optional<double> transient_value) {
  const std::string kind = doc.text(p + ".kind", "constant");
  if (kind == "constant") {
    if (!doc.has(p + ".value")) config_error("missing " + p + ".value");
    return DriftFunction::constant(doc.number(p + ".value", 0.0));
  }
  if (kind == "iterated_log") {
    return DriftFunction::iterated_log(doc.number(p + ".threshold", 16.0),
                                       parse_terms(doc, p + ".terms"),
                                       optional_number(doc, p + ".below"));
  }
  if (kind == "tabulated") {
    auto [g, v] = grid_values(doc, p);
    return DriftFunction::tabulated(std::move(g), std::move(v));
  }
  if (kind == "theorem2") {
    if (!gamma.is_constant()) config_error("theorem2 drift needs a constant gamma");
    const double b = doc.number(p + ".b", transient_value.value_or(1.0));
    return theorem2_generator(b, gamma.constant_value(), doc.number(p + ".x0", x0), a).drift;
  }
  if (kind == "scale_table") {
    const auto file = doc.get(p + ".file");
    if (!file) config_error("missing " + p + ".file");
    std::vector<double> x, u, up;
    for (const auto& row : read_numeric_csv(doc.resolve_path(*file))) {
      if (row.size() < 3) config_error("scale table " + *file + " needs x, u, u' columns");
      x.push_back(row[0]);
      u.push_back(row[1]);
      up.push_back(row[2]);
    }
    if (x.empty()) config_error("scale table " + *file + " is empty");
    const Interval dom{x.front(), x.back()};
    const double anchor = x.front();
    return DriftFunction::from_scale(
        ScaleData(make_tabulated_scale(std::move(x), std::move(u), std::move(up), a), anchor,
                  dom, a));
  }
  config_error("unknown drift kind '" + kind + "' for " + p);
}

DownCrossing gamma_from(const ConfigDoc& doc) {
  const std::string p = "model.gamma";
  const std::string kind = doc.text(p + ".kind", "constant");
  if (kind == "constant") return DownCrossing::constant(doc.number(p + ".value", 1.0));
  if (kind == "iterated_log") {
    return DownCrossing::iterated_log(doc.number(p + ".threshold", 16.0),
                                      parse_terms(doc, p + ".terms"),
                                      optional_number(doc, p + ".below"));
  }
  if (kind == "tabulated") {
    auto [g, v] = grid_values(doc, p);
    return DownCrossing::tabulated(std::move(g), std::move(v));
  }
  config_error("unknown gamma kind '" + kind + "'");
}

}  // namespace

TwoPhaseModel model_from_config(const ConfigDoc& doc) {
  try {
    const double a = doc.number("model.a", 1.0);
    const double x0 = doc.number("model.x0", 0.0);
    DownCrossing gamma = gamma_from(doc);
    DriftFunction bt = drift_from(doc, "model.transient", a, x0, gamma, std::nullopt);
    std::optional<double> bt_value;
    if (bt.is_constant()) bt_value = bt.constant_value();
    DriftFunction br = drift_from(doc, "model.recurrent", a, x0, gamma, bt_value);
    return TwoPhaseModel::make(std::move(bt), std::move(br), std::move(gamma), x0,
                               optional_number(doc, "model.z0"), a);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(e.code(), std::string("model config: ") + e.what());
  }
}

RunParams run_from_config(const ConfigDoc& doc) {
  RunParams r;
  r.dt = doc.number("run.dt", r.dt);
  r.horizon = doc.number("run.horizon", r.horizon);
  r.replicates = doc.integer("run.replicates", r.replicates);
  r.chain_length = doc.integer("run.chain_length", r.chain_length);
  r.paths = doc.integer("run.paths", r.paths);
  r.seed = doc.integer("run.seed", r.seed);
  r.out = doc.text("run.out", r.out);
  r.bridge = doc.flag("run.bridge", r.bridge);
  r.parallel = static_cast<int>(doc.integer("run.parallel", 1));
  r.probes = doc.numbers("run.probes");
  r.hit_z = doc.number("run.z", r.hit_z);
  r.hit_c = doc.number("run.c", r.hit_c);
  r.closed_b = doc.number("closed.b", r.closed_b);
  r.closed_c = doc.number("closed.c", r.closed_c);
  r.closed_gamma = doc.number("closed.gamma", r.closed_gamma);
  r.closed_a = doc.number("closed.a", r.closed_a);
  return r;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const ConfigDoc& doc) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TWOPHASE_SEED")) {
    ConfigDoc tmp;
    tmp.set("seed", std::string(env));
    return tmp.integer("seed", 0);
  }
  return doc.integer("run.seed", 1);
}

}  // namespace twophase
