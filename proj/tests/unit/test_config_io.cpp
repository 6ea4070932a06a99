#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "twophase/config.hpp"
#include "twophase/error.hpp"
#include "twophase/io.hpp"
#include "twophase/regeneration.hpp"

using namespace twophase;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = TWOPHASE_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "twophase_test_config_io";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ConfigDoc, KeyValueAndJsonAgree) {
  const auto kv = ConfigDoc::parse(R"(
# comment
[model]
x0 = 16
transient.value = 1
recurrent.value = 0
[model.gamma]
kind = iterated_log
terms = 2:0.5, 3:0.5
[run]
chain_length = 1e4
bridge = true
)");
  const auto js = ConfigDoc::parse(R"({"model": {"x0": 16, "transient": {"value": 1}, "recurrent": {"value": 0}, "gamma": {"kind": "iterated_log",
      "terms": [[2, 0.5], [3, 0.5]]}}, "run": {"chain_length": 10000, "bridge": true}})");
  EXPECT_EQ(kv.text("model.gamma.kind", ""), "iterated_log");
  EXPECT_EQ(kv.number("model.x0", 0), js.number("model.x0", 0));
  EXPECT_EQ(kv.integer("run.chain_length", 0), 10000u);
  EXPECT_EQ(js.integer("run.chain_length", 0), 10000u);
  EXPECT_TRUE(kv.flag("run.bridge", false));
  EXPECT_TRUE(js.flag("run.bridge", false));
  const auto a = model_from_config(kv), b = model_from_config(js);
  for (double x : {20.0, 1e3, 1e6}) EXPECT_EQ(a.gamma(x), b.gamma(x));
}

TEST(ConfigDoc, SerializeRoundTripsAndHashes) {
  const auto doc = ConfigDoc::load(kConfigs + "/loglog_k2.conf");
  const auto again = ConfigDoc::parse(doc.serialize());
  EXPECT_EQ(doc, again);
  EXPECT_EQ(doc.hash(), again.hash());
  EXPECT_EQ(doc.hash_hex().size(), 16u);
  const auto via_json = ConfigDoc::parse(doc.to_json());
  EXPECT_EQ(via_json.number("model.x0", 0), 16.0);
  EXPECT_EQ(via_json.text("model.transient.terms", ""), doc.text("model.transient.terms", "x"));

  auto changed = doc;
  changed.set("run.seed", 2.0);
  EXPECT_NE(changed.hash(), doc.hash());
  // Order of input lines does not matter.
  EXPECT_EQ(ConfigDoc::parse("a = 1\nb = 2\n").hash(), ConfigDoc::parse("b = 2\na = 1\n").hash());
}

TEST(ConfigDoc, HashIsFnv1a) {
  // FNV-1a 64 of "a = 1\n".
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : std::string("a = 1\n")) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  EXPECT_EQ(ConfigDoc::parse("a=1").hash(), h);
}

TEST(ConfigDoc, Accessors) {
  const auto d = ConfigDoc::parse("x = inf\ny = 1,2.5, 3\nz = nope\nn = 2.5\n");
  EXPECT_TRUE(std::isinf(d.number("x", 0)));
  EXPECT_EQ(d.numbers("y"), (std::vector<double>{1, 2.5, 3}));
  EXPECT_EQ(d.number("missing", 7.0), 7.0);
  EXPECT_EQ(code_of([&] { d.number("z", 0); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { d.integer("n", 0); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { d.flag("z", false); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { ConfigDoc::parse("[open\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { ConfigDoc::parse("{\"a\": [1,"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { ConfigDoc::load("/nonexistent/file.conf"); }), ErrorCode::ConfigError);
}

TEST(ModelConfig, ShippedConfigsBuildAndClassify) {
  struct Case {
    const char* file;
    Classification want;
  };
  for (const auto& c : {Case{"recurrent_constant.conf", Classification::Recurrent},
                        Case{"loglog_k2.conf", Classification::Transient},
                        Case{"growing_gamma.json", Classification::Recurrent},
                        Case{"ballistic.conf", Classification::Unknown}}) {
    const auto m = model_from_config(ConfigDoc::load(kConfigs + "/" + c.file));
    EXPECT_EQ(classify(m).result, c.want) << c.file;
  }
}

TEST(ModelConfig, TabulatedFileResolvesRelativeToConfig) {
  const auto doc = ConfigDoc::load(kConfigs + "/hitting.conf");
  const auto m = model_from_config(doc);
  EXPECT_EQ(m.recurrent.kind(), DriftKind::Tabulated);
  const double z0 = m.z0;
  EXPECT_NEAR(m.recurrent(z0 + 1.0), 0.25, 1e-3);
}

TEST(ModelConfig, Theorem2Kind) {
  const auto doc = ConfigDoc::parse(R"(
[model]
x0 = 1
[model.transient]
value = 1
[model.recurrent]
kind = theorem2
)");
  const auto m = model_from_config(doc);
  const auto gen = theorem2_generator(1.0, 1.0, 1.0);
  for (double x : {2.5, 3.02, 10.0}) EXPECT_EQ(m.recurrent(x), gen.drift(x));
}

TEST(ModelConfig, ScaleTableKind) {
  // u = x + x^3/3 on [0, 2]: u' = 1 + x^2, drift -(1/2) 2x / (1 + x^2).
  const auto table = scratch("scale.csv");
  std::ostringstream os;
  os << "x,u,du\n";
  for (int i = 0; i <= 2000; ++i) {
    const double x = i * 1e-3;
    os << CsvWriter::format(x) << ',' << CsvWriter::format(x + x * x * x / 3) << ','
       << CsvWriter::format(1 + x * x) << '\n';
  }
  write(table, os.str());
  const auto conf = scratch("scale.conf");
  write(conf, "[model.transient]\nvalue = 1\n[model.recurrent]\nkind = scale_table\nfile = scale.csv\n"
              "[model]\nx0 = 3\n");
  const auto m = model_from_config(ConfigDoc::load(conf.string()));
  for (double x : {0.5, 1.0, 1.5}) EXPECT_NEAR(m.recurrent(x), -x / (1 + x * x), 1e-6) << x;
}

TEST(ModelConfig, Errors) {
  EXPECT_EQ(code_of([] { model_from_config(ConfigDoc::parse("model.transient.kind = magic")); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { model_from_config(ConfigDoc::parse("model.transient.kind = constant")); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] {
              model_from_config(ConfigDoc::parse(
                  "model.transient.kind = iterated_log\nmodel.transient.terms = 2-0.5\n"
                  "model.recurrent.value = 0"));
            }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] {
              model_from_config(ConfigDoc::parse(
                  "model.transient.value = 1\nmodel.recurrent.kind = theorem2\n"
                  "model.gamma.kind = tabulated\nmodel.gamma.grid = 0, 10\nmodel.gamma.values = 1, 2"));
            }),
            ErrorCode::ConfigError);
}

TEST(RunConfig, DefaultsAndOverrides) {
  const auto p = run_from_config(ConfigDoc::parse(
      "[run]\ndt = 1e-4\nprobes = 1, 2\nparallel = 3\nbridge = false\n[closed]\nc = inf\n"));
  EXPECT_EQ(p.dt, 1e-4);
  EXPECT_EQ(p.probes, (std::vector<double>{1, 2}));
  EXPECT_EQ(p.parallel, 3);
  EXPECT_FALSE(p.bridge);
  EXPECT_TRUE(std::isinf(p.closed_c));
  EXPECT_EQ(p.horizon, RunParams{}.horizon);
}

TEST(RunConfig, SeedPrecedence) {
  const auto doc = ConfigDoc::parse("run.seed = 11");
  unsetenv("TWOPHASE_SEED");
  EXPECT_EQ(resolve_seed(std::nullopt, ConfigDoc{}), 1u);
  EXPECT_EQ(resolve_seed(std::nullopt, doc), 11u);
  setenv("TWOPHASE_SEED", "22", 1);
  EXPECT_EQ(resolve_seed(std::nullopt, doc), 22u);
  EXPECT_EQ(resolve_seed(33, doc), 33u);
  setenv("TWOPHASE_SEED", "abc", 1);
  EXPECT_EQ(code_of([&] { resolve_seed(std::nullopt, doc); }), ErrorCode::ConfigError);
  unsetenv("TWOPHASE_SEED");
}

TEST(Csv, QuotingAndFormatting) {
  EXPECT_EQ(CsvWriter::quote("plain"), "plain");
  EXPECT_EQ(CsvWriter::quote("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvWriter::quote("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(CsvWriter::quote("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(std::stod(CsvWriter::format(0.1)), 0.1);
  EXPECT_EQ(std::stod(CsvWriter::format(1.0 / 3.0)), 1.0 / 3.0);
  std::ostringstream os;
  CsvWriter w(os);
  w.header({"n", "x", "label"});
  w.row({std::int64_t{3}, 0.5, std::string("a,b")});
  EXPECT_EQ(os.str(), "n,x,label\r\n3,0.5,\"a,b\"\r\n");
}

TEST(Csv, ProvenanceAndReadBack) {
  const auto doc = ConfigDoc::parse("model.x0 = 2\nrun.seed = 5");
  const auto path = scratch("prov.csv");
  {
    std::ofstream os(path);
    write_provenance(os, doc, 5);
    CsvWriter w(os);
    w.header({"a", "b"});
    w.row({1.5, std::int64_t{2}});
    w.row({-3.0, 1e-300});
  }
  std::ifstream is(path);
  std::string all((std::istreambuf_iterator<char>(is)), {});
  EXPECT_NE(all.find("# config_hash = " + doc.hash_hex()), std::string::npos);
  EXPECT_NE(all.find("# seed = 5"), std::string::npos);
  EXPECT_NE(all.find("# config: model.x0 = 2"), std::string::npos);
  const auto rows = read_numeric_csv(path.string());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<double>{1.5, 2.0}));
  EXPECT_EQ(rows[1], (std::vector<double>{-3.0, 1e-300}));
}
