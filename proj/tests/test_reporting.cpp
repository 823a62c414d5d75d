#include "doctest.h"

#include "nlhconv/reporting.hpp"
#include "nlhconv/types.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

using namespace nlhconv;

namespace {

ReportTable small_table() {
  ReportTable t;
  t.experiment = "means1d";
  t.seed = 42;
  t.verdict = true;
  t.converged = true;
  t.notes = "hand-built";
  t.config = {{"grid", "16"}, {"tol", "0.5"}};
  t.rows.push_back({1, "alpha", 0.5, 0.75, 0.25});
  t.rows.push_back({2, "beta", 1.0 / 3.0, 0.0, 1.0 / 3.0});
  return t;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("experiment names round-trip and reject unknowns") {
  const char* names[] = {"verify", "means1d", "homog1d", "hlimit3d",
                         "bcgap",  "conv",    "maxwell", "divcurl"};
  for (const char* name : names)
    CHECK(experiment_name(experiment_from_name(name)) == name);
  CHECK_THROWS_AS(experiment_from_name("fourier"), ConfigError);
  CHECK_THROWS_AS(experiment_from_name(""), ConfigError);
}

TEST_CASE("csv serialization is exact and deterministic") {
  const ReportTable t = small_table();
  const std::string csv = to_csv(t);
  const std::string expected =
      "n,quantity,value,reference,error\n"
      "1,alpha,0.5,0.75,0.25\n"
      "2,beta,0.33333333333333331,0,0.33333333333333331\n";
  CHECK(csv == expected);
  CHECK(to_csv(t) == csv);

  ReportTable empty;
  empty.experiment = "verify";
  CHECK(to_csv(empty) == "n,quantity,value,reference,error\n");
}

TEST_CASE("json serialization round-trips through the parser") {
  const ReportTable t = small_table();
  const std::string text = to_json(t);
  const ReportTable back = table_from_json(text);
  CHECK(back.experiment == t.experiment);
  CHECK(back.seed == t.seed);
  CHECK(back.verdict == t.verdict);
  CHECK(back.converged == t.converged);
  CHECK(back.notes == t.notes);
  REQUIRE(back.config.size() == t.config.size());
  for (size_t i = 0; i < t.config.size(); ++i) {
    CHECK(back.config[i].first == t.config[i].first);
    CHECK(back.config[i].second == t.config[i].second);
  }
  REQUIRE(back.rows.size() == t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i].n == t.rows[i].n);
    CHECK(back.rows[i].quantity == t.rows[i].quantity);
    CHECK(back.rows[i].value == t.rows[i].value);  // bit-exact through %.17g
    CHECK(back.rows[i].reference == t.rows[i].reference);
    CHECK(back.rows[i].error == t.rows[i].error);
  }
  CHECK(to_json(back) == text);
}

TEST_CASE("json parser rejects schema violations") {
  CHECK_THROWS_AS(table_from_json("not json"), IoError);
  CHECK_THROWS_AS(table_from_json("{}"), IoError);
  CHECK_THROWS_AS(table_from_json("[1,2]"), IoError);
  std::string good = to_json(small_table());
  // wrong schema tag
  std::string bad = good;
  bad.replace(bad.find("nlhconv-report-v1"), 17, "nlhconv-report-v9");
  CHECK_THROWS_AS(table_from_json(bad), IoError);
}

TEST_CASE("config json applies known keys and rejects the rest") {
  const ExperimentConfig cfg = config_from_json(
      R"({"experiment": "homog1d", "grid": 128, "n_max": 16, "tol": 0.25,
          "seed": 7, "out": "r.json", "format": "json"})");
  CHECK(cfg.experiment == ExperimentKind::homog1d);
  CHECK(cfg.grid == 128);
  CHECK(cfg.n_max == 16);
  CHECK(cfg.probe_k == 0);
  CHECK(cfg.tol == 0.25);
  CHECK(cfg.seed == 7);
  CHECK(cfg.out == "r.json");
  CHECK(cfg.format == "json");

  CHECK_THROWS_AS(config_from_json(R"({"gird": 8})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"grid": "eight"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"format": "xml"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("[]"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{bad"), ConfigError);

  // defaults survive an empty object
  const ExperimentConfig d = config_from_json("{}");
  CHECK(d.experiment == ExperimentKind::verify);
  CHECK(d.grid == 0);
  CHECK(d.format == "csv");

  // config_to_json round-trips
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.experiment == cfg.experiment);
  CHECK(back.grid == cfg.grid);
  CHECK(back.tol == cfg.tol);
  CHECK(back.out == cfg.out);
}

TEST_CASE("emit writes files and surfaces io errors") {
  const ReportTable t = small_table();
  const std::string path = "emit_test_report.csv";
  emit(t, "csv", path);
  CHECK(slurp(path) == to_csv(t));
  std::remove(path.c_str());

  const std::string jpath = "emit_test_report.json";
  emit(t, "json", jpath);
  CHECK(slurp(jpath) == to_json(t));
  std::remove(jpath.c_str());

  CHECK_THROWS_AS(emit(t, "csv", ""), IoError);
  CHECK_THROWS_AS(emit(t, "csv", "/nonexistent-dir/x/y.csv"), IoError);
  CHECK_THROWS_AS(emit(t, "yaml", "x.yaml"), ConfigError);
}
