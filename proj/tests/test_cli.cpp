#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bhp/error.hpp"
#include "bhp_cli/config.hpp"
#include "bhp_cli/runner.hpp"
#include "bhp_cli/toml_lite.hpp"

using namespace bhp;
using namespace bhp::cli;
using nlohmann::json;

namespace {

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

json theta_kr_doc() {
  return json::parse(R"({
    "experiment": "theta_kr", "seed": 3,
    "model": {"d": 2, "lambda": 2.0, "lambda_prime": 0.3, "r": 2.0},
    "mc": {"n_reps": 4},
    "theta_kr": {"k": [1, 2], "window": 16.0, "estimator": "both"}
  })");
}

std::string csv_for(json doc, int threads, const std::filesystem::path& out) {
  doc["threads"] = threads;
  doc["out"] = out.string();
  std::ostringstream line, log;
  REQUIRE(run_and_write(parse_config(doc), line, log) == kOk);
  std::ifstream in(out / "results.csv", std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("bhp_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("toml subset") {
  const json j = parse_toml(R"(# comment
title = "x" # trailing
n = 3
f = -2.5e-1
big = inf
flag = true
lit = 'a\b'
arr = [1, 2,
       3]
[a.b]
c = { d = 1, e = "s" }
"quoted key" = 1
)");
  CHECK(j["title"] == "x");
  CHECK(j["n"] == 3);
  CHECK(j["f"].get<double>() == doctest::Approx(-0.25));
  CHECK(std::isinf(j["big"].get<double>()));
  CHECK(j["flag"] == true);
  CHECK(j["lit"] == "a\\b");
  CHECK(j["arr"] == json::array({1, 2, 3}));
  CHECK(j["a"]["b"]["c"]["d"] == 1);
  CHECK(j["a"]["b"]["quoted key"] == 1);
  CHECK_THROWS_AS(parse_toml("x = \n"), Error);
  CHECK_THROWS_AS(parse_toml("x = 1\nx = 2\n"), Error);
}

TEST_CASE("unknown keys are named") {
  json doc = theta_kr_doc();
  doc["model"]["lamda"] = 1.0;
  CHECK(error_of(doc).find("model.lamda") != std::string::npos);
  doc = theta_kr_doc();
  doc["bogus"] = 1;
  CHECK(error_of(doc).find("bogus") != std::string::npos);
  doc = theta_kr_doc();
  doc["theta_kr"]["windw"] = 1;
  CHECK(error_of(doc).find("theta_kr.windw") != std::string::npos);
}

TEST_CASE("infeasible windows name the truncation rule") {
  json doc = theta_kr_doc();
  doc["theta_kr"]["k"] = json::array({1, 10});
  CHECK(error_of(doc).find("truncation rule") != std::string::npos);
  doc = theta_kr_doc();
  doc.erase("seed");
  CHECK(error_of(doc).find("seed") != std::string::npos);
  doc = theta_kr_doc();
  doc["model"]["lambda"] = -1.0;
  CHECK_FALSE(error_of(doc).empty());
}

TEST_CASE("no stations gives zero rows") {
  json doc = theta_kr_doc();
  doc["model"]["lambda_prime"] = 0.0;
  const RunOutcome out = run_experiment(parse_config(doc), std::cerr);
  REQUIRE(out.exit_code == kOk);
  REQUIRE(out.rows.size() == 4);
  for (const auto& row : out.rows) CHECK(row.estimate.value() == 0.0);
}

TEST_CASE("csv format") {
  std::ostringstream os;
  CsvRow row;
  row.experiment = "x";
  row.lambda = 0.1;
  row.estimate = 1.0 / 3.0;
  row.extra = json{{"a", "b"}};
  write_csv(os, {row});
  CHECK(os.str() == std::string(kCsvHeader) + "\nx,2,0.10000000000000001,0,,,0.33333333333333331,,,,,\"{\"\"a\"\":\"\"b\"\"}\"\n");
}

TEST_CASE("results do not depend on threads and replay from the manifest") {
  const auto dir = scratch("cli");
  const std::string one = csv_for(theta_kr_doc(), 1, dir / "t1");
  CHECK(one.rfind(kCsvHeader, 0) == 0);
  CHECK(csv_for(theta_kr_doc(), 4, dir / "t4") == one);
  CHECK(csv_for(theta_kr_doc(), 8, dir / "t8") == one);

  json replay = load_config_file(dir / "t1" / "manifest.json");
  CHECK(csv_for(replay, 2, dir / "replay") == one);

  json other = theta_kr_doc();
  other["seed"] = 4;
  CHECK(csv_for(other, 1, dir / "s4") != one);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bundled configs parse") {
  const std::filesystem::path dir = BHP_CONFIG_DIR;
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".toml") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(parse_config(load_config_file(entry.path())));
    ++seen;
  }
  CHECK(seen >= 7);
}

TEST_CASE("precondition failures exit nonzero") {
  json doc = json::parse(R"({
    "experiment": "subcritical_bound", "seed": 1,
    "model": {"d": 2, "lambda": 4.0, "lambda_prime": 1.0, "r": 3.0},
    "mc": {"n_reps": 3},
    "subcritical_bound": {"k": [1, 2], "window": 20.0, "palm_window": 20.0}
  })");
  doc["out"] = scratch("pre").string();
  std::ostringstream line, log;
  CHECK(run_and_write(parse_config(doc), line, log) == kPrecondition);
  CHECK(json::parse(line.str())["status"] == "error");
  std::filesystem::remove_all(doc["out"].get<std::string>());
}
