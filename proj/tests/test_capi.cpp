// SPDX-License-Identifier: Apache-2.0
// Black-box tests of the shared library's C interface.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "calibatlas.h"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using njson = nlohmann::json;

namespace {

std::string fixture(const char* name) {
  return std::string(CALIBATLAS_FIXTURE_DIR) + "/" + name;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("calibatlas_capi_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("version and schema text are exposed") {
  std::string v = ca_version();
  CHECK(v.rfind("calib-atlas ", 0) == 0);

  char* text = nullptr;
  REQUIRE(ca_schema_json("config", &text) == CA_OK);
  CHECK(njson::parse(text)["properties"].contains("metrics"));
  ca_string_free(text);

  text = nullptr;
  REQUIRE(ca_schema_json("report", &text) == CA_OK);
  CHECK(njson::parse(text)["properties"].contains("provenance"));
  ca_string_free(text);

  text = nullptr;
  CHECK(ca_schema_json("nope", &text) == CA_BAD_PARAM);
  CHECK(text == nullptr);  // out-params are written only on CA_OK
  CHECK(std::string(ca_last_error()).find("nope") != std::string::npos);
  CHECK(ca_schema_json(nullptr, &text) == CA_BAD_PARAM);
}

TEST_CASE("audits run from config files and reports round-trip through files") {
  ca_report* rep = nullptr;
  REQUIRE(ca_audit_run(fixture("halfpred_config.json").c_str(), &rep) == CA_OK);
  CHECK(ca_report_all_pass(rep) == 1);

  char* json_text = nullptr;
  REQUIRE(ca_report_json(rep, &json_text) == CA_OK);
  njson doc = njson::parse(json_text);
  CHECK(doc["provenance"]["tool"] == "calib-atlas");
  CHECK(doc["metrics"].size() >= 2);

  fs::path dir = fresh_dir("report");
  fs::path out = dir / "nested" / "report.json";  // parent dirs are created
  REQUIRE(ca_report_write(rep, out.string().c_str()) == CA_OK);
  CHECK(read_text(out) == std::string(json_text));

  ca_string_free(json_text);
  ca_report_free(rep);

  // A failing expectation is a normal run with all_pass == 0.
  ca_report* bad = nullptr;
  REQUIRE(ca_audit_run(fixture("halfpred_mismatch_config.json").c_str(), &bad) == CA_OK);
  CHECK(ca_report_all_pass(bad) == 0);
  ca_report_free(bad);

  ca_report* none = nullptr;
  fs::path missing = dir / "missing.json";
  CHECK(ca_audit_run(missing.string().c_str(), &none) == CA_IO_ERROR);
  CHECK(none == nullptr);
  CHECK(std::string(ca_last_error()).find("missing.json") != std::string::npos);
  CHECK(ca_audit_run(nullptr, &none) == CA_BAD_PARAM);
  CHECK(ca_audit_run(missing.string().c_str(), nullptr) == CA_BAD_PARAM);
  CHECK(ca_report_all_pass(nullptr) == 0);
}

TEST_CASE("datasets load and serialize through the C surface") {
  ca_dataset* ds = nullptr;
  REQUIRE(ca_dataset_load(fixture("meanvar_config.json").c_str(), &ds) == CA_OK);

  size_t n = 0;
  REQUIRE(ca_dataset_size(ds, &n) == CA_OK);
  CHECK(n > 0);
  double w = 0.0;
  REQUIRE(ca_dataset_total_weight(ds, &w) == CA_OK);
  CHECK(w > 0.0);

  char* text = nullptr;
  REQUIRE(ca_dataset_jsonl(ds, &text) == CA_OK);
  std::string jsonl(text);
  std::size_t lines = 0;
  for (char ch : jsonl) lines += ch == '\n';
  CHECK(lines == n);
  njson first = njson::parse(jsonl.substr(0, jsonl.find('\n')));
  CHECK(first.contains("x_id"));
  CHECK(first.contains("pred"));
  ca_string_free(text);
  ca_dataset_free(ds);

  CHECK(ca_dataset_size(nullptr, &n) == CA_BAD_PARAM);
  ca_dataset* none = nullptr;
  CHECK(ca_dataset_load("/definitely/not/here.json", &none) == CA_IO_ERROR);
  CHECK(none == nullptr);
}

TEST_CASE("verification manifests are deterministic through the C surface") {
  ca_report* m1 = nullptr;
  ca_report* m2 = nullptr;
  REQUIRE(ca_verify_run("counterexamples", 7, 1.0, &m1) == CA_OK);
  REQUIRE(ca_verify_run("counterexamples", 7, 1.0, &m2) == CA_OK);
  CHECK(ca_report_all_pass(m1) == 1);

  char* t1 = nullptr;
  char* t2 = nullptr;
  REQUIRE(ca_report_json(m1, &t1) == CA_OK);
  REQUIRE(ca_report_json(m2, &t2) == CA_OK);
  CHECK(std::string(t1) == std::string(t2));
  CHECK(njson::parse(t1)["counterexamples"].size() == 5);
  ca_string_free(t1);
  ca_string_free(t2);
  ca_report_free(m1);
  ca_report_free(m2);

  // Fault injection must flip the verdict.
  ca_report* tampered = nullptr;
  REQUIRE(ca_verify_run("edges", 7, 1e-6, &tampered) == CA_OK);
  CHECK(ca_report_all_pass(tampered) == 0);
  ca_report_free(tampered);

  ca_report* none = nullptr;
  CHECK(ca_verify_run("bogus", 1, 1.0, &none) == CA_BAD_PARAM);
  CHECK(none == nullptr);
}

TEST_CASE("plots emit from a written report") {
  ca_report* rep = nullptr;
  REQUIRE(ca_audit_run(fixture("halfpred_config.json").c_str(), &rep) == CA_OK);
  fs::path dir = fresh_dir("plots");
  fs::path report_path = dir / "report.json";
  REQUIRE(ca_report_write(rep, report_path.string().c_str()) == CA_OK);
  ca_report_free(rep);

  char* listing = nullptr;
  REQUIRE(ca_plot_emit(report_path.string().c_str(), (dir / "plots").string().c_str(),
                       &listing) == CA_OK);
  std::string files(listing);
  ca_string_free(listing);
  CHECK(files.find(".reliability.csv") != std::string::npos);
  std::istringstream iss(files);
  std::string line;
  std::size_t found = 0;
  while (std::getline(iss, line)) {
    CHECK(fs::exists(line));
    ++found;
  }
  CHECK(found >= 1);

  // The listing is optional.
  REQUIRE(ca_plot_emit(report_path.string().c_str(), (dir / "plots2").string().c_str(),
                       nullptr) == CA_OK);
  CHECK(fs::exists(dir / "plots2"));

  CHECK(ca_plot_emit((dir / "nope.json").string().c_str(), (dir / "x").string().c_str(),
                     nullptr) == CA_IO_ERROR);
}
