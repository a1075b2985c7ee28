// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "calibatlas/driver.hpp"
#include "calibatlas/error.hpp"
#include "jsonout.hpp"
#include "report_internal.hpp"
#include "schemas.hpp"

namespace calibatlas {

std::string render_report_json(const ReportDoc& doc) {
  JsonWriter w;
  w.begin_object();
  w.key("provenance");
  w.begin_object();
  w.key("tool");
  w.value(kToolName);
  w.key("version");
  w.value(kToolVersion);
  w.key("config_path");
  w.value(doc.config_path);
  w.key("config_hash");
  w.value(doc.config_hash);
  w.key("input_path");
  w.value(doc.input_path);
  w.key("format");
  w.value(doc.format);
  w.key("seed");
  w.value(doc.seed);
  w.key("aggregation");
  w.value(doc.aggregation);
  w.end_object();

  w.key("metrics");
  w.begin_object();
  for (const ReportMetric& m : doc.metrics) {
    w.key(m.name);
    w.begin_object();
    w.key("quantity");
    w.value(m.quantity);
    w.key("levels");
    w.begin_array();
    for (const ReportLevelRow& row : m.levels) {
      w.begin_object();
      w.key("level");
      w.value(row.level);
      w.key("weight");
      w.value(row.weight);
      w.key("residual");
      w.value(row.residual);
      if (row.observed_real) {
        w.key("observed");
        w.value(*row.observed_real);
      } else if (row.observed_text) {
        w.key("observed");
        w.value(*row.observed_text);
      }
      if (row.predicted_real) {
        w.key("predicted");
        w.value(*row.predicted_real);
      } else if (row.predicted_text) {
        w.key("predicted");
        w.value(*row.predicted_text);
      }
      if (row.predicted_pmf) {
        w.key("predicted_pmf");
        w.begin_array();
        for (double x : *row.predicted_pmf) w.value(x);
        w.end_array();
      }
      if (row.observed_pmf) {
        w.key("observed_pmf");
        w.begin_array();
        for (double x : *row.observed_pmf) w.value(x);
        w.end_array();
      }
      w.end_object();
    }
    w.end_array();
    if (m.aggregate) {
      w.key("aggregate");
      w.value(*m.aggregate);
    }
    w.key("tolerance");
    w.value(m.tolerance);
    if (m.expected) {
      w.key("expected");
      w.value(*m.expected);
    }
    w.key("verdict");
    w.value(m.verdict);
    if (!m.error.empty()) {
      w.key("error");
      w.value(m.error);
    }
    w.end_object();
  }
  w.end_object();

  w.key("skipped_levels");
  w.begin_array();
  for (const std::string& s : doc.skipped_levels) w.value(s);
  w.end_array();
  w.key("warnings");
  w.begin_array();
  for (const std::string& s : doc.warnings) w.value(s);
  w.end_array();
  if (doc.failed) {
    w.key("failed");
    w.value(true);
  }
  w.end_object();
  return w.take();
}

namespace {

using nlohmann::json;

// Minimal CSV quoting: only fields containing a comma, quote, or newline are
// wrapped (level renderings use ';' and '>', so this is rarely triggered).
std::string csv_field(const std::string& s) {
  bool needs = s.find_first_of(",\"\n") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string cell(const json& row, const char* key) {
  auto it = row.find(key);
  if (it == row.end()) return "";
  if (it->is_number()) return format_real(it->get<double>());
  if (it->is_string()) return csv_field(it->get<std::string>());
  return "";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorCode::kIoError, "write failed for '" + path.string() + "'");
}

}  // namespace

std::vector<std::string> emit_plot_files(const std::string& report_json,
                                         const std::string& out_dir) {
  json report;
  try {
    report = json::parse(report_json);
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaError, std::string("invalid report JSON: ") + e.what());
  }
  if (!report.is_object() || !report.contains("metrics") || !report["metrics"].is_object())
    fail(ErrorCode::kSchemaError, "report JSON has no metrics object");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create directory '" + out_dir + "'");

  std::vector<std::string> written;
  std::string simplex = "metric,level,weight,p0,p1,p2,o0,o1,o2\n";
  bool any_simplex = false;

  // nlohmann objects iterate in sorted key order, so output is deterministic.
  for (auto it = report["metrics"].begin(); it != report["metrics"].end(); ++it) {
    const std::string& name = it.key();
    const json& metric = it.value();
    std::string csv = "level,weight,observed,predicted,residual\n";
    if (metric.contains("levels") && metric["levels"].is_array()) {
      for (const json& row : metric["levels"]) {
        csv += cell(row, "level") + "," + cell(row, "weight") + "," + cell(row, "observed") +
               "," + cell(row, "predicted") + "," + cell(row, "residual") + "\n";
        if (row.contains("predicted_pmf") && row["predicted_pmf"].is_array() &&
            row["predicted_pmf"].size() == 3 && row.contains("observed_pmf") &&
            row["observed_pmf"].is_array() && row["observed_pmf"].size() == 3) {
          any_simplex = true;
          simplex += csv_field(name) + "," + cell(row, "level") + "," + cell(row, "weight");
          for (const json& x : row["predicted_pmf"]) simplex += "," + format_real(x.get<double>());
          for (const json& x : row["observed_pmf"]) simplex += "," + format_real(x.get<double>());
          simplex += "\n";
        }
      }
    }
    fs::path path = fs::path(out_dir) / (name + ".reliability.csv");
    write_file(path, csv);
    written.push_back(path.string());
  }
  if (any_simplex) {
    fs::path path = fs::path(out_dir) / "simplex.csv";
    write_file(path, simplex);
    written.push_back(path.string());
  }
  return written;
}

std::string config_schema_json() { return kConfigSchemaJson; }
std::string report_schema_json() { return kReportSchemaJson; }

}  // namespace calibatlas
