// SPDX-License-Identifier: Apache-2.0
#include "calibatlas.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "calibatlas/config.hpp"
#include "calibatlas/dataset.hpp"
#include "calibatlas/driver.hpp"
#include "calibatlas/error.hpp"
#include "calibatlas/ingest.hpp"

struct ca_report {
  std::string json;
  bool all_pass = false;
};

struct ca_dataset {
  calibatlas::PredictionDataset data;
};

namespace {

thread_local std::string g_last_error;

ca_status set_error(ca_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs `fn`, translating exceptions into status codes (Error codes map 1:1).
template <typename Fn>
ca_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CA_OK;
  } catch (const calibatlas::Error& e) {
    return set_error(static_cast<ca_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CA_UNKNOWN, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CA_UNKNOWN, e.what());
  } catch (...) {
    return set_error(CA_UNKNOWN, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ca_status require(bool ok, const char* what) {
  return ok ? CA_OK : set_error(CA_BAD_PARAM, std::string("null ") + what);
}

}  // namespace

extern "C" {

const char* ca_version(void) {
  static const std::string version =
      std::string(calibatlas::kToolName) + " " + calibatlas::kToolVersion;
  return version.c_str();
}

const char* ca_last_error(void) { return g_last_error.c_str(); }

ca_status ca_audit_run(const char* config_path, ca_report** out_report) {
  if (ca_status s = require(config_path, "config_path"); s != CA_OK) return s;
  if (ca_status s = require(out_report, "out_report"); s != CA_OK) return s;
  return guarded([&] {
    calibatlas::AuditOutcome outcome = calibatlas::run_audit_file(config_path);
    *out_report = new ca_report{std::move(outcome.report_json), outcome.all_pass};
  });
}

ca_status ca_verify_run(const char* suite, uint64_t seed, double bound_scale,
                        ca_report** out_report) {
  if (ca_status s = require(suite, "suite"); s != CA_OK) return s;
  if (ca_status s = require(out_report, "out_report"); s != CA_OK) return s;
  return guarded([&] {
    calibatlas::VerifyOutcome outcome =
        calibatlas::run_verify_suite(suite, seed, bound_scale);
    *out_report = new ca_report{std::move(outcome.manifest_json), outcome.all_pass};
  });
}

ca_status ca_report_json(const ca_report* report, char** out_json) {
  if (ca_status s = require(report, "report"); s != CA_OK) return s;
  if (ca_status s = require(out_json, "out_json"); s != CA_OK) return s;
  return guarded([&] { *out_json = copy_string(report->json); });
}

int ca_report_all_pass(const ca_report* report) {
  return report != nullptr && report->all_pass ? 1 : 0;
}

ca_status ca_report_write(const ca_report* report, const char* path) {
  if (ca_status s = require(report, "report"); s != CA_OK) return s;
  if (ca_status s = require(path, "path"); s != CA_OK) return s;
  return guarded([&] {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(p.parent_path(), ec);
      if (ec)
        calibatlas::fail(calibatlas::ErrorCode::kIoError,
                         "cannot create directory '" + p.parent_path().string() + "'");
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) calibatlas::fail(calibatlas::ErrorCode::kIoError,
                               "cannot write '" + std::string(path) + "'");
    out << report->json;
    out.flush();
    if (!out) calibatlas::fail(calibatlas::ErrorCode::kIoError,
                               "write failed for '" + std::string(path) + "'");
  });
}

ca_status ca_plot_emit(const char* report_path, const char* out_dir, char** out_listing) {
  if (ca_status s = require(report_path, "report_path"); s != CA_OK) return s;
  if (ca_status s = require(out_dir, "out_dir"); s != CA_OK) return s;
  return guarded([&] {
    std::ifstream in(report_path, std::ios::binary);
    if (!in) calibatlas::fail(calibatlas::ErrorCode::kIoError,
                              "cannot read report '" + std::string(report_path) + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::vector<std::string> files = calibatlas::emit_plot_files(buf.str(), out_dir);
    if (out_listing) {
      std::string joined;
      for (const std::string& f : files) {
        if (!joined.empty()) joined += "\n";
        joined += f;
      }
      *out_listing = copy_string(joined);
    }
  });
}

ca_status ca_schema_json(const char* which, char** out_json) {
  if (ca_status s = require(which, "which"); s != CA_OK) return s;
  if (ca_status s = require(out_json, "out_json"); s != CA_OK) return s;
  return guarded([&] {
    std::string w(which);
    if (w == "config") {
      *out_json = copy_string(calibatlas::config_schema_json());
    } else if (w == "report") {
      *out_json = copy_string(calibatlas::report_schema_json());
    } else {
      calibatlas::fail(calibatlas::ErrorCode::kBadParam,
                       "unknown schema '" + w + "' (config, report)");
    }
  });
}

ca_status ca_dataset_load(const char* config_path, ca_dataset** out_dataset) {
  if (ca_status s = require(config_path, "config_path"); s != CA_OK) return s;
  if (ca_status s = require(out_dataset, "out_dataset"); s != CA_OK) return s;
  return guarded([&] {
    calibatlas::AuditConfig config = calibatlas::parse_audit_config_file(config_path);
    calibatlas::IngestResult result = calibatlas::ingest(config);
    *out_dataset = new ca_dataset{std::move(result.dataset)};
  });
}

ca_status ca_dataset_size(const ca_dataset* dataset, size_t* out_size) {
  if (ca_status s = require(dataset, "dataset"); s != CA_OK) return s;
  if (ca_status s = require(out_size, "out_size"); s != CA_OK) return s;
  *out_size = dataset->data.size();
  return CA_OK;
}

ca_status ca_dataset_total_weight(const ca_dataset* dataset, double* out_weight) {
  if (ca_status s = require(dataset, "dataset"); s != CA_OK) return s;
  if (ca_status s = require(out_weight, "out_weight"); s != CA_OK) return s;
  *out_weight = dataset->data.total_weight();
  return CA_OK;
}

ca_status ca_dataset_jsonl(const ca_dataset* dataset, char** out_text) {
  if (ca_status s = require(dataset, "dataset"); s != CA_OK) return s;
  if (ca_status s = require(out_text, "out_text"); s != CA_OK) return s;
  return guarded([&] { *out_text = copy_string(calibatlas::dataset_to_jsonl(dataset->data)); });
}

void ca_string_free(char* s) { delete[] s; }
void ca_report_free(ca_report* report) { delete report; }
void ca_dataset_free(ca_dataset* dataset) { delete dataset; }

}  // extern "C"
