// SPDX-License-Identifier: Apache-2.0
// calib-atlas command line: audit | verify | plot | schema. Talks to the
// library exclusively through the C API in calibatlas.h.
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "calibatlas.h"

namespace {

// Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 hard error.
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

int report_error(const char* what, ca_status status) {
  std::fprintf(stderr, "calib-atlas: %s failed (status %d): %s\n", what,
               static_cast<int>(status), ca_last_error());
  return kExitError;
}

int write_and_close(ca_report* report, const std::string& path, const char* what) {
  ca_status status = ca_report_write(report, path.c_str());
  if (status != CA_OK) {
    ca_report_free(report);
    return report_error(what, status);
  }
  int all_pass = ca_report_all_pass(report);
  ca_report_free(report);
  std::printf("%s: wrote %s (%s)\n", what, path.c_str(), all_pass ? "pass" : "FAIL");
  return all_pass ? kExitPass : kExitFail;
}

int run_audit(const std::string& config, const std::string& out_dir) {
  ca_report* report = nullptr;
  ca_status status = ca_audit_run(config.c_str(), &report);
  if (status != CA_OK) return report_error("audit", status);
  return write_and_close(report, out_dir + "/report.json", "audit");
}

int run_verify(const std::string& suite, std::uint64_t seed, double bound_scale,
               const std::string& out_dir) {
  ca_report* report = nullptr;
  ca_status status = ca_verify_run(suite.c_str(), seed, bound_scale, &report);
  if (status != CA_OK) return report_error("verify", status);
  return write_and_close(report, out_dir + "/verify_" + suite + ".json", "verify");
}

int run_plot(const std::string& report_path, const std::string& out_dir) {
  char* listing = nullptr;
  ca_status status = ca_plot_emit(report_path.c_str(), out_dir.c_str(), &listing);
  if (status != CA_OK) return report_error("plot", status);
  if (listing != nullptr && listing[0] != '\0') std::printf("%s\n", listing);
  ca_string_free(listing);
  return kExitPass;
}

int run_schema() {
  char* config_schema = nullptr;
  char* report_schema = nullptr;
  ca_status status = ca_schema_json("config", &config_schema);
  if (status == CA_OK) status = ca_schema_json("report", &report_schema);
  if (status != CA_OK) {
    ca_string_free(config_schema);
    return report_error("schema", status);
  }
  std::printf("{\n\"config\": %s,\n\"report\": %s\n}\n", config_schema, report_schema);
  ca_string_free(config_schema);
  ca_string_free(report_schema);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(ca_version()) + " — forecast-calibration audits"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  CLI::App* audit = app.add_subcommand("audit", "Run a configured audit and write report.json");
  audit->add_option("--config", config_path, "Audit config JSON")->required();
  audit->add_option("--out", out_dir, "Output directory");

  std::string suite;
  std::uint64_t seed = 0;
  double bound_scale = 1.0;
  std::string verify_out = ".";
  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", suite, "edges | counterexamples | oracles | all")->required();
  verify->add_option("--seed", seed, "Scenario seed");
  verify->add_option("--out", verify_out, "Output directory");
  // Fault-injection hook for tests: scales every approximate implication bound.
  verify->add_option("--bound-scale", bound_scale, "")->group("");

  std::string report_path;
  std::string plot_out = ".";
  CLI::App* plot = app.add_subcommand("plot", "Export reliability/simplex CSVs from a report");
  plot->add_option("--report", report_path, "Report JSON path")->required();
  plot->add_option("--out", plot_out, "Output directory");

  app.add_subcommand("schema", "Print the config and report JSON schemas");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // app.exit prints help or the usage error; fold CLI11's own exit codes
    // into the documented contract (0 for --help, 2 for any usage error).
    return app.exit(e) == 0 ? kExitPass : kExitError;
  }

  if (audit->parsed()) return run_audit(config_path, out_dir);
  if (verify->parsed()) return run_verify(suite, seed, bound_scale, verify_out);
  if (plot->parsed()) return run_plot(report_path, plot_out);
  return run_schema();
}
