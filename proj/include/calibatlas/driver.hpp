// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_DRIVER_HPP_
#define CALIBATLAS_DRIVER_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace calibatlas {

inline constexpr const char* kToolName = "calib-atlas";
inline constexpr const char* kToolVersion = "0.1.0";

struct AuditOutcome {
  std::string report_json;
  bool all_pass = false;
  bool failed = false;  // a metric raised an error; the report carries a marker
};

// Config parse + validation, ingest, metric execution, report rendering.
// Config and ingest errors throw (nothing is produced); a metric-level error
// yields a partial report with verdict "error" and the failed marker set.
AuditOutcome run_audit_file(const std::string& config_path);

struct VerifyOutcome {
  std::string manifest_json;
  bool all_pass = false;
};

// suite in {edges, counterexamples, oracles, all}; all additionally runs the
// hyperplane-recovery suite. bound_scale scales every approximate-edge bound
// (fault-injection hook for tests; 1.0 in normal operation). The manifest is
// byte-deterministic for fixed (suite, seed, bound_scale).
VerifyOutcome run_verify_suite(const std::string& suite, std::uint64_t seed,
                               double bound_scale = 1.0);

// Writes per-metric reliability CSVs plus, when 3-outcome distributional
// levels are present, simplex.csv with predicted vs pooled barycentric
// coordinates. Returns the paths written.
std::vector<std::string> emit_plot_files(const std::string& report_json,
                                         const std::string& out_dir);

std::string config_schema_json();
std::string report_schema_json();

}  // namespace calibatlas

#endif  // CALIBATLAS_DRIVER_HPP_
