// SPDX-License-Identifier: Apache-2.0
// Internal report document model shared by the audit driver and the renderer.
#ifndef CALIBATLAS_SRC_REPORT_INTERNAL_HPP_
#define CALIBATLAS_SRC_REPORT_INTERNAL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace calibatlas {

struct ReportLevelRow {
  std::string level;
  double weight = 0.0;
  double residual = 0.0;
  // Reliability-diagram decoration; a row carries the real or the text form
  // depending on the level's value kind, and pmfs for distributional audits.
  std::optional<double> observed_real;
  std::optional<double> predicted_real;
  std::optional<std::string> observed_text;
  std::optional<std::string> predicted_text;
  std::optional<std::vector<double>> predicted_pmf;
  std::optional<std::vector<double>> observed_pmf;
};

struct ReportMetric {
  std::string name;
  std::string quantity;
  std::vector<ReportLevelRow> levels;
  std::optional<double> aggregate;  // absent when the metric errored
  double tolerance = 0.0;
  std::optional<double> expected;
  std::string verdict;  // "pass" | "fail" | "error"
  std::string error;    // populated when verdict == "error"
};

struct ReportDoc {
  std::string config_path;
  std::string config_hash;
  std::string input_path;
  std::string format;
  std::uint64_t seed = 0;
  std::string aggregation;
  std::vector<ReportMetric> metrics;
  std::vector<std::string> skipped_levels;
  std::vector<std::string> warnings;
  bool failed = false;  // some metric raised an error
};

std::string render_report_json(const ReportDoc& doc);

}  // namespace calibatlas

#endif  // CALIBATLAS_SRC_REPORT_INTERNAL_HPP_
