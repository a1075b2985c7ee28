// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_CONFIG_HPP_
#define CALIBATLAS_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calibatlas/verify.hpp"

namespace calibatlas {

struct PredictionSpec {
  std::string name;
  std::string kind;  // dist | real | token
  std::vector<std::string> columns;
};

struct PropertySpec {
  std::string name;
  std::string kind;  // catalog token for make_standard_property
  PropertyParams params;
};

struct IdentSpec {
  std::string name;
  std::string kind;  // mean | quantile | ratio | variance_on_mean_level | cvar_on_quantile_level
  std::optional<double> tau;
  std::optional<double> level;  // v for the *_on_*_level kinds
  std::optional<std::vector<double>> g;
  std::optional<std::vector<double>> h;
  double gamma0 = 0.0;
  std::size_t n_quad = 64;
  std::vector<double> grid;  // real decision grid; defaulted when empty
};

struct LossSpec {
  std::string name;
  std::string kind;  // squared | pinball | simple | zero_one | from_identification
  std::optional<double> tau;
  std::optional<double> q;
  std::string identification;  // for from_identification: name of an IdentSpec
  std::optional<double> gamma0;
  std::optional<std::size_t> n_quad;
  std::vector<double> grid;  // real decision grid; defaulted when empty
};

struct MetricSpec {
  std::string name;
  std::string quantity;  // token grammar of eval_quantity
  std::optional<double> tolerance;
  std::optional<double> expected;
};

struct AuditConfig {
  std::string input_path;
  std::string format;  // csv | jsonl
  std::vector<std::string> labels;
  std::optional<std::vector<double>> embedding;
  std::vector<PredictionSpec> predictions;
  std::vector<PropertySpec> properties;
  std::vector<LossSpec> losses;
  std::vector<IdentSpec> identifications;
  std::vector<MetricSpec> metrics;
  std::vector<std::string> groups;
  std::map<std::string, double> tolerances;
  std::string aggregation = "expected";
  std::uint64_t seed = 0;
  std::string raw_bytes;    // exact file contents, hashed into provenance
  std::string config_path;  // where it was read from
};

// Parses and structurally validates a config document; throws ConfigError on
// malformed JSON or missing/mistyped fields, and for metric quantities that
// reference undeclared predictions/properties/losses/identifications/groups
// (caught before any data is read).
AuditConfig parse_audit_config_file(const std::string& path);
AuditConfig parse_audit_config(const std::string& json_text, const std::string& path);

// Instantiates the declared ingredient catalog onto a dataset.
Scenario scenario_from_config(const AuditConfig& config, PredictionDataset dataset);

// FNV-1a 64-bit over the raw config bytes, rendered as "fnv1a:<16 hex>".
std::string config_hash(const std::string& raw_bytes);

}  // namespace calibatlas

#endif  // CALIBATLAS_CONFIG_HPP_
