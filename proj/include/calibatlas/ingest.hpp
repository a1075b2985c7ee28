// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_INGEST_HPP_
#define CALIBATLAS_INGEST_HPP_

#include <string>
#include <vector>

#include "calibatlas/config.hpp"
#include "calibatlas/dataset.hpp"

namespace calibatlas {

struct IngestResult {
  PredictionDataset dataset;
  std::vector<std::string> warnings;  // e.g. renormalized rows, with line numbers
};

// Reads the configured input file. CSV columns: x_id, y (a space label),
// optional weight, prediction columns as declared (distribution predictions
// list one column per outcome), group flags as g_<name> in {0,1}. JSONL: one
// object per line with predictions under "pred" and flags under "groups".
// Rows whose distribution drifts from sum 1 by <= 1e-6 are renormalized and
// recorded as warnings; larger drift is a RowError. Errors carry line
// numbers. Throws SchemaError for missing columns, IoError for unreadable
// files.
IngestResult ingest(const AuditConfig& config);

// As ingest, but over in-memory text (used by ingest itself and tests).
IngestResult ingest_text(const AuditConfig& config, const std::string& text);

// One JSONL line per record: x_id, y label, weight, pred, groups. Reals are
// serialized with 17 significant digits so a re-ingest is bit-exact.
std::string dataset_to_jsonl(const PredictionDataset& data);

}  // namespace calibatlas

#endif  // CALIBATLAS_INGEST_HPP_
