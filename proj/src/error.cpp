// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/error.hpp"

namespace calibatlas {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kNegativeWeight: return "NegativeWeight";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kSpaceMismatch: return "SpaceMismatch";
    case ErrorCode::kEmptyEvent: return "EmptyEvent";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kBadParam: return "BadParam";
    case ErrorCode::kKindMismatch: return "KindMismatch";
    case ErrorCode::kRejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case ErrorCode::kNotOriented: return "NotOriented";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kNotBinary: return "NotBinary";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kMissingPrediction: return "MissingPrediction";
    case ErrorCode::kEmptyMap: return "EmptyMap";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kMissingIngredient: return "MissingIngredient";
    case ErrorCode::kUnrealizable: return "Unrealizable";
    case ErrorCode::kSeparationFailure: return "SeparationFailure";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kRowError: return "RowError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace calibatlas
