// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_ERROR_HPP_
#define CALIBATLAS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace calibatlas {

// Error codes for every failure mode the library reports. The C API maps
// these 1:1 onto ca_status values; keep the numbering stable.
enum class ErrorCode : int {
  kOk = 0,
  kNegativeWeight = 1,
  kNotNormalized = 2,
  kLengthMismatch = 3,
  kSpaceMismatch = 4,
  kEmptyEvent = 5,
  kMissingEmbedding = 6,
  kBadParam = 7,
  kKindMismatch = 8,
  kRejectionBudgetExceeded = 9,
  kNotOriented = 10,
  kEmptyGrid = 11,
  kNotBinary = 12,
  kEmptyDataset = 13,
  kMissingPrediction = 14,
  kEmptyMap = 15,
  kEmptyGroup = 16,
  kMissingIngredient = 17,
  kUnrealizable = 18,
  kSeparationFailure = 19,
  kTooLarge = 20,
  kSchemaError = 21,
  kRowError = 22,
  kConfigError = 23,
  kIoError = 24,
  kInternal = 25,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) — single choke point so breakpoints are easy.
[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace calibatlas

#endif  // CALIBATLAS_ERROR_HPP_
