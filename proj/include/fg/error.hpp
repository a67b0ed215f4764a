// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_ERROR_HPP_
#define FG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fg {

enum class ErrorCode {
  kInvalidArgument,
  // qgen
  kClientError,
  kParseError,
  kExtractionEmpty,
  kSinkError,
  // response parsing
  kNoAnswerTag,
  // scoring
  kNoAnswerTokens,
  kEmptyDimension,
  kWeightSumInvalid,
  kMissingDimension,
  kIdMismatch,
  kMissingAnswer,
  // grpo
  kGroupSizeMismatch,
  kNonFiniteInput,
  kAlignmentError,
  kDivergenceDetected,
  // metrics
  kDegenerateVariance,
  kEmptyInput,
  // harness
  kSchemaError,
  kDanglingReference,
  kDuplicateId,
  kFatalBackend,
  kFixtureMissing,
  kBackendError,
  kIoError,
};

// Stable name used in reports and failure ledgers.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace fg

#endif  // FG_ERROR_HPP_
