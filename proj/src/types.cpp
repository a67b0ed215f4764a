// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/error.hpp"
#include "fg/types.hpp"

namespace fg {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kClientError: return "ClientError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kExtractionEmpty: return "ExtractionEmpty";
    case ErrorCode::kSinkError: return "SinkError";
    case ErrorCode::kNoAnswerTag: return "NoAnswerTag";
    case ErrorCode::kNoAnswerTokens: return "NoAnswerTokens";
    case ErrorCode::kEmptyDimension: return "EmptyDimension";
    case ErrorCode::kWeightSumInvalid: return "WeightSumInvalid";
    case ErrorCode::kMissingDimension: return "MissingDimension";
    case ErrorCode::kIdMismatch: return "IdMismatch";
    case ErrorCode::kMissingAnswer: return "MissingAnswer";
    case ErrorCode::kGroupSizeMismatch: return "GroupSizeMismatch";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kFatalBackend: return "FatalBackend";
    case ErrorCode::kFixtureMissing: return "FixtureMissing";
    case ErrorCode::kBackendError: return "BackendError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::kVisualQuality: return "visual_quality";
    case Dimension::kTextAlignment: return "text_alignment";
    case Dimension::kTemporalConsistency: return "temporal_consistency";
    case Dimension::kFactualConsistency: return "factual_consistency";
    case Dimension::kDynamicDegree: return "dynamic_degree";
  }
  return "";
}

std::string_view dimension_title(Dimension d) {
  switch (d) {
    case Dimension::kVisualQuality: return "Visual Quality";
    case Dimension::kTextAlignment: return "Text Alignment";
    case Dimension::kTemporalConsistency: return "Temporal";
    case Dimension::kFactualConsistency: return "Factual";
    case Dimension::kDynamicDegree: return "Dynamic Degree";
  }
  return "";
}

std::optional<Dimension> parse_dimension(std::string_view name) {
  for (Dimension d : kAllDimensions) {
    if (dimension_name(d) == name) return d;
  }
  return std::nullopt;
}

std::string_view answer_name(Answer a) { return a == Answer::kYes ? "Yes" : "No"; }

std::optional<Answer> parse_answer(std::string_view name) {
  if (name == "Yes") return Answer::kYes;
  if (name == "No") return Answer::kNo;
  return std::nullopt;
}

}  // namespace fg
