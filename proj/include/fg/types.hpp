// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_TYPES_HPP_
#define FG_TYPES_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace fg {

// The five assessment axes. Declaration order is the canonical report order.
enum class Dimension {
  kVisualQuality,
  kTextAlignment,
  kTemporalConsistency,
  kFactualConsistency,
  kDynamicDegree,
};

inline constexpr std::array<Dimension, 5> kAllDimensions = {
    Dimension::kVisualQuality, Dimension::kTextAlignment,
    Dimension::kTemporalConsistency, Dimension::kFactualConsistency,
    Dimension::kDynamicDegree};

std::string_view dimension_name(Dimension d);
std::string_view dimension_title(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view name);

enum class Answer { kYes, kNo };

std::string_view answer_name(Answer a);
std::optional<Answer> parse_answer(std::string_view name);

// Whether a "Yes" answer to a question indicates higher quality.
enum class Polarity { kNegative = 0, kPositive = 1 };

inline int polarity_bit(Polarity p) { return p == Polarity::kPositive ? 1 : 0; }

}  // namespace fg

#endif  // FG_TYPES_HPP_
