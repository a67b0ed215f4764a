// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_SCORING_HPP_
#define FG_SCORING_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fg/question.hpp"
#include "fg/response_parse.hpp"
#include "fg/types.hpp"

namespace fg {

// Surface forms counted as a "Yes" or a "No" at the answer position.
// Membership is exact string equality against the backend's token text.
struct TokenSets {
  std::vector<std::string> yes_tokens;
  std::vector<std::string> no_tokens;

  // Five variants each: plain, lower, upper, quote-prefixed, space-prefixed.
  static TokenSets defaults();

  // Throws InvalidArgument unless both sets are non-empty, duplicate free
  // and disjoint.
  void validate() const;
};

enum class LogitKind { kRawLogit, kFullVocabLogprob };

std::string_view logit_kind_name(LogitKind k);
std::optional<LogitKind> parse_logit_kind(std::string_view name);

struct LogitEntry {
  std::string token;
  double value = 0.0;
  LogitKind kind = LogitKind::kRawLogit;
};

struct AnswerLogits {
  std::vector<LogitEntry> entries;
  std::string question_id;
  std::size_t token_index = 0;
};

struct AnswerDistribution {
  double p_yes = 0.0;
  double p_no = 0.0;
  // Number of token-set members present in the logits.
  std::size_t coverage = 0;
};

// Softmax over the token-set members present in `logits`; absent members
// carry zero mass. Entries outside the sets are ignored, as is any member
// whose value is -inf.
//
// Throws NoAnswerTokens when nothing from either set is present,
// InvalidArgument for mixed kinds or repeated tokens, NonFiniteInput for NaN
// or +inf.
AnswerDistribution restricted_softmax(const AnswerLogits& logits, const TokenSets& sets);

double entity_score(const AnswerDistribution& dist, Polarity polarity);

// Hard (0/1) entity score: 1 when the answer points in the quality direction.
double entity_score(Answer answer, Polarity polarity);

enum class ScoreMode { kPaperLiteral, kNormalized };

std::string_view score_mode_name(ScoreMode m);
std::optional<ScoreMode> parse_score_mode(std::string_view name);

// paper_literal: plain sum of entity scores. normalized: their mean.
double dimension_score(std::span<const double> entity_scores, ScoreMode mode);

using DimensionWeights = std::map<Dimension, double>;

DimensionWeights uniform_weights();

// Throws WeightSumInvalid for negative or non-finite weights, or when the
// weights do not sum to 1 within 1e-9.
void validate_weights(const DimensionWeights& weights);

struct OverallScore {
  double value = 0.0;
  // Set when some dimensions were missing and weights were renormalised.
  bool partial = false;
};

// Weighted sum over the five dimensions. A missing dimension is an error in
// paper_literal mode; in normalized mode the weights of the present
// dimensions are renormalised and the result is flagged partial.
OverallScore overall_score(const std::map<Dimension, double>& dim_scores,
                           const DimensionWeights& weights, ScoreMode mode);

struct ScoreTree {
  std::string video_id;
  std::map<std::string, double> entity_scores;
  std::map<Dimension, double> dim_scores;
  std::map<Dimension, std::size_t> dim_counts;
  double overall = 0.0;
  DimensionWeights weights;
  ScoreMode mode = ScoreMode::kNormalized;
  bool partial = false;
  // false when entity scores are hard 0/1 answers.
  bool prob_mode = true;

  // Same tree re-expressed with mean dimension scores. Cross-video
  // comparisons always go through this view.
  ScoreTree normalized() const;

  bool operator==(const ScoreTree&) const = default;
};

struct ScoredQuestion {
  std::string question_id;
  Dimension dimension = Dimension::kVisualQuality;
  double entity_score = 0.0;
};

ScoreTree build_score_tree(std::string video_id, std::span<const ScoredQuestion> scored,
                           const DimensionWeights& weights, ScoreMode mode, bool prob_mode);

struct QuestionResponse {
  EntityQuestion question;
  std::optional<AnswerLogits> logits;
  std::optional<TaggedResponse> response;
};

// prob_mode uses the logits of every question; hard mode uses the parsed
// answers. Member errors are rethrown with the question id prefixed.
ScoreTree score_video(std::span<const QuestionResponse> responses, const TokenSets& sets,
                      const DimensionWeights& weights, ScoreMode mode, bool prob_mode);

struct GroundTruth {
  std::string question_id;
  Answer answer = Answer::kYes;
  std::optional<std::string> reason;
};

struct Prediction {
  std::string question_id;
  TaggedResponse response;
};

// Exact-match fraction. Predictions without a valid format count as wrong.
// Throws IdMismatch unless both sides carry the same set of unique ids.
double answer_accuracy(std::span<const Prediction> predictions,
                       std::span<const GroundTruth> truths);

}  // namespace fg

#endif  // FG_SCORING_HPP_
