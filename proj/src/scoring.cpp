// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "fg/error.hpp"

namespace fg {
namespace {

constexpr double kWeightTolerance = 1e-9;

bool in(const std::vector<std::string>& set, const std::string& token) {
  return std::find(set.begin(), set.end(), token) != set.end();
}

}  // namespace

TokenSets TokenSets::defaults() {
  return TokenSets{{"Yes", "yes", "YES", "\"Yes", " Yes"},
                   {"No", "no", "NO", "\"No", " No"}};
}

void TokenSets::validate() const {
  if (yes_tokens.empty() || no_tokens.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "token sets must be non-empty");
  }
  std::set<std::string> seen;
  for (const auto* set : {&yes_tokens, &no_tokens}) {
    for (const auto& t : *set) {
      if (!seen.insert(t).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "token '" + t + "' repeated or shared between yes and no sets");
      }
    }
  }
}

std::string_view logit_kind_name(LogitKind k) {
  return k == LogitKind::kRawLogit ? "raw_logit" : "full_vocab_logprob";
}

std::optional<LogitKind> parse_logit_kind(std::string_view name) {
  if (name == "raw_logit") return LogitKind::kRawLogit;
  if (name == "full_vocab_logprob") return LogitKind::kFullVocabLogprob;
  return std::nullopt;
}

AnswerDistribution restricted_softmax(const AnswerLogits& logits, const TokenSets& sets) {
  std::set<std::string_view> tokens;
  for (const auto& e : logits.entries) {
    if (e.kind != logits.entries.front().kind) {
      throw Error(ErrorCode::kInvalidArgument, "answer logits mix value kinds");
    }
    if (!tokens.insert(e.token).second) {
      throw Error(ErrorCode::kInvalidArgument, "answer logits repeat token '" + e.token + "'");
    }
  }

  // Members found in the logits, split by side.
  std::vector<double> yes_values;
  std::vector<double> no_values;
  for (const auto& e : logits.entries) {
    const bool is_yes = in(sets.yes_tokens, e.token);
    const bool is_no = !is_yes && in(sets.no_tokens, e.token);
    if (!is_yes && !is_no) continue;
    if (std::isnan(e.value) || e.value == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::kNonFiniteInput, "non-finite logit for token '" + e.token + "'");
    }
    if (std::isinf(e.value)) continue;
    (is_yes ? yes_values : no_values).push_back(e.value);
  }

  AnswerDistribution dist;
  dist.coverage = yes_values.size() + no_values.size();
  if (dist.coverage == 0) {
    throw Error(ErrorCode::kNoAnswerTokens, "no yes/no token present at the answer position");
  }

  double peak = -std::numeric_limits<double>::infinity();
  for (double v : yes_values) peak = std::max(peak, v);
  for (double v : no_values) peak = std::max(peak, v);

  double yes_mass = 0.0;
  double no_mass = 0.0;
  for (double v : yes_values) yes_mass += std::exp(v - peak);
  for (double v : no_values) no_mass += std::exp(v - peak);
  const double total = yes_mass + no_mass;
  // The smaller side is divided out and the other taken as its complement,
  // so p_yes + p_no == 1 holds exactly in double arithmetic.
  if (yes_mass <= no_mass) {
    dist.p_yes = yes_mass / total;
    dist.p_no = 1.0 - dist.p_yes;
  } else {
    dist.p_no = no_mass / total;
    dist.p_yes = 1.0 - dist.p_no;
  }
  return dist;
}

double entity_score(const AnswerDistribution& dist, Polarity polarity) {
  return polarity == Polarity::kPositive ? dist.p_yes : dist.p_no;
}

double entity_score(Answer answer, Polarity polarity) {
  const bool quality_up = (answer == Answer::kYes) == (polarity == Polarity::kPositive);
  return quality_up ? 1.0 : 0.0;
}

std::string_view score_mode_name(ScoreMode m) {
  return m == ScoreMode::kPaperLiteral ? "paper_literal" : "normalized";
}

std::optional<ScoreMode> parse_score_mode(std::string_view name) {
  if (name == "paper_literal" || name == "paper-literal") return ScoreMode::kPaperLiteral;
  if (name == "normalized") return ScoreMode::kNormalized;
  return std::nullopt;
}

double dimension_score(std::span<const double> entity_scores, ScoreMode mode) {
  if (entity_scores.empty()) {
    throw Error(ErrorCode::kEmptyDimension, "dimension has no entity scores");
  }
  double sum = 0.0;
  for (double s : entity_scores) sum += s;
  if (mode == ScoreMode::kPaperLiteral) return sum;
  return sum / static_cast<double>(entity_scores.size());
}

DimensionWeights uniform_weights() {
  DimensionWeights w;
  for (Dimension d : kAllDimensions) w[d] = 0.2;
  return w;
}

void validate_weights(const DimensionWeights& weights) {
  double sum = 0.0;
  for (const auto& [dim, w] : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kWeightSumInvalid,
                  "weight for " + std::string(dimension_name(dim)) + " is negative or non-finite");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) {
    throw Error(ErrorCode::kWeightSumInvalid,
                "weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

OverallScore overall_score(const std::map<Dimension, double>& dim_scores,
                           const DimensionWeights& weights, ScoreMode mode) {
  validate_weights(weights);
  if (dim_scores.empty()) {
    throw Error(ErrorCode::kEmptyDimension, "no dimension scores to combine");
  }
  for (const auto& [dim, score] : dim_scores) {
    if (!weights.contains(dim)) {
      throw Error(ErrorCode::kWeightSumInvalid,
                  "no weight for dimension " + std::string(dimension_name(dim)));
    }
  }

  OverallScore out;
  double weighted = 0.0;
  double present_weight = 0.0;
  for (Dimension d : kAllDimensions) {
    const auto it = dim_scores.find(d);
    if (it == dim_scores.end()) {
      if (mode == ScoreMode::kPaperLiteral) {
        throw Error(ErrorCode::kMissingDimension,
                    "dimension " + std::string(dimension_name(d)) + " has no score");
      }
      out.partial = true;
      continue;
    }
    const auto w = weights.find(d);
    weighted += w->second * it->second;
    present_weight += w->second;
  }
  if (!out.partial) {
    out.value = weighted;
    return out;
  }
  if (present_weight <= 0.0) {
    throw Error(ErrorCode::kWeightSumInvalid, "present dimensions carry zero total weight");
  }
  out.value = weighted / present_weight;
  return out;
}

ScoreTree ScoreTree::normalized() const {
  if (mode == ScoreMode::kNormalized) return *this;
  ScoreTree out = *this;
  out.mode = ScoreMode::kNormalized;
  for (auto& [dim, score] : out.dim_scores) {
    score /= static_cast<double>(dim_counts.at(dim));
  }
  const auto overall = overall_score(out.dim_scores, out.weights, out.mode);
  out.overall = overall.value;
  out.partial = overall.partial;
  return out;
}

ScoreTree build_score_tree(std::string video_id, std::span<const ScoredQuestion> scored,
                           const DimensionWeights& weights, ScoreMode mode, bool prob_mode) {
  ScoreTree tree;
  tree.video_id = std::move(video_id);
  tree.weights = weights;
  tree.mode = mode;
  tree.prob_mode = prob_mode;

  std::map<Dimension, std::vector<double>> by_dim;
  for (const auto& q : scored) {
    if (!tree.entity_scores.emplace(q.question_id, q.entity_score).second) {
      throw Error(ErrorCode::kDuplicateId, "question " + q.question_id + " scored twice");
    }
  }
  // Grouped in question-id order so the result does not depend on input order.
  std::map<std::string_view, Dimension> dims;
  for (const auto& q : scored) dims.emplace(q.question_id, q.dimension);
  for (const auto& [id, dim] : dims) {
    by_dim[dim].push_back(tree.entity_scores.at(std::string(id)));
  }
  for (const auto& [dim, scores] : by_dim) {
    tree.dim_scores[dim] = dimension_score(scores, mode);
    tree.dim_counts[dim] = scores.size();
  }
  const auto overall = overall_score(tree.dim_scores, weights, mode);
  tree.overall = overall.value;
  tree.partial = overall.partial;
  return tree;
}

ScoreTree score_video(std::span<const QuestionResponse> responses, const TokenSets& sets,
                      const DimensionWeights& weights, ScoreMode mode, bool prob_mode) {
  if (responses.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no responses to score");
  }
  sets.validate();
  std::vector<ScoredQuestion> scored;
  scored.reserve(responses.size());
  const std::string video_id = responses.front().question.video_id;
  for (const auto& r : responses) {
    const auto& q = r.question;
    try {
      if (q.video_id != video_id) {
        throw Error(ErrorCode::kInvalidArgument, "belongs to video " + q.video_id +
                                                     ", expected " + video_id);
      }
      double s = 0.0;
      if (prob_mode) {
        if (!r.logits) throw Error(ErrorCode::kNoAnswerTokens, "no answer logits");
        s = entity_score(restricted_softmax(*r.logits, sets), q.polarity);
      } else {
        if (!r.response || !r.response->answer) {
          throw Error(ErrorCode::kMissingAnswer, "no parsed answer");
        }
        s = entity_score(*r.response->answer, q.polarity);
      }
      scored.push_back({q.question_id, q.dimension, s});
    } catch (const Error& e) {
      throw Error(e.code(), "question " + q.question_id + ": " + e.detail());
    }
  }
  return build_score_tree(video_id, scored, weights, mode, prob_mode);
}

double answer_accuracy(std::span<const Prediction> predictions,
                       std::span<const GroundTruth> truths) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::kIdMismatch, "prediction and ground-truth counts differ");
  }
  if (truths.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no predictions to score");
  }
  std::map<std::string_view, Answer> truth_by_id;
  for (const auto& t : truths) {
    if (!truth_by_id.emplace(t.question_id, t.answer).second) {
      throw Error(ErrorCode::kIdMismatch, "ground truth repeats question " + t.question_id);
    }
  }
  std::set<std::string_view> seen;
  std::size_t correct = 0;
  for (const auto& p : predictions) {
    const auto it = truth_by_id.find(p.question_id);
    if (it == truth_by_id.end() || !seen.insert(p.question_id).second) {
      throw Error(ErrorCode::kIdMismatch,
                  "prediction " + p.question_id + " has no matching ground truth");
    }
    if (p.response.format_valid && p.response.answer == it->second) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(truths.size());
}

}  // namespace fg
