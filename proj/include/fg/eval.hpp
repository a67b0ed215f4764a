// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_EVAL_HPP_
#define FG_EVAL_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fg/backend.hpp"
#include "fg/dataset.hpp"
#include "fg/jsonl.hpp"
#include "fg/response_parse.hpp"
#include "fg/scoring.hpp"

namespace fg {

inline constexpr std::string_view kAnswerTemplateId = "answer/v1";

// Prompt sent to the answering model for one question.
std::string render_answer_prompt(const EntityQuestion& question);

struct EvalConfig {
  TokenSets token_sets = TokenSets::defaults();
  DimensionWeights weights = uniform_weights();
  ScoreMode mode = ScoreMode::kNormalized;
  Strictness strictness = Strictness::kStrict;
  bool want_logprobs = true;
  int top_k = 20;
  std::size_t parallelism = 1;
  // Sampling settings owned by the backend; recorded for provenance only.
  Json backend_settings = Json{{"fps", 2}, {"resolution", "448x448"}};
  // Excluded from the config hash and the report.
  std::optional<std::filesystem::path> cache_dir;

  void validate() const;
  Json to_json() const;
  // Fingerprint of to_json(); part of every cache key.
  std::string hash() const;
};

// Stores backend responses under cache_dir, addressed by
// (backend id, question id, config hash). Safe for concurrent use.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  static std::string key(const std::string& backend_id, const std::string& question_id,
                         const std::string& config_hash);

  std::optional<BackendResponse> load(const std::string& key) const;
  void store(const std::string& key, const BackendResponse& response);

 private:
  std::filesystem::path dir_;
  std::mutex mu_;
};

struct QuestionResult {
  EntityQuestion question;
  std::string raw_text;
  TaggedResponse response;
  std::optional<AnswerDistribution> distribution;
  // Absent when neither the logprobs nor the parsed answer give a score.
  std::optional<double> entity_score;
  // Why entity_score is absent.
  std::string unscored_reason;
  bool logprobs_available = false;
};

struct FailureRecord {
  std::string question_id;
  std::string video_id;
  std::string code;
  std::string message;
};

struct VideoResult {
  std::string video_id;
  // false when the video fell back to hard answers ("(w/o prob)").
  bool prob_mode = true;
  ScoreTree tree;
};

struct MetricRow {
  // Dimension name, or "overall".
  std::string label;
  std::optional<double> acc;
  std::optional<double> srcc;
  std::optional<double> plcc;
  std::size_t n_questions = 0;
  std::size_t n_videos = 0;
  std::vector<std::string> degenerate_flags;
};

struct EvalRun {
  std::string run_id;
  std::string backend_id;
  EvalConfig config;
  std::size_t questions_in = 0;
  // Input order.
  std::vector<QuestionResult> results;
  std::vector<FailureRecord> failures;
  // Video order of the dataset; videos without any scored question are
  // omitted.
  std::vector<VideoResult> videos;
  // Present when the dataset carries annotations.
  std::vector<MetricRow> metrics;
  std::vector<std::string> warnings;
};

// Per-question failures land in EvalRun::failures; throws FatalBackend only
// when every backend call failed.
EvalRun run_eval(const Dataset& dataset, BackendClient& backend, const EvalConfig& config);

// Accuracy per dimension and SRCC/PLCC across videos between predicted
// normalized scores and scores implied by the annotated answers.
std::vector<MetricRow> compute_eval_metrics(const Dataset& dataset,
                                            const std::vector<QuestionResult>& results,
                                            const std::vector<VideoResult>& videos,
                                            const EvalConfig& config);

// Logits at the answer token: the sampled token plus its top-k alternatives.
// Throws NoAnswerTag when no answer token can be located.
AnswerLogits answer_logits_from(const BackendResponse& response, const std::string& question_id);

}  // namespace fg

#endif  // FG_EVAL_HPP_
