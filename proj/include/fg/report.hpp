// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_REPORT_HPP_
#define FG_REPORT_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fg/eval.hpp"
#include "fg/metrics.hpp"

namespace fg {

// One line of scores.jsonl.
Json score_tree_to_json(const ScoreTree& tree);
ScoreTree score_tree_from_json(const Json& j, std::string_view where);
std::vector<ScoreTree> read_scores(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path, const std::vector<ScoreTree>& trees);

enum class ReportFormat { kJson, kMarkdownTable };

// Cross-video tables always use the normalized view. No timestamps, so equal
// runs give equal bytes.
std::string render_report(const EvalRun& run, ReportFormat format);
void emit_report(const EvalRun& run, ReportFormat format, const std::filesystem::path& path);

// One line of responses.jsonl; logits absent means hard scoring.
struct ResponseRecord {
  std::string question_id;
  std::string raw_text;
  std::optional<AnswerLogits> logits;
};

std::vector<ResponseRecord> read_responses(const std::filesystem::path& path);

// Offline scoring: one tree per video in order of first appearance. A video
// is scored from logits only when every one of its responses carries them.
// Throws IdMismatch for responses to unknown questions or duplicates.
std::vector<ScoreTree> score_responses(const std::vector<EntityQuestion>& questions,
                                       const std::vector<ResponseRecord>& responses,
                                       const EvalConfig& config);

struct MosRecord {
  std::string video_id;
  double mos = 0.0;
};

struct PreferenceRecord {
  std::string pair_id;
  std::string video_a;
  std::string video_b;
  PreferenceLabel label = PreferenceLabel::kTie;
};

std::vector<MosRecord> read_mos(const std::filesystem::path& path);
std::vector<PreferenceRecord> read_preferences(const std::filesystem::path& path);

struct MetricsReport {
  std::optional<double> srcc;
  std::optional<double> plcc;
  std::optional<PairwiseAccuracy> pairwise;
  std::size_t n = 0;
  std::vector<double> tie_threshold_grid;
  std::vector<std::string> degenerate_flags;

  Json to_json() const;
};

// Correlates normalized overall scores with MOS and scores preference pairs.
// References naming unknown videos throw DanglingReference.
MetricsReport compute_metrics_report(const std::vector<ScoreTree>& trees,
                                     const std::vector<MosRecord>& mos,
                                     const std::vector<PreferenceRecord>& prefs,
                                     const std::vector<double>& tie_threshold_grid);

}  // namespace fg

#endif  // FG_REPORT_HPP_
