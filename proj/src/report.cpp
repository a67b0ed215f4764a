// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/report.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "fg/config.hpp"
#include "fg/error.hpp"

namespace fg {
namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

std::string fixed(std::optional<double> v, int digits, double scale = 1.0) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v * scale);
  return buf;
}

std::string prob_label(bool prob) { return prob ? "(w/ prob)" : "(w/o prob)"; }

std::string method_label(const EvalRun& run) {
  std::size_t hard = 0;
  for (const auto& v : run.videos) hard += v.prob_mode ? 0 : 1;
  if (hard == 0) return "Entity " + prob_label(true);
  if (hard == run.videos.size()) return "Entity " + prob_label(false);
  return "Entity (mixed: " + std::to_string(hard) + " of " + std::to_string(run.videos.size()) +
         " videos w/o prob)";
}

Json question_json(const QuestionResult& r) {
  Json j;
  j["question_id"] = r.question.question_id;
  j["video_id"] = r.question.video_id;
  j["dimension"] = std::string(dimension_name(r.question.dimension));
  j["polarity"] = polarity_bit(r.question.polarity);
  j["answer"] = r.response.answer ? Json(std::string(answer_name(*r.response.answer))) : Json();
  j["format_valid"] = r.response.format_valid;
  Json violations = Json::array();
  for (const auto v : r.response.violations) violations.push_back(std::string(violation_name(v)));
  j["violations"] = std::move(violations);
  j["logprobs_available"] = r.logprobs_available;
  j["p_yes"] = r.distribution ? Json(r.distribution->p_yes) : Json();
  j["p_no"] = r.distribution ? Json(r.distribution->p_no) : Json();
  j["entity_score"] = optional_number(r.entity_score);
  if (!r.entity_score) j["unscored_reason"] = r.unscored_reason;
  return j;
}

Json metric_row_json(const MetricRow& row) {
  Json j;
  j["label"] = row.label;
  j["acc"] = optional_number(row.acc);
  j["srcc"] = optional_number(row.srcc);
  j["plcc"] = optional_number(row.plcc);
  j["n_questions"] = row.n_questions;
  j["n_videos"] = row.n_videos;
  j["degenerate_flags"] = row.degenerate_flags;
  return j;
}

Json report_json(const EvalRun& run) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["run_id"] = run.run_id;
  j["backend"] = run.backend_id;
  j["config"] = run.config.to_json();
  j["method"] = method_label(run);
  std::size_t scored = 0;
  for (const auto& r : run.results) scored += r.entity_score ? 1 : 0;
  j["counts"] = {{"questions_in", run.questions_in},
                 {"results", run.results.size()},
                 {"failures", run.failures.size()},
                 {"scored", scored}};
  j["metrics"] = Json::array();
  for (const auto& row : run.metrics) j["metrics"].push_back(metric_row_json(row));
  j["videos"] = Json::array();
  for (const auto& v : run.videos) {
    Json vj = score_tree_to_json(v.tree.normalized());
    vj.erase("schema_version");
    vj["label"] = prob_label(v.prob_mode);
    j["videos"].push_back(std::move(vj));
  }
  j["questions"] = Json::array();
  for (const auto& r : run.results) j["questions"].push_back(question_json(r));
  j["failures"] = Json::array();
  for (const auto& f : run.failures) {
    j["failures"].push_back(
        {{"question_id", f.question_id}, {"video_id", f.video_id}, {"code", f.code},
         {"message", f.message}});
  }
  j["warnings"] = run.warnings;
  return j;
}

std::string report_markdown(const EvalRun& run) {
  std::ostringstream out;
  out << "# Evaluation report\n\n";
  out << "- run: `" << run.run_id << "`\n";
  out << "- backend: `" << run.backend_id << "`\n";
  out << "- config: `" << run.config.hash() << "` (mode "
      << score_mode_name(run.config.mode) << ", strictness "
      << strictness_name(run.config.strictness) << ")\n";
  out << "- questions: " << run.questions_in << " in, " << run.results.size() << " answered, "
      << run.failures.size() << " failed\n\n";

  if (!run.metrics.empty()) {
    out << "## " << method_label(run) << "\n\n";
    out << "| Dimension | Acc | SRCC | PLCC |\n|---|---:|---:|---:|\n";
    for (const auto& row : run.metrics) {
      const auto d = parse_dimension(row.label);
      out << "| " << (d ? std::string(dimension_title(*d)) : std::string("Overall")) << " | "
          << fixed(row.acc, 2, 100.0) << " | " << fixed(row.srcc, 2, 100.0) << " | "
          << fixed(row.plcc, 2, 100.0) << " |\n";
    }
    out << "\n";
  }

  out << "## Videos (normalized)\n\n| Video | Overall |";
  for (const Dimension d : kAllDimensions) out << " " << dimension_title(d) << " |";
  out << " Scoring |\n|---|---:|";
  for (std::size_t i = 0; i < kAllDimensions.size(); ++i) out << "---:|";
  out << "---|\n";
  for (const auto& v : run.videos) {
    const ScoreTree view = v.tree.normalized();
    out << "| " << v.video_id << " | " << fixed(view.overall, 4) << (view.partial ? "*" : "")
        << " |";
    for (const Dimension d : kAllDimensions) {
      const auto it = view.dim_scores.find(d);
      out << " "
          << (it == view.dim_scores.end() ? std::string("-") : fixed(it->second, 4)) << " |";
    }
    out << " " << prob_label(v.prob_mode) << " |\n";
  }

  if (!run.failures.empty()) {
    out << "\n## Failures\n\n| Question | Code | Message |\n|---|---|---|\n";
    for (const auto& f : run.failures) {
      out << "| " << f.question_id << " | " << f.code << " | " << f.message << " |\n";
    }
  }
  if (!run.warnings.empty()) {
    out << "\n## Warnings\n\n";
    for (const auto& w : run.warnings) out << "- " << w << "\n";
  }
  return out.str();
}

}  // namespace

Json score_tree_to_json(const ScoreTree& tree) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["video_id"] = tree.video_id;
  j["mode"] = std::string(score_mode_name(tree.mode));
  j["prob_mode"] = tree.prob_mode;
  j["partial"] = tree.partial;
  j["overall"] = tree.overall;
  Json dims = Json::object();
  for (const auto& [d, s] : tree.dim_scores) {
    const auto c = tree.dim_counts.find(d);
    dims[std::string(dimension_name(d))] = {
        {"score", s}, {"count", c == tree.dim_counts.end() ? 0 : c->second}};
  }
  j["dimensions"] = std::move(dims);
  j["weights"] = weights_to_json(tree.weights)["weights"];
  Json entities = Json::object();
  for (const auto& [id, s] : tree.entity_scores) entities[id] = s;
  j["entity_scores"] = std::move(entities);
  return j;
}

ScoreTree score_tree_from_json(const Json& j, std::string_view where) {
  ScoreTree t;
  try {
    t.video_id = require_string(j, "video_id", where);
    const auto mode = parse_score_mode(require_string(j, "mode", where));
    if (!mode) throw Error(ErrorCode::kSchemaError, std::string(where) + ": unknown mode");
    t.mode = *mode;
    t.prob_mode = j.at("prob_mode").get<bool>();
    t.partial = j.at("partial").get<bool>();
    t.overall = require_number(j, "overall", where);
    for (const auto& [key, value] : j.at("dimensions").items()) {
      const auto d = parse_dimension(key);
      if (!d) throw Error(ErrorCode::kSchemaError, std::string(where) + ": unknown dimension " + key);
      t.dim_scores[*d] = value.at("score").get<double>();
      t.dim_counts[*d] = value.at("count").get<std::size_t>();
    }
    Json w;
    w["schema_version"] = kSchemaVersion;
    w["weights"] = j.at("weights");
    t.weights = weights_from_json(w);
    for (const auto& [key, value] : j.at("entity_scores").items()) {
      t.entity_scores[key] = value.get<double>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string(where) + ": " + e.what());
  }
  return t;
}

std::vector<ScoreTree> read_scores(const std::filesystem::path& path) {
  std::vector<ScoreTree> out;
  std::set<std::string> ids;
  for (const auto& rec : read_jsonl(path)) {
    const std::string where = path.filename().string() + ":" + std::to_string(rec.line);
    out.push_back(score_tree_from_json(rec.value, where));
    if (!ids.insert(out.back().video_id).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate video_id " + out.back().video_id);
    }
  }
  return out;
}

void write_scores(const std::filesystem::path& path, const std::vector<ScoreTree>& trees) {
  std::string text;
  for (const auto& t : trees) text += dump_line(score_tree_to_json(t)) + "\n";
  write_text(path, text);
}

std::string render_report(const EvalRun& run, ReportFormat format) {
  if (format == ReportFormat::kJson) return report_json(run).dump(2) + "\n";
  return report_markdown(run);
}

void emit_report(const EvalRun& run, ReportFormat format, const std::filesystem::path& path) {
  write_text(path, render_report(run, format));
}

std::vector<ResponseRecord> read_responses(const std::filesystem::path& path) {
  std::vector<ResponseRecord> out;
  for (const auto& rec : read_jsonl(path)) {
    const std::string where = path.filename().string() + ":" + std::to_string(rec.line);
    ResponseRecord r;
    r.question_id = require_string(rec.value, "question_id", where);
    r.raw_text = require_string(rec.value, "raw_text", where);
    const auto it = rec.value.find("answer_logits");
    if (it != rec.value.end() && it->is_array() && !it->empty()) {
      AnswerLogits logits;
      logits.question_id = r.question_id;
      for (const auto& e : *it) {
        LogitEntry entry;
        entry.token = require_string(e, "token", where);
        entry.value = require_number(e, "value", where);
        const auto kind = parse_logit_kind(require_string(e, "kind", where));
        if (!kind) throw Error(ErrorCode::kSchemaError, where + ": unknown logit kind");
        entry.kind = *kind;
        logits.entries.push_back(std::move(entry));
      }
      r.logits = std::move(logits);
    } else if (it != rec.value.end() && !it->is_null() && !it->is_array()) {
      throw Error(ErrorCode::kSchemaError, where + ": answer_logits must be a list");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ScoreTree> score_responses(const std::vector<EntityQuestion>& questions,
                                       const std::vector<ResponseRecord>& responses,
                                       const EvalConfig& config) {
  config.validate();
  std::map<std::string, const EntityQuestion*> by_id;
  for (const auto& q : questions) by_id[q.question_id] = &q;

  std::vector<std::string> order;
  std::map<std::string, std::vector<QuestionResponse>> per_video;
  std::set<std::string> seen;
  for (const auto& r : responses) {
    const auto it = by_id.find(r.question_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kIdMismatch, "response for unknown question " + r.question_id);
    }
    if (!seen.insert(r.question_id).second) {
      throw Error(ErrorCode::kIdMismatch, "duplicate response for question " + r.question_id);
    }
    const std::string& video = it->second->video_id;
    if (!per_video.contains(video)) order.push_back(video);
    per_video[video].push_back({*it->second, r.logits, parse_tagged(r.raw_text, config.strictness)});
  }

  std::vector<ScoreTree> out;
  for (const auto& video : order) {
    const auto& items = per_video[video];
    bool prob = true;
    for (const auto& item : items) prob = prob && item.logits.has_value();
    out.push_back(score_video(items, config.token_sets, config.weights, config.mode, prob));
  }
  return out;
}

std::vector<MosRecord> read_mos(const std::filesystem::path& path) {
  std::vector<MosRecord> out;
  for (const auto& rec : read_jsonl(path)) {
    const std::string where = path.filename().string() + ":" + std::to_string(rec.line);
    out.push_back({require_string(rec.value, "video_id", where),
                   require_number(rec.value, "mos", where)});
  }
  return out;
}

std::vector<PreferenceRecord> read_preferences(const std::filesystem::path& path) {
  std::vector<PreferenceRecord> out;
  for (const auto& rec : read_jsonl(path)) {
    const std::string where = path.filename().string() + ":" + std::to_string(rec.line);
    PreferenceRecord p;
    p.pair_id = require_string(rec.value, "pair_id", where);
    p.video_a = require_string(rec.value, "video_a", where);
    p.video_b = require_string(rec.value, "video_b", where);
    const auto label = parse_preference_label(require_string(rec.value, "label", where));
    if (!label) throw Error(ErrorCode::kSchemaError, where + ": label must be win, lose or tie");
    p.label = *label;
    out.push_back(std::move(p));
  }
  return out;
}

Json MetricsReport::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["srcc"] = optional_number(srcc);
  j["plcc"] = optional_number(plcc);
  j["tau"] = pairwise ? Json(pairwise->tau) : Json();
  j["diff"] = pairwise ? optional_number(pairwise->diff) : Json();
  j["tie_threshold"] = pairwise ? Json(pairwise->tie_threshold) : Json();
  j["tie_threshold_grid"] = tie_threshold_grid;
  j["n"] = n;
  j["n_pairs"] = pairwise ? pairwise->n : 0;
  j["n_non_tie_pairs"] = pairwise ? pairwise->n_non_tie : 0;
  j["degenerate_flags"] = degenerate_flags;
  return j;
}

MetricsReport compute_metrics_report(const std::vector<ScoreTree>& trees,
                                     const std::vector<MosRecord>& mos,
                                     const std::vector<PreferenceRecord>& prefs,
                                     const std::vector<double>& tie_threshold_grid) {
  std::map<std::string, double> overall;
  for (const auto& t : trees) overall[t.video_id] = t.normalized().overall;
  auto score_of = [&](const std::string& video, std::string_view what) {
    const auto it = overall.find(video);
    if (it == overall.end()) {
      throw Error(ErrorCode::kDanglingReference,
                  std::string(what) + " references unscored video " + video);
    }
    return it->second;
  };

  MetricsReport report;
  report.tie_threshold_grid = tie_threshold_grid;
  std::vector<ScorePair> pairs;
  for (const auto& m : mos) pairs.push_back({m.video_id, score_of(m.video_id, "mos"), m.mos});
  report.n = pairs.size();
  if (mos.empty()) {
    report.degenerate_flags.push_back("no_mos_reference");
  } else if (pairs.size() < 2) {
    report.degenerate_flags.push_back("insufficient_items");
  } else {
    try {
      report.srcc = srcc(pairs);
      report.plcc = plcc(pairs);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateVariance) throw;
      report.degenerate_flags.push_back("degenerate_variance");
    }
  }

  if (prefs.empty()) {
    report.degenerate_flags.push_back("no_preference_reference");
    return report;
  }
  std::vector<PreferencePair> pp;
  for (const auto& p : prefs) {
    pp.push_back({p.pair_id, score_of(p.video_a, "preference " + p.pair_id),
                  score_of(p.video_b, "preference " + p.pair_id), p.label});
  }
  report.pairwise = pairwise_tau_diff(pp, tie_threshold_grid);
  if (!report.pairwise->diff) report.degenerate_flags.push_back("diff_all_ties");
  return report;
}

}  // namespace fg
