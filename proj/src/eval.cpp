// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/eval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <set>
#include <thread>

#include "fg/config.hpp"
#include "fg/error.hpp"
#include "fg/metrics.hpp"
#include "fg/text.hpp"

namespace fg {

std::string render_answer_prompt(const EntityQuestion& question) {
  return "Watch the video and answer the question with Yes or No inside <answer></answer>, "
         "then explain your judgement inside <reason></reason>.\nDimension: " +
         std::string(dimension_title(question.dimension)) + "\nQuestion: " + question.text;
}

void EvalConfig::validate() const {
  token_sets.validate();
  validate_weights(weights);
  if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k must be at least 1");
  if (parallelism < 1) throw Error(ErrorCode::kInvalidArgument, "parallelism must be at least 1");
}

Json EvalConfig::to_json() const {
  Json j;
  j["token_sets"] = token_sets_to_json(token_sets);
  j["weights"] = weights_to_json(weights)["weights"];
  j["mode"] = std::string(score_mode_name(mode));
  j["strictness"] = std::string(strictness_name(strictness));
  j["want_logprobs"] = want_logprobs;
  j["top_k"] = top_k;
  j["answer_template_id"] = std::string(kAnswerTemplateId);
  j["backend_settings"] = backend_settings;
  return j;
}

std::string EvalConfig::hash() const { return fingerprint(dump_line(to_json())); }

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create cache dir " + dir_.string());
}

std::string ResponseCache::key(const std::string& backend_id, const std::string& question_id,
                               const std::string& config_hash) {
  return fingerprint(backend_id + '\n' + question_id + '\n' + config_hash);
}

std::optional<BackendResponse> ResponseCache::load(const std::string& key) const {
  const auto path = dir_ / (key + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const Json j = Json::parse(read_text(path));
    return backend_response_from_json(j.at("response"), path.string());
  } catch (const std::exception&) {
    // A torn or foreign entry is treated as a miss and overwritten.
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const BackendResponse& response) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["key"] = key;
  j["response"] = backend_response_to_json(response);
  const auto path = dir_ / (key + ".json");
  const auto tmp = dir_ / (key + ".tmp");
  std::lock_guard lock(mu_);
  write_text(tmp, dump_line(j) + "\n");
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot commit cache entry " + path.string());
}

AnswerLogits answer_logits_from(const BackendResponse& response,
                                const std::string& question_id) {
  std::vector<std::string> tokens;
  tokens.reserve(response.per_token.size());
  for (const auto& t : response.per_token) tokens.push_back(t.token);
  const auto spans = token_spans(tokens);
  const std::size_t pos = extract_answer_token_position(response.raw_text, spans);
  const TokenLogprob& at = response.per_token[pos];

  AnswerLogits logits;
  logits.question_id = question_id;
  logits.token_index = pos;
  std::set<std::string> seen{at.token};
  logits.entries.push_back({at.token, at.logprob, LogitKind::kFullVocabLogprob});
  for (const auto& alt : at.top_k) {
    if (seen.insert(alt.token).second) {
      logits.entries.push_back({alt.token, alt.logprob, LogitKind::kFullVocabLogprob});
    }
  }
  return logits;
}

namespace {

struct Outcome {
  std::optional<QuestionResult> result;
  std::optional<FailureRecord> failure;
  bool backend_ok = false;
};

Outcome process_question(const EntityQuestion& q, const VideoRecord& video,
                         BackendClient& backend, const EvalConfig& cfg,
                         const std::string& config_hash, ResponseCache* cache) {
  Outcome out;
  BackendRequest request{q.question_id,        video.media_ref, render_answer_prompt(q),
                         std::string(kAnswerTemplateId), cfg.want_logprobs, cfg.top_k};
  const std::string key = ResponseCache::key(backend.id(), q.question_id, config_hash);
  std::optional<BackendResponse> response;
  if (cache != nullptr) response = cache->load(key);
  if (!response) {
    try {
      response = backend.answer(request);
    } catch (const Error& e) {
      out.failure =
          FailureRecord{q.question_id, q.video_id, std::string(error_code_name(e.code())), e.detail()};
      return out;
    }
    if (cache != nullptr) cache->store(key, *response);
  }
  out.backend_ok = true;

  QuestionResult r;
  r.question = q;
  r.raw_text = response->raw_text;
  r.response = parse_tagged(r.raw_text, cfg.strictness);
  r.logprobs_available = cfg.want_logprobs && !response->per_token.empty();
  if (r.logprobs_available) {
    try {
      r.distribution = restricted_softmax(answer_logits_from(*response, q.question_id),
                                          cfg.token_sets);
    } catch (const Error& e) {
      r.unscored_reason = std::string(error_code_name(e.code())) + ": " + e.detail();
    }
  }
  out.result = std::move(r);
  return out;
}

std::optional<double> mean(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void correlate(MetricRow& row, const std::vector<ScorePair>& pairs) {
  row.n_videos = pairs.size();
  if (pairs.size() < 2) {
    row.degenerate_flags.push_back("insufficient_videos");
    return;
  }
  try {
    row.srcc = srcc(pairs);
    row.plcc = plcc(pairs);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateVariance) throw;
    row.degenerate_flags.push_back("degenerate_variance");
  }
}

}  // namespace

std::vector<MetricRow> compute_eval_metrics(const Dataset& dataset,
                                            const std::vector<QuestionResult>& results,
                                            const std::vector<VideoResult>& videos,
                                            const EvalConfig& config) {
  if (dataset.truths.empty()) return {};
  std::map<std::string, const GroundTruth*> truth_of;
  for (const auto& t : dataset.truths) truth_of[t.question_id] = &t;

  // Reference scores implied by the annotated answers, per video.
  std::map<std::string, std::map<Dimension, std::vector<double>>> implied;
  for (const auto& q : dataset.questions) {
    const auto it = truth_of.find(q.question_id);
    if (it == truth_of.end()) continue;
    implied[q.video_id][q.dimension].push_back(entity_score(it->second->answer, q.polarity));
  }

  std::vector<MetricRow> rows;
  auto accuracy_for = [&](std::optional<Dimension> dim, MetricRow& row) {
    std::vector<Prediction> preds;
    std::vector<GroundTruth> truths;
    for (const auto& r : results) {
      if (dim && r.question.dimension != *dim) continue;
      const auto it = truth_of.find(r.question.question_id);
      if (it == truth_of.end()) continue;
      preds.push_back({r.question.question_id, r.response});
      truths.push_back(*it->second);
    }
    row.n_questions = preds.size();
    if (preds.empty()) {
      row.degenerate_flags.push_back("no_annotated_results");
      return;
    }
    row.acc = answer_accuracy(preds, truths);
  };

  for (const Dimension d : kAllDimensions) {
    MetricRow row;
    row.label = std::string(dimension_name(d));
    accuracy_for(d, row);
    std::vector<ScorePair> pairs;
    for (const auto& v : videos) {
      const ScoreTree view = v.tree.normalized();
      const auto pred = view.dim_scores.find(d);
      if (pred == view.dim_scores.end()) continue;
      const auto vit = implied.find(v.video_id);
      if (vit == implied.end()) continue;
      const auto dit = vit->second.find(d);
      if (dit == vit->second.end()) continue;
      pairs.push_back({v.video_id, pred->second, *mean(dit->second)});
    }
    correlate(row, pairs);
    rows.push_back(std::move(row));
  }

  MetricRow overall;
  overall.label = "overall";
  accuracy_for(std::nullopt, overall);
  std::vector<ScorePair> pairs;
  for (const auto& v : videos) {
    const auto vit = implied.find(v.video_id);
    if (vit == implied.end()) continue;
    std::map<Dimension, double> ref;
    for (const auto& [d, scores] : vit->second) ref[d] = *mean(scores);
    const double reference = overall_score(ref, config.weights, ScoreMode::kNormalized).value;
    pairs.push_back({v.video_id, v.tree.normalized().overall, reference});
  }
  correlate(overall, pairs);
  rows.push_back(std::move(overall));
  return rows;
}

EvalRun run_eval(const Dataset& dataset, BackendClient& backend, const EvalConfig& config) {
  config.validate();
  EvalRun run;
  run.backend_id = backend.id();
  run.config = config;
  run.questions_in = dataset.questions.size();
  const std::string config_hash = config.hash();

  std::string dataset_digest;
  for (const auto& q : dataset.questions) dataset_digest += q.question_id + '\t' + q.text + '\n';
  run.run_id = fingerprint(run.backend_id + '\n' + config_hash + '\n' + fingerprint(dataset_digest));

  std::optional<ResponseCache> cache;
  if (config.cache_dir) cache.emplace(*config.cache_dir);

  std::map<std::string, const VideoRecord*> video_of;
  for (const auto& v : dataset.videos) video_of[v.video_id] = &v;

  const std::size_t n = dataset.questions.size();
  std::vector<Outcome> outcomes(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto& q = dataset.questions[i];
        const auto vit = video_of.find(q.video_id);
        if (vit == video_of.end()) {
          throw Error(ErrorCode::kDanglingReference, "unknown video " + q.video_id);
        }
        outcomes[i] = process_question(q, *vit->second, backend, config, config_hash,
                                       cache ? &*cache : nullptr);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    const std::size_t workers = std::max<std::size_t>(1, std::min(config.parallelism, n));
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t backend_ok = 0;
  for (auto& o : outcomes) {
    backend_ok += o.backend_ok ? 1 : 0;
    if (o.result) run.results.push_back(std::move(*o.result));
    if (o.failure) run.failures.push_back(std::move(*o.failure));
  }
  if (n > 0 && backend_ok == 0) {
    throw Error(ErrorCode::kFatalBackend,
                "every backend call failed (" + std::to_string(n) + " questions); first: " +
                    run.failures.front().message);
  }

  // A video is scored from probabilities only when every answered question
  // came back with logprobs; otherwise all of its questions use hard answers.
  std::map<std::string, bool> prob_video;
  for (const auto& r : run.results) {
    auto [it, inserted] = prob_video.emplace(r.question.video_id, true);
    it->second = it->second && r.logprobs_available;
  }
  std::map<std::string, std::vector<ScoredQuestion>> scored;
  for (auto& r : run.results) {
    const bool prob = prob_video[r.question.video_id];
    if (prob && r.distribution) {
      r.entity_score = entity_score(*r.distribution, r.question.polarity);
    } else if (!prob && r.response.answer) {
      r.entity_score = entity_score(*r.response.answer, r.question.polarity);
      r.unscored_reason.clear();
    } else if (r.unscored_reason.empty()) {
      r.unscored_reason = "no answer in response";
    }
    if (r.entity_score) {
      scored[r.question.video_id].push_back(
          {r.question.question_id, r.question.dimension, *r.entity_score});
    }
  }

  for (const auto& v : dataset.videos) {
    const auto it = scored.find(v.video_id);
    if (it == scored.end()) {
      if (prob_video.contains(v.video_id)) {
        run.warnings.push_back("video " + v.video_id + ": no scorable answers");
      }
      continue;
    }
    try {
      const bool prob = prob_video[v.video_id];
      run.videos.push_back(
          {v.video_id, prob,
           build_score_tree(v.video_id, it->second, config.weights, config.mode, prob)});
    } catch (const Error& e) {
      run.warnings.push_back("video " + v.video_id + ": " + e.what());
    }
  }

  run.metrics = compute_eval_metrics(dataset, run.results, run.videos, config);
  return run;
}

}  // namespace fg
