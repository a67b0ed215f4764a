// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end for question generation, evaluation, scoring,
// metrics and the toy GRPO run.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "criteria.hpp"
#include "fg/backend.hpp"
#include "fg/config.hpp"
#include "fg/dataset.hpp"
#include "fg/error.hpp"
#include "fg/eval.hpp"
#include "fg/llm_client.hpp"
#include "fg/qgen.hpp"
#include "fg/report.hpp"
#include "fg/toy_policy.hpp"

#ifndef FG_CONFIG_DIR
#define FG_CONFIG_DIR "configs"
#endif
#ifndef FG_DATA_DIR
#define FG_DATA_DIR "data"
#endif

namespace {

namespace fs = std::filesystem;

struct ScoringFlags {
  std::string mode = "normalized";
  std::string strictness = "strict";
  std::string weights;
  std::string token_sets;

  void add_to(CLI::App* app) {
    app->add_option("--mode", mode, "paper-literal or normalized")
        ->check(CLI::IsMember({"paper-literal", "paper_literal", "normalized"}));
    app->add_option("--strictness", strictness, "strict or lenient")
        ->check(CLI::IsMember({"strict", "lenient"}));
    app->add_option("--weights", weights, "dimension weights JSON")->check(CLI::ExistingFile);
    app->add_option("--token-sets", token_sets, "Yes/No token sets JSON")
        ->check(CLI::ExistingFile);
  }

  fg::EvalConfig config() const {
    fg::EvalConfig cfg;
    cfg.mode = *fg::parse_score_mode(mode);
    cfg.strictness = *fg::parse_strictness(strictness);
    if (!weights.empty()) cfg.weights = fg::load_weights(weights);
    if (!token_sets.empty()) cfg.token_sets = fg::load_token_sets(token_sets);
    return cfg;
  }
};

std::unique_ptr<fg::LlmClient> make_llm(const std::string& spec,
                                        const std::optional<fs::path>& miss_log) {
  if (spec.rfind("mock:", 0) == 0) {
    return std::make_unique<fg::MockLlmClient>(spec.substr(5), miss_log);
  }
  if (spec.rfind("http://", 0) == 0) return std::make_unique<fg::HttpLlmClient>(spec);
  throw fg::Error(fg::ErrorCode::kInvalidArgument, "--llm must be mock:<dir> or an http:// URL");
}

std::vector<fg::UserPrompt> read_prompts(const fs::path& path) {
  std::vector<fg::UserPrompt> out;
  for (const auto& rec : fg::read_jsonl(path)) {
    const std::string where = path.filename().string() + ":" + std::to_string(rec.line);
    out.push_back({fg::require_string(rec.value, "prompt_id", where),
                   fg::require_string(rec.value, "text", where)});
  }
  return out;
}

int cmd_qgen(const std::string& prompts_path, const std::string& icl_path,
             const std::string& llm, const std::string& videos_path, const std::string& out,
             const std::string& report_path, const std::string& miss_log, std::size_t parallelism,
             int retries) {
  const auto prompts = read_prompts(prompts_path);
  const auto icl = fg::IclExampleSet::load(icl_path);
  std::optional<fs::path> miss;
  if (!miss_log.empty()) miss = miss_log;
  auto client = make_llm(llm, miss);
  const bool mock = llm.rfind("mock:", 0) == 0;
  fg::RetryPolicy retry;
  retry.max_attempts = retries;
  fg::LlmCaller caller(*client, retry, mock ? fg::no_sleep() : fg::thread_sleeper());

  fg::QgenOptions options;
  options.parallelism = parallelism;
  if (!videos_path.empty()) {
    for (const auto& rec : fg::read_jsonl(videos_path)) {
      const std::string where = "videos.jsonl:" + std::to_string(rec.line);
      options.videos_by_prompt[fg::require_string(rec.value, "prompt_id", where)].push_back(
          fg::require_string(rec.value, "video_id", where));
    }
  }
  fg::JsonlQuestionSink sink(out);
  const auto report = fg::run_qgen_batch(prompts, caller, icl, sink, options);
  const std::string text = report.to_json().dump(2) + "\n";
  if (!report_path.empty()) fg::write_text(report_path, text);
  std::cout << text;
  return report.failures.empty() ? 0 : 3;
}

int cmd_eval(const std::string& dataset_dir, const std::string& backend_spec,
             const ScoringFlags& flags, std::size_t parallelism, const std::string& cache,
             bool no_logprobs, const std::string& out_dir) {
  const auto dataset = fg::ingest(dataset_dir);
  auto backend = fg::make_backend(backend_spec);
  fg::EvalConfig cfg = flags.config();
  cfg.parallelism = parallelism;
  cfg.want_logprobs = !no_logprobs;
  if (!cache.empty()) cfg.cache_dir = cache;
  const auto run = fg::run_eval(dataset, *backend, cfg);

  const fs::path out(out_dir);
  std::vector<fg::ScoreTree> trees;
  for (const auto& v : run.videos) trees.push_back(v.tree);
  fg::write_scores(out / "scores.jsonl", trees);
  fg::emit_report(run, fg::ReportFormat::kJson, out / "report.json");
  fg::emit_report(run, fg::ReportFormat::kMarkdownTable, out / "report.md");
  std::cout << fg::render_report(run, fg::ReportFormat::kMarkdownTable);
  return 0;
}

int cmd_score(const std::string& questions_path, const std::string& responses_path,
              const ScoringFlags& flags, const std::string& out) {
  std::vector<fg::EntityQuestion> questions;
  for (const auto& rec : fg::read_jsonl(questions_path)) {
    questions.push_back(
        fg::question_from_json(rec.value, "questions.jsonl:" + std::to_string(rec.line)));
  }
  const auto trees =
      fg::score_responses(questions, fg::read_responses(responses_path), flags.config());
  fg::write_scores(out, trees);
  std::cout << "scored " << trees.size() << " videos -> " << out << "\n";
  return 0;
}

int cmd_metrics(const std::string& scores, const std::string& mos, const std::string& prefs,
                double tie_max, std::size_t tie_steps, const std::string& out) {
  const auto trees = fg::read_scores(scores);
  const auto mos_records = mos.empty() ? std::vector<fg::MosRecord>{} : fg::read_mos(mos);
  const auto pref_records =
      prefs.empty() ? std::vector<fg::PreferenceRecord>{} : fg::read_preferences(prefs);
  const auto report = fg::compute_metrics_report(trees, mos_records, pref_records,
                                                 fg::threshold_grid(tie_max, tie_steps));
  const std::string text = report.to_json().dump(2) + "\n";
  fg::write_text(out, text);
  std::cout << text;
  return 0;
}

int cmd_train_toy(const std::string& config_path, const std::string& mode,
                  std::optional<std::size_t> steps, std::optional<std::uint64_t> seed,
                  const std::string& out) {
  fg::GrpoFile file;
  if (!config_path.empty()) file = fg::load_grpo_file(config_path);
  if (steps) file.toy.steps = *steps;
  if (seed) file.grpo.seed = *seed;
  const auto train_mode = mode == "zero" ? fg::toy::TrainMode::kZero : fg::toy::TrainMode::kColdStart;

  const fg::toy::SyntheticQaEnv env(file.toy.binary_features, file.grpo.seed);
  auto policy = fg::toy::ToyPolicy::base(env.feature_count(), file.grpo.seed);
  const auto curve =
      fg::toy::train_toy_grpo(env, policy, file.grpo, file.toy.steps, train_mode, file.toy.options);

  std::string text;
  for (const auto& s : curve.steps) {
    fg::Json j;
    j["schema_version"] = fg::kSchemaVersion;
    j["step"] = s.step;
    j["mean_reward"] = s.mean_reward;
    j["acc_rate"] = s.acc_rate;
    j["fmt_rate"] = s.fmt_rate;
    j["kl"] = s.kl;
    j["loss"] = s.loss;
    text += fg::dump_line(j) + "\n";
  }
  fg::write_text(out, text);

  const auto rates = fg::toy::evaluate_policy(env, policy, 10000, file.grpo.seed);
  fg::Json summary;
  summary["mode"] = std::string(fg::toy::train_mode_name(train_mode));
  summary["steps"] = curve.steps.size();
  summary["sft_loss"] = curve.sft_loss;
  summary["eval_acc_rate"] = rates.acc_rate;
  summary["eval_fmt_rate"] = rates.fmt_rate;
  summary["config"] = fg::grpo_file_to_json(file);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_selftest(const std::string& data_dir, std::uint64_t seed) {
  fg::acceptance::CriteriaOptions options;
  options.data_dir = data_dir;
  options.config_dir = FG_CONFIG_DIR;
  options.seed = seed;
  options.work_dir = fs::temp_directory_path() / "fgeval-selftest";
  int failed = 0;
  for (const auto& r : fg::acceptance::run_criteria(options)) {
    std::cout << fg::acceptance::format_result(r) << "\n";
    failed += r.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fgeval: entity-level video evaluation toolkit"};
  app.require_subcommand(1);

  std::size_t parallelism = 1;

  auto* qgen = app.add_subcommand("qgen", "prompts.jsonl -> questions.jsonl");
  std::string q_prompts, q_icl = std::string(FG_DATA_DIR) + "/templates/icl_v1.json", q_llm,
                         q_videos, q_out = "questions.jsonl", q_report, q_miss;
  int q_retries = 3;
  qgen->add_option("--prompts", q_prompts, "prompts.jsonl")->required()->check(CLI::ExistingFile);
  qgen->add_option("--icl", q_icl, "in-context example templates")->check(CLI::ExistingFile);
  qgen->add_option("--llm", q_llm, "mock:<dir> or http:// URL")->required();
  qgen->add_option("--videos", q_videos, "videos.jsonl for prompt -> video fan-out")
      ->check(CLI::ExistingFile);
  qgen->add_option("--out", q_out, "questions.jsonl to write");
  qgen->add_option("--report", q_report, "where to write the batch report");
  qgen->add_option("--miss-log", q_miss, "append unanswered mock prompts here");
  qgen->add_option("--retries", q_retries, "attempts per LLM call")->check(CLI::PositiveNumber);
  qgen->add_option("--parallelism", parallelism, "worker count")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "dataset + backend -> scores and report");
  std::string e_dataset, e_backend, e_cache, e_out = ".";
  bool e_no_logprobs = false;
  ScoringFlags e_flags;
  eval->add_option("--dataset", e_dataset, "directory with videos/questions/annotations")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--backend", e_backend, "mock:<dir> or http:// URL")->required();
  eval->add_option("--parallelism", parallelism, "worker count")->check(CLI::PositiveNumber);
  eval->add_option("--cache", e_cache, "response cache directory");
  eval->add_flag("--no-logprobs", e_no_logprobs, "score from hard answers only");
  eval->add_option("--out", e_out, "output directory");
  e_flags.add_to(eval);

  auto* score = app.add_subcommand("score", "responses.jsonl -> scores.jsonl");
  std::string s_questions, s_responses, s_out = "scores.jsonl";
  ScoringFlags s_flags;
  score->add_option("--questions", s_questions, "questions.jsonl")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--responses", s_responses, "responses.jsonl")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--out", s_out, "scores.jsonl to write");
  s_flags.add_to(score);

  auto* metrics = app.add_subcommand("metrics", "scores + references -> metrics-report.json");
  std::string m_scores, m_mos, m_prefs, m_out = "metrics-report.json";
  double m_tie_max = 0.2;
  std::size_t m_tie_steps = 20;
  metrics->add_option("--scores", m_scores, "scores.jsonl")->required()->check(CLI::ExistingFile);
  metrics->add_option("--mos", m_mos, "mos.jsonl")->check(CLI::ExistingFile);
  metrics->add_option("--prefs", m_prefs, "prefs.jsonl")->check(CLI::ExistingFile);
  metrics->add_option("--tie-max", m_tie_max, "largest tie threshold")->check(CLI::NonNegativeNumber);
  metrics->add_option("--tie-steps", m_tie_steps, "tie threshold grid steps");
  metrics->add_option("--out", m_out, "metrics-report.json to write");

  auto* train = app.add_subcommand("train-toy", "GRPO on the synthetic QA task -> curve.jsonl");
  std::string t_config, t_mode = "cold_start", t_out = "curve.jsonl";
  std::optional<std::size_t> t_steps;
  std::optional<std::uint64_t> t_seed;
  train->add_option("--config", t_config, "grpo config JSON")->check(CLI::ExistingFile);
  train->add_option("--train-mode", t_mode, "zero or cold_start")
      ->check(CLI::IsMember({"zero", "cold_start"}));
  train->add_option("--steps", t_steps, "GRPO steps");
  train->add_option("--seed", t_seed, "seed");
  train->add_option("--out", t_out, "curve.jsonl to write");

  auto* selftest = app.add_subcommand("selftest", "run the acceptance oracle suites");
  std::string st_data = FG_DATA_DIR;
  std::uint64_t st_seed = 20260101;
  selftest->add_option("--data", st_data, "data directory")->check(CLI::ExistingDirectory);
  selftest->add_option("--seed", st_seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*qgen) {
      return cmd_qgen(q_prompts, q_icl, q_llm, q_videos, q_out, q_report, q_miss, parallelism,
                      q_retries);
    }
    if (*eval) {
      return cmd_eval(e_dataset, e_backend, e_flags, parallelism, e_cache, e_no_logprobs, e_out);
    }
    if (*score) return cmd_score(s_questions, s_responses, s_flags, s_out);
    if (*metrics) return cmd_metrics(m_scores, m_mos, m_prefs, m_tie_max, m_tie_steps, m_out);
    if (*train) return cmd_train_toy(t_config, t_mode, t_steps, t_seed, t_out);
    if (*selftest) return cmd_selftest(st_data, st_seed);
  } catch (const fg::Error& e) {
    std::cerr << "fgeval: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fgeval: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
