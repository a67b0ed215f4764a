// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "doctest.h"
#include "fg/jsonl.hpp"
#include "fg/qgen.hpp"
#include "test_util.hpp"

namespace fg {
namespace {

const std::string kData = FG_DATA_DIR;

// Answers from a function of the request; `fail_first` calls throw.
class ScriptedLlm : public LlmClient {
 public:
  explicit ScriptedLlm(std::function<std::string(const LlmRequest&)> fn, int fail_first = 0)
      : fn_(std::move(fn)), fail_first_(fail_first) {}

  LlmResponse complete(const LlmRequest& request) override {
    if (calls_++ < fail_first_) throw Error(ErrorCode::kClientError, "scripted outage");
    return {fn_(request)};
  }
  std::string id() const override { return "scripted"; }
  int calls() const { return calls_; }

 private:
  std::function<std::string(const LlmRequest&)> fn_;
  int fail_first_;
  std::atomic<int> calls_{0};
};

class CollectingSink : public QuestionSink {
 public:
  void write(const EntityQuestion& q) override {
    std::lock_guard lock(mu_);
    questions.push_back(q);
  }
  std::vector<EntityQuestion> questions;

 private:
  std::mutex mu_;
};

const IclExampleSet& icl() {
  static const IclExampleSet set = IclExampleSet::load(kData + "/templates/icl_v1.json");
  return set;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

TEST_CASE("icl templates load with examples for every dimension") {
  CHECK(icl().version == "v1");
  CHECK_FALSE(icl().extraction_examples.empty());
  for (const auto d : kAllDimensions) CHECK_FALSE(icl().dimensions.at(d).examples.empty());
  CHECK(extraction_template_id(icl()) == "entity_extraction/v1");
  CHECK(question_template_id(icl(), Dimension::kDynamicDegree) ==
        "question_generation/dynamic_degree/v1");
}

TEST_CASE("extract_entities reads the structured response") {
  ScriptedLlm llm([](const LlmRequest& r) {
    CHECK(contains(r.rendered_prompt, "Prompt: a dog chases a red ball\nEntities:"));
    return std::string(
        R"(Sure: [{"name":"dog","attributes":[],"actions":["chases"]},)"
        R"({"name":"red ball","attributes":["red"],"actions":[]}])");
  });
  LlmCaller caller(llm, {}, no_sleep());
  const auto entities = extract_entities({"p", "a dog chases a red ball"}, caller, icl());
  REQUIRE(entities.size() == 2);
  CHECK(entities[0].name == "dog");
  CHECK(entities[0].actions == std::vector<std::string>{"chases"});
  CHECK(entities[1].name == "red ball");
  CHECK_FALSE(entities[1].inferred);
}

TEST_CASE("extract_entities: empty list, garbage, empty prompt") {
  ScriptedLlm empty([](const LlmRequest&) { return std::string("[]"); });
  LlmCaller c1(empty, {}, no_sleep());
  CHECK(extract_entities({"p", "abstract swirls"}, c1, icl()).empty());

  ScriptedLlm prose([](const LlmRequest&) { return std::string("I cannot help."); });
  LlmCaller c2(prose, {}, no_sleep());
  FG_CHECK_THROWS_CODE(extract_entities({"p", "a cat"}, c2, icl()), ErrorCode::kParseError);
  FG_CHECK_THROWS_CODE(extract_entities({"p", "  "}, c2, icl()), ErrorCode::kInvalidArgument);
}

TEST_CASE("entities not named in the prompt are marked inferred") {
  const auto e = parse_entity_response(R"([{"name":"Sun","attributes":[],"actions":[]}])",
                                       {"p", "a bright day"});
  REQUIRE(e.size() == 1);
  CHECK(e[0].inferred);
}

TEST_CASE("corpus fixture yields the three authored entities") {
  MockLlmClient llm(kData + "/mini_corpus/llm");
  LlmCaller caller(llm, {}, no_sleep());
  const auto e =
      extract_entities({"p1", "a dog chases a red ball across a sunny park"}, caller, icl());
  REQUIRE(e.size() == 3);
  CHECK(e[0].name == "dog");
  CHECK(e[1].name == "red ball");
  CHECK(e[2].name == "park");
  CHECK(e[2].attributes == std::vector<std::string>{"sunny"});
}

TEST_CASE("question line extraction") {
  const auto lines = extract_question_lines(
      "Here you go.\n"
      "Q1: [POS] Is the dog running?\n"
      "  Q2 : Is the dog blurry? [NEG]\n"
      "Q3: Is the grass green?\n"
      "Q4: [POS]\n"
      "q5: lowercase is ignored\n");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].text == "Is the dog running?");
  CHECK(lines[0].polarity == Polarity::kPositive);
  CHECK(lines[1].text == "Is the dog blurry?");
  CHECK(lines[1].polarity == Polarity::kNegative);
  CHECK_FALSE(lines[2].polarity);
  CHECK(lines[2].ordinal == 3);
}

TEST_CASE("generate_questions") {
  const UserPrompt prompt{"p2", "a glass vase of sunflowers stands on a wooden table"};
  const Entity table{"table", {"wooden"}, {}, prompt.text, false};

  ScriptedLlm one([](const LlmRequest& r) {
    CHECK(r.template_id == "question_generation/factual_consistency/v1");
    CHECK(contains(r.rendered_prompt, "Entity: table\nAttributes: wooden\nQuestions:"));
    return std::string(
        "Q1: [POS] Does the table align with real-world characteristics, such as standing "
        "steadily on its legs?");
  });
  LlmCaller c1(one, {}, no_sleep());
  const auto qs = generate_questions(table, Dimension::kFactualConsistency, prompt, c1, icl());
  REQUIRE(qs.size() == 1);
  CHECK(qs[0].polarity == Polarity::kPositive);
  CHECK(qs[0].question_id == "p2-table-factual_consistency-1");
  CHECK(qs[0].video_id == "p2");
  CHECK_FALSE(qs[0].polarity_defaulted);

  ScriptedLlm two([](const LlmRequest&) {
    return std::string("Q1: [POS] Is the table wooden?\nQ2: [NEG] Does the table bend?\nQ3: Tall?");
  });
  LlmCaller c2(two, {}, no_sleep());
  const auto qs2 = generate_questions(table, Dimension::kTextAlignment, prompt, c2, icl());
  REQUIRE(qs2.size() == 3);
  CHECK(qs2[0].polarity == Polarity::kPositive);
  CHECK(qs2[1].polarity == Polarity::kNegative);
  CHECK(qs2[2].polarity == Polarity::kPositive);
  CHECK(qs2[2].polarity_defaulted);

  ScriptedLlm none([](const LlmRequest&) { return std::string("No questions apply."); });
  LlmCaller c3(none, {}, no_sleep());
  FG_CHECK_THROWS_CODE(generate_questions(table, Dimension::kDynamicDegree, prompt, c3, icl()),
                       ErrorCode::kExtractionEmpty);

  IclExampleSet bare = icl();
  bare.dimensions.erase(Dimension::kDynamicDegree);
  FG_CHECK_THROWS_CODE(generate_questions(table, Dimension::kDynamicDegree, prompt, c3, bare),
                       ErrorCode::kInvalidArgument);
}

TEST_CASE("caller retries with backoff and logs every exchange") {
  ScriptedLlm flaky([](const LlmRequest&) { return std::string("[]"); }, 2);
  std::vector<std::chrono::milliseconds> slept;
  LlmCaller caller(flaky, {3, std::chrono::milliseconds(100), 2.0},
                   [&](std::chrono::milliseconds d) { slept.push_back(d); });
  CHECK(caller.call({"t", "x"}) == "[]");
  CHECK(flaky.calls() == 3);
  using ms = std::chrono::milliseconds;
  CHECK(slept == std::vector<ms>{ms(0), ms(100), ms(200)});
  REQUIRE(caller.exchanges().size() == 1);
  CHECK(caller.exchanges()[0].attempt == 3);
  ScriptedLlm down([](const LlmRequest&) { return std::string(); }, 100);
  LlmCaller gives_up(down, {2, std::chrono::milliseconds(1), 2.0}, no_sleep());
  FG_CHECK_THROWS_CODE(gives_up.call({"t", "x"}), ErrorCode::kClientError);
  CHECK(down.calls() == 2);
}

TEST_CASE("question json round-trip") {
  EntityQuestion q{"v1:p1-dog-visual_quality-1", "v1", Dimension::kVisualQuality, "dog",
                   "Is the dog sharp?", Polarity::kNegative, true};
  const auto back = question_from_json(question_to_json(q), "test");
  CHECK(back.question_id == q.question_id);
  CHECK(back.polarity == Polarity::kNegative);
  CHECK(back.polarity_defaulted);
  auto bad = question_to_json(q);
  bad["dimension"] = "smell";
  FG_CHECK_THROWS_CODE(question_from_json(bad, "test"), ErrorCode::kSchemaError);
}

std::vector<UserPrompt> corpus_prompts() {
  std::vector<UserPrompt> out;
  for (const auto& rec : read_jsonl(kData + "/mini_corpus/prompts.jsonl")) {
    out.push_back({rec.value.at("prompt_id"), rec.value.at("text")});
  }
  return out;
}

QgenOptions corpus_videos(std::size_t parallelism) {
  QgenOptions o;
  o.parallelism = parallelism;
  for (const auto& rec : read_jsonl(kData + "/mini_corpus/videos.jsonl")) {
    o.videos_by_prompt[rec.value.at("prompt_id")].push_back(rec.value.at("video_id"));
  }
  return o;
}

TEST_CASE("batch over the corpus reproduces questions.jsonl") {
  MockLlmClient llm(kData + "/mini_corpus/llm");
  LlmCaller caller(llm, {1, {}, 1.0}, no_sleep());
  std::string expected = read_text(kData + "/mini_corpus/questions.jsonl");
  for (const std::size_t parallelism : {1u, 3u}) {
    CollectingSink sink;
    const auto prompts = corpus_prompts();
    const auto report = run_qgen_batch(prompts, caller, icl(), sink, corpus_videos(parallelism));
    CHECK(report.prompts == 2);
    CHECK(report.entities == 5);
    CHECK(report.cells == 25);
    // The park has no motion questions.
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].code == "ExtractionEmpty");
    CHECK(report.failures[0].entity == "park");
    CHECK(report.questions_written == sink.questions.size());
    std::string got;
    for (const auto& q : sink.questions) got += dump_line(question_to_json(q)) + "\n";
    CHECK(got == expected);
  }
}

TEST_CASE("batch: failures are recorded per cell, not fatal") {
  ScriptedLlm llm([](const LlmRequest& r) {
    if (r.template_id.rfind("entity_extraction", 0) == 0) {
      if (contains(r.rendered_prompt, "Prompt: broken")) return std::string("nope");
      return std::string(R"([{"name":"cat","attributes":[],"actions":[]},)"
                         R"({"name":"cat","attributes":[],"actions":[]}])");
    }
    if (contains(r.template_id, "dynamic_degree")) return std::string("none");
    return std::string("Q1: [POS] Is it there?");
  });
  LlmCaller caller(llm, {1, {}, 1.0}, no_sleep());
  CollectingSink sink;
  const std::vector<UserPrompt> prompts = {{"a", "a cat"}, {"b", "broken"}};
  const auto report = run_qgen_batch(prompts, caller, icl(), sink);
  CHECK(report.entities == 1);
  CHECK(report.cells == 5);
  CHECK(report.questions_written == 4);
  REQUIRE(report.failures.size() == 2);
  CHECK(report.failures[0].code == "ExtractionEmpty");
  CHECK(report.failures[1].prompt_id == "b");
  CHECK(report.failures[1].code == "ParseError");
  CHECK(report.warnings.size() == 1);
  CHECK(sink.questions[0].video_id == "a");
  CHECK(sink.questions[0].question_id == "a:a-cat-visual_quality-1");

  const std::vector<UserPrompt> dup = {{"a", "x"}, {"a", "y"}};
  FG_CHECK_THROWS_CODE(run_qgen_batch(dup, caller, icl(), sink), ErrorCode::kDuplicateId);
}

TEST_CASE("batch: prompts without videos emit nothing") {
  ScriptedLlm llm([](const LlmRequest& r) {
    if (r.template_id.rfind("entity_extraction", 0) == 0) {
      return std::string(R"([{"name":"cat","attributes":[],"actions":[]}])");
    }
    return std::string("Q1: Is it there?");
  });
  LlmCaller caller(llm, {}, no_sleep());
  CollectingSink sink;
  QgenOptions o;
  o.videos_by_prompt["a"] = {"va1", "va2"};
  const std::vector<UserPrompt> prompts = {{"a", "a cat"}, {"b", "a cat"}};
  const auto report = run_qgen_batch(prompts, caller, icl(), sink, o);
  CHECK(report.questions_written == 10);
  CHECK(sink.questions.front().video_id == "va1");
  CHECK(sink.questions.back().video_id == "va2");
  CHECK(report.warnings == std::vector<std::string>{"prompt b: no videos"});
}

}  // namespace
}  // namespace fg
