// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_QGEN_HPP_
#define FG_QGEN_HPP_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fg/jsonl.hpp"
#include "fg/llm_client.hpp"
#include "fg/question.hpp"
#include "fg/types.hpp"

namespace fg {

struct IclExample {
  std::string prompt;
  // Only used by question-generation examples.
  std::string entity;
  std::string response;
};

struct DimensionGuide {
  std::string explanation;
  std::vector<std::string> key_points;
  std::vector<IclExample> examples;
};

// Versioned in-context-learning templates, loaded from a JSON file so they
// can be swapped without rebuilding.
struct IclExampleSet {
  std::string version;
  std::string extraction_instruction;
  std::vector<IclExample> extraction_examples;
  std::string question_instruction;
  std::map<Dimension, DimensionGuide> dimensions;

  static IclExampleSet from_json(const Json& j);
  static IclExampleSet load(const std::filesystem::path& path);
};

std::string extraction_template_id(const IclExampleSet& icl);
std::string question_template_id(const IclExampleSet& icl, Dimension dimension);

std::string render_extraction_prompt(const UserPrompt& prompt, const IclExampleSet& icl);
std::string render_question_prompt(const Entity& entity, Dimension dimension,
                                   const UserPrompt& prompt, const IclExampleSet& icl);

// Entities from a response holding a JSON array of
// {"name", "attributes", "actions"} objects, possibly wrapped in prose or a
// code fence. Throws ParseError if no such array can be read.
std::vector<Entity> parse_entity_response(std::string_view response, const UserPrompt& prompt);

std::vector<Entity> extract_entities(const UserPrompt& prompt, LlmCaller& caller,
                                     const IclExampleSet& icl);

struct ExtractedQuestion {
  // Ordinal among the matching lines, 1-based.
  std::size_t ordinal = 0;
  std::string text;
  std::optional<Polarity> polarity;
};

// One question per line: `Q<k>: <text>`, with an optional `[POS]` or `[NEG]`
// marker right after the colon or at the end of the line. Other lines are
// discarded.
std::vector<ExtractedQuestion> extract_question_lines(std::string_view response);

// Throws ExtractionEmpty when no line matches. Questions carry the prompt id
// as video id until fanned out to videos.
std::vector<EntityQuestion> generate_questions(const Entity& entity, Dimension dimension,
                                               const UserPrompt& prompt, LlmCaller& caller,
                                               const IclExampleSet& icl);

Json question_to_json(const EntityQuestion& q);
EntityQuestion question_from_json(const Json& j, std::string_view where);

class QuestionSink {
 public:
  virtual ~QuestionSink() = default;
  virtual void write(const EntityQuestion& question) = 0;
};

// questions.jsonl writer; writes are serialised.
class JsonlQuestionSink : public QuestionSink {
 public:
  explicit JsonlQuestionSink(const std::filesystem::path& path);
  void write(const EntityQuestion& question) override;

 private:
  std::mutex mu_;
  std::ofstream out_;
  std::filesystem::path path_;
};

struct QgenFailure {
  std::string prompt_id;
  std::string entity;
  std::optional<Dimension> dimension;
  std::string code;
  std::string message;
};

struct QgenReport {
  std::size_t prompts = 0;
  std::size_t entities = 0;
  std::size_t cells = 0;
  std::size_t questions_written = 0;
  std::vector<QgenFailure> failures;
  std::vector<std::string> warnings;

  Json to_json() const;
};

struct QgenOptions {
  // prompt_id -> video ids generated from it. Empty: one pseudo-video per
  // prompt named after the prompt. Otherwise prompts without videos emit
  // nothing and get a warning.
  std::map<std::string, std::vector<std::string>> videos_by_prompt;
  std::size_t parallelism = 1;
};

// Every (prompt, entity, dimension) cell either yields questions or a
// failure entry. Output order follows the input order regardless of
// parallelism.
QgenReport run_qgen_batch(std::span<const UserPrompt> prompts, LlmCaller& caller,
                          const IclExampleSet& icl, QuestionSink& sink,
                          const QgenOptions& options = {});

}  // namespace fg

#endif  // FG_QGEN_HPP_
