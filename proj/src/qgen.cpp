// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/qgen.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "fg/error.hpp"
#include "fg/text.hpp"

namespace fg {
namespace {

std::vector<std::string> string_list(const Json& j, std::string_view key, std::string_view where) {
  std::vector<std::string> out;
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) {
    throw Error(ErrorCode::kSchemaError,
                std::string(where) + ": '" + std::string(key) + "' must be a list of strings");
  }
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw Error(ErrorCode::kSchemaError,
                  std::string(where) + ": '" + std::string(key) + "' must be a list of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<IclExample> examples_from(const Json& j, std::string_view where, bool with_entity) {
  std::vector<IclExample> out;
  const auto it = j.find("examples");
  if (it == j.end() || !it->is_array()) {
    throw Error(ErrorCode::kSchemaError, std::string(where) + ": 'examples' must be a list");
  }
  for (const auto& e : *it) {
    IclExample ex;
    ex.prompt = require_string(e, "prompt", where);
    if (with_entity) ex.entity = require_string(e, "entity", where);
    ex.response = require_string(e, "response", where);
    out.push_back(std::move(ex));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

void require_prompt(const UserPrompt& prompt) {
  if (trim(prompt.text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "prompt " + prompt.prompt_id + " has empty text");
  }
}

std::string slug(std::string_view name) {
  std::string out;
  bool dash = false;
  for (const char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      if (dash && !out.empty()) out += '-';
      out += static_cast<char>(std::tolower(u));
      dash = false;
    } else {
      dash = true;
    }
  }
  return out.empty() ? "entity" : out;
}

}  // namespace

IclExampleSet IclExampleSet::from_json(const Json& j) {
  IclExampleSet icl;
  icl.version = require_string(j, "version", "icl");
  const auto& ext = j.at("extraction");
  icl.extraction_instruction = require_string(ext, "instruction", "icl.extraction");
  icl.extraction_examples = examples_from(ext, "icl.extraction", false);
  const auto& qg = j.at("question_generation");
  icl.question_instruction = require_string(qg, "instruction", "icl.question_generation");
  for (const auto& [key, value] : qg.at("dimensions").items()) {
    const auto dim = parse_dimension(key);
    if (!dim) throw Error(ErrorCode::kSchemaError, "icl: unknown dimension '" + key + "'");
    const std::string where = "icl.dimensions." + key;
    DimensionGuide guide;
    guide.explanation = require_string(value, "explanation", where);
    guide.key_points = string_list(value, "key_points", where);
    guide.examples = examples_from(value, where, true);
    icl.dimensions[*dim] = std::move(guide);
  }
  return icl;
}

IclExampleSet IclExampleSet::load(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
    return from_json(j);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

std::string extraction_template_id(const IclExampleSet& icl) {
  return "entity_extraction/" + icl.version;
}

std::string question_template_id(const IclExampleSet& icl, Dimension dimension) {
  return "question_generation/" + std::string(dimension_name(dimension)) + "/" + icl.version;
}

std::string render_extraction_prompt(const UserPrompt& prompt, const IclExampleSet& icl) {
  std::ostringstream out;
  out << icl.extraction_instruction << "\n\n### Examples\n";
  for (const auto& ex : icl.extraction_examples) {
    out << "Prompt: " << ex.prompt << "\nEntities: " << ex.response << "\n\n";
  }
  out << "### Task\nPrompt: " << trim(prompt.text) << "\nEntities:";
  return out.str();
}

std::string render_question_prompt(const Entity& entity, Dimension dimension,
                                   const UserPrompt& prompt, const IclExampleSet& icl) {
  const auto it = icl.dimensions.find(dimension);
  if (it == icl.dimensions.end() || it->second.examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no in-context examples for dimension " + std::string(dimension_name(dimension)));
  }
  const DimensionGuide& guide = it->second;
  std::ostringstream out;
  out << icl.question_instruction << "\n\n### Dimension: " << dimension_title(dimension) << "\n"
      << guide.explanation << "\n";
  if (!guide.key_points.empty()) {
    out << "Key points:\n";
    for (const auto& kp : guide.key_points) out << "- " << kp << "\n";
  }
  out << "\n### Examples\n";
  for (const auto& ex : guide.examples) {
    out << "Prompt: " << ex.prompt << "\nEntity: " << ex.entity << "\nQuestions:\n"
        << ex.response << "\n\n";
  }
  out << "### Task\nPrompt: " << trim(prompt.text) << "\nEntity: " << entity.name;
  if (!entity.attributes.empty()) out << "\nAttributes: " << join(entity.attributes, ", ");
  if (!entity.actions.empty()) out << "\nActions: " << join(entity.actions, ", ");
  out << "\nQuestions:";
  return out.str();
}

std::vector<Entity> parse_entity_response(std::string_view response, const UserPrompt& prompt) {
  const auto open = response.find('[');
  const auto close = response.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw Error(ErrorCode::kParseError, "entity response has no JSON array");
  }
  Json arr;
  try {
    arr = Json::parse(response.substr(open, close - open + 1));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("entity response: ") + e.what());
  }
  const std::string lowered_prompt = to_lower(prompt.text);
  std::vector<Entity> out;
  for (const auto& item : arr) {
    if (!item.is_object()) throw Error(ErrorCode::kParseError, "entity entry is not an object");
    Entity e;
    try {
      e.name = std::string(trim(require_string(item, "name", "entity")));
      e.attributes = string_list(item, "attributes", "entity");
      e.actions = string_list(item, "actions", "entity");
    } catch (const Error& err) {
      throw Error(ErrorCode::kParseError, err.detail());
    }
    if (e.name.empty()) throw Error(ErrorCode::kParseError, "entity with empty name");
    e.source_prompt = prompt.prompt_id;
    e.inferred = lowered_prompt.find(to_lower(e.name)) == std::string::npos;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Entity> extract_entities(const UserPrompt& prompt, LlmCaller& caller,
                                     const IclExampleSet& icl) {
  require_prompt(prompt);
  if (icl.extraction_examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "extraction needs at least one example");
  }
  const std::string text =
      caller.call({extraction_template_id(icl), render_extraction_prompt(prompt, icl)});
  return parse_entity_response(text, prompt);
}

std::vector<ExtractedQuestion> extract_question_lines(std::string_view response) {
  static const std::regex kLine(
      R"(^\s*Q(\d+)\s*:\s*(?:\[(POS|NEG)\]\s*)?(.*?)\s*(?:\[(POS|NEG)\])?\s*$)");
  std::vector<ExtractedQuestion> out;
  for (const auto line : split_lines(response)) {
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(line.begin(), line.end(), m, kLine)) continue;
    ExtractedQuestion q;
    q.text = m[3].str();
    if (q.text.empty()) continue;
    const std::string marker = m[2].matched ? m[2].str() : m[4].matched ? m[4].str() : "";
    if (marker == "POS") q.polarity = Polarity::kPositive;
    if (marker == "NEG") q.polarity = Polarity::kNegative;
    q.ordinal = out.size() + 1;
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<EntityQuestion> generate_questions(const Entity& entity, Dimension dimension,
                                               const UserPrompt& prompt, LlmCaller& caller,
                                               const IclExampleSet& icl) {
  require_prompt(prompt);
  const std::string text = caller.call(
      {question_template_id(icl, dimension), render_question_prompt(entity, dimension, prompt, icl)});
  const auto lines = extract_question_lines(text);
  if (lines.empty()) {
    throw Error(ErrorCode::kExtractionEmpty,
                "no question lines for entity '" + entity.name + "' under " +
                    std::string(dimension_name(dimension)));
  }
  std::vector<EntityQuestion> out;
  for (const auto& line : lines) {
    EntityQuestion q;
    q.question_id = prompt.prompt_id + "-" + slug(entity.name) + "-" +
                    std::string(dimension_name(dimension)) + "-" + std::to_string(line.ordinal);
    q.video_id = prompt.prompt_id;
    q.dimension = dimension;
    q.entity = entity.name;
    q.text = line.text;
    q.polarity = line.polarity.value_or(Polarity::kPositive);
    q.polarity_defaulted = !line.polarity.has_value();
    out.push_back(std::move(q));
  }
  return out;
}

Json question_to_json(const EntityQuestion& q) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["question_id"] = q.question_id;
  j["video_id"] = q.video_id;
  j["dimension"] = std::string(dimension_name(q.dimension));
  j["entity"] = q.entity;
  j["text"] = q.text;
  j["polarity"] = polarity_bit(q.polarity);
  j["polarity_defaulted"] = q.polarity_defaulted;
  return j;
}

EntityQuestion question_from_json(const Json& j, std::string_view where) {
  EntityQuestion q;
  q.question_id = require_string(j, "question_id", where);
  q.video_id = require_string(j, "video_id", where);
  const std::string dim = require_string(j, "dimension", where);
  const auto d = parse_dimension(dim);
  if (!d) {
    throw Error(ErrorCode::kSchemaError, std::string(where) + ": unknown dimension '" + dim + "'");
  }
  q.dimension = *d;
  q.entity = require_string(j, "entity", where);
  q.text = require_string(j, "text", where);
  if (trim(q.text).empty()) {
    throw Error(ErrorCode::kSchemaError, std::string(where) + ": question text is empty");
  }
  const auto p = j.find("polarity");
  if (p == j.end() || !p->is_number_integer() || (p->get<int>() != 0 && p->get<int>() != 1)) {
    throw Error(ErrorCode::kSchemaError, std::string(where) + ": polarity must be 0 or 1");
  }
  q.polarity = p->get<int>() == 1 ? Polarity::kPositive : Polarity::kNegative;
  const auto pd = j.find("polarity_defaulted");
  if (pd != j.end()) {
    if (!pd->is_boolean()) {
      throw Error(ErrorCode::kSchemaError,
                  std::string(where) + ": polarity_defaulted must be a boolean");
    }
    q.polarity_defaulted = pd->get<bool>();
  }
  return q;
}

JsonlQuestionSink::JsonlQuestionSink(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::kSinkError, "cannot open " + path.string());
}

void JsonlQuestionSink::write(const EntityQuestion& question) {
  std::lock_guard lock(mu_);
  out_ << dump_line(question_to_json(question)) << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kSinkError, "write failed for " + path_.string());
}

Json QgenReport::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["prompts"] = prompts;
  j["entities"] = entities;
  j["cells"] = cells;
  j["questions_written"] = questions_written;
  j["failures"] = Json::array();
  for (const auto& f : failures) {
    Json e;
    e["prompt_id"] = f.prompt_id;
    e["entity"] = f.entity;
    e["dimension"] = f.dimension ? Json(std::string(dimension_name(*f.dimension))) : Json();
    e["code"] = f.code;
    e["message"] = f.message;
    j["failures"].push_back(std::move(e));
  }
  j["warnings"] = warnings;
  return j;
}

namespace {

struct PromptResult {
  std::size_t entities = 0;
  std::size_t cells = 0;
  std::vector<EntityQuestion> questions;
  std::vector<QgenFailure> failures;
  std::vector<std::string> warnings;
};

QgenFailure failure_from(const UserPrompt& prompt, const std::string& entity,
                         std::optional<Dimension> dim, const Error& e) {
  return {prompt.prompt_id, entity, dim, std::string(error_code_name(e.code())), e.detail()};
}

bool recoverable(ErrorCode code) {
  return code == ErrorCode::kClientError || code == ErrorCode::kParseError ||
         code == ErrorCode::kExtractionEmpty || code == ErrorCode::kInvalidArgument;
}

PromptResult process_prompt(const UserPrompt& prompt, LlmCaller& caller,
                            const IclExampleSet& icl) {
  PromptResult r;
  std::vector<Entity> entities;
  try {
    entities = extract_entities(prompt, caller, icl);
  } catch (const Error& e) {
    if (!recoverable(e.code())) throw;
    r.failures.push_back(failure_from(prompt, "", std::nullopt, e));
    return r;
  }
  if (entities.empty()) {
    r.warnings.push_back("prompt " + prompt.prompt_id + ": no entities extracted");
    return r;
  }
  std::set<std::string> seen;
  for (const auto& entity : entities) {
    if (!seen.insert(slug(entity.name)).second) {
      r.warnings.push_back("prompt " + prompt.prompt_id + ": duplicate entity '" + entity.name +
                           "' skipped");
      continue;
    }
    ++r.entities;
    if (entity.inferred) {
      r.warnings.push_back("prompt " + prompt.prompt_id + ": entity '" + entity.name +
                           "' not found in prompt text");
    }
    for (const Dimension dim : kAllDimensions) {
      ++r.cells;
      try {
        auto qs = generate_questions(entity, dim, prompt, caller, icl);
        for (auto& q : qs) r.questions.push_back(std::move(q));
      } catch (const Error& e) {
        if (!recoverable(e.code())) throw;
        r.failures.push_back(failure_from(prompt, entity.name, dim, e));
      }
    }
  }
  return r;
}

}  // namespace

QgenReport run_qgen_batch(std::span<const UserPrompt> prompts, LlmCaller& caller,
                          const IclExampleSet& icl, QuestionSink& sink,
                          const QgenOptions& options) {
  if (icl.extraction_examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "extraction needs at least one example");
  }
  std::set<std::string> ids;
  for (const auto& p : prompts) {
    if (!ids.insert(p.prompt_id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate prompt id " + p.prompt_id);
    }
  }

  std::vector<PromptResult> results(prompts.size());
  std::vector<std::exception_ptr> errors(prompts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      try {
        results[i] = process_prompt(prompts[i], caller, icl);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.parallelism, prompts.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  QgenReport report;
  report.prompts = prompts.size();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    PromptResult& r = results[i];
    report.entities += r.entities;
    report.cells += r.cells;
    for (auto& f : r.failures) report.failures.push_back(std::move(f));
    for (auto& w : r.warnings) report.warnings.push_back(std::move(w));

    std::vector<std::string> videos{prompts[i].prompt_id};
    if (!options.videos_by_prompt.empty()) {
      const auto it = options.videos_by_prompt.find(prompts[i].prompt_id);
      if (it == options.videos_by_prompt.end()) {
        report.warnings.push_back("prompt " + prompts[i].prompt_id + ": no videos");
        continue;
      }
      videos = it->second;
    }
    for (const auto& video : videos) {
      for (const auto& base : r.questions) {
        EntityQuestion q = base;
        q.video_id = video;
        q.question_id = video + ":" + base.question_id;
        sink.write(q);
        ++report.questions_written;
      }
    }
  }
  return report;
}

}  // namespace fg
