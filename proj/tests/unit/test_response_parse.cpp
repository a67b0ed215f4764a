// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "fg/jsonl.hpp"
#include "fg/response_parse.hpp"
#include "test_util.hpp"

namespace fg {
namespace {

std::vector<std::string> names(const TaggedResponse& r) {
  std::vector<std::string> out;
  for (const auto v : r.violations) out.emplace_back(violation_name(v));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TokenSpan> spans(std::vector<std::string> tokens) {
  return token_spans(tokens);
}

TEST_CASE("well-formed response is valid in both modes") {
  const std::string raw = "<answer>Yes</answer><reason>The hand has six fingers.</reason>";
  for (const auto s : {Strictness::kStrict, Strictness::kLenient}) {
    const auto r = parse_tagged(raw, s);
    CHECK(r.format_valid);
    REQUIRE(r.answer);
    CHECK(*r.answer == Answer::kYes);
    CHECK(r.reason == "The hand has six fingers.");
    CHECK(r.violations.empty());
  }
}

TEST_CASE("untagged answer misses both tags") {
  const auto r = parse_tagged("Yes", Strictness::kStrict);
  CHECK_FALSE(r.format_valid);
  CHECK(names(r) == std::vector<std::string>{"MissingAnswerTag", "MissingReasonTag"});
}

TEST_CASE("trailing standalone answer token only fails strict mode") {
  const std::string raw = "<answer>No</answer><reason>The vase floats.</reason> No";
  const auto strict = parse_tagged(raw, Strictness::kStrict);
  CHECK_FALSE(strict.format_valid);
  CHECK(names(strict) == std::vector<std::string>{"AnswerTokenOutsideAnswerTag"});
  const auto lenient = parse_tagged(raw, Strictness::kLenient);
  CHECK(lenient.format_valid);
  CHECK(*lenient.answer == Answer::kNo);
}

TEST_CASE("answer content is trimmed and checked against the vocabulary") {
  CHECK(parse_tagged("<answer> yes \n</answer><reason>ok</reason>", Strictness::kStrict)
            .format_valid);
  const auto r = parse_tagged("<answer>Maybe</answer><reason>ok</reason>", Strictness::kStrict);
  CHECK_FALSE(r.format_valid);
  CHECK(r.has(Violation::kAnswerNotYesNo));
  CHECK_FALSE(r.answer);
}

TEST_CASE("blank reason is a violation") {
  const auto r = parse_tagged("<answer>Yes</answer><reason>  </reason>", Strictness::kLenient);
  CHECK_FALSE(r.format_valid);
  CHECK(r.has(Violation::kEmptyReason));
}

TEST_CASE("render_tagged round-trips") {
  for (const auto a : {Answer::kYes, Answer::kNo}) {
    const auto r = parse_tagged(render_tagged(a, "looks natural"), Strictness::kStrict);
    CHECK(r.format_valid);
    CHECK(*r.answer == a);
    CHECK(r.reason == "looks natural");
  }
}

TEST_CASE("parser corpus matches its authored expectations") {
  const auto corpus = read_jsonl(std::string(FG_DATA_DIR) + "/parser_corpus.jsonl");
  REQUIRE(corpus.size() == 40);
  for (const auto& rec : corpus) {
    const auto raw = rec.value.at("raw").get<std::string>();
    CAPTURE(rec.value.at("id").get<std::string>());
    auto strict = rec.value.at("strict").get<std::vector<std::string>>();
    auto lenient = rec.value.at("lenient").get<std::vector<std::string>>();
    std::sort(strict.begin(), strict.end());
    std::sort(lenient.begin(), lenient.end());
    CHECK(names(parse_tagged(raw, Strictness::kStrict)) == strict);
    CHECK(names(parse_tagged(raw, Strictness::kLenient)) == lenient);
  }
}

TEST_CASE("strict validity implies lenient validity on random tag soup") {
  const std::vector<std::string> pieces = {"<answer>", "</answer>", "<reason>", "</reason>",
                                           "Yes",      "No",        " ",        "x",
                                           "YES",      "<",         "\n"};
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    for (int k = 0; k < 8; ++k) s += pieces[pick(rng)];
    const auto strict = parse_tagged(s, Strictness::kStrict);
    const auto lenient = parse_tagged(s, Strictness::kLenient);
    if (strict.format_valid) CHECK(lenient.format_valid);
    // Lenient violations are a subset of strict ones.
    const auto sv = names(strict);
    for (const auto& v : names(lenient)) {
      CHECK(std::find(sv.begin(), sv.end(), v) != sv.end());
    }
  }
}

TEST_CASE("answer token position") {
  CHECK(extract_answer_token_position("<answer>Yes</answer>",
                                      spans({"<answer>", "Yes", "</answer>"})) == 1);
  CHECK(extract_answer_token_position("<answer> Yes</answer>",
                                      spans({"<ans", "wer>", " Yes", "</answer>"})) == 2);
  FG_CHECK_THROWS_CODE(extract_answer_token_position("Yes", spans({"Yes"})),
                       ErrorCode::kNoAnswerTag);
  FG_CHECK_THROWS_CODE(extract_answer_token_position("<answer>Yes</answer>", spans({"<answer>"})),
                       ErrorCode::kInvalidArgument);
}

TEST_CASE("token spans tile the text") {
  const auto s = spans({"ab", "", "cde"});
  REQUIRE(s.size() == 3);
  CHECK(s[0].begin == 0);
  CHECK(s[0].end == 2);
  CHECK(s[1].begin == 2);
  CHECK(s[1].end == 2);
  CHECK(s[2].end == 5);
}

}  // namespace
}  // namespace fg
