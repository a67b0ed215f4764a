// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_RESPONSE_PARSE_HPP_
#define FG_RESPONSE_PARSE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fg/types.hpp"

namespace fg {

// Each code corresponds to exactly one check in parse_tagged.
enum class Violation {
  kMissingAnswerTag,
  kMissingReasonTag,
  kDuplicateTag,
  kAnswerNotYesNo,
  kEmptyReason,
  kAnswerTokenOutsideAnswerTag,
};

std::string_view violation_name(Violation v);

enum class Strictness { kStrict, kLenient };

std::string_view strictness_name(Strictness s);
std::optional<Strictness> parse_strictness(std::string_view name);

// Surface forms accepted as the content of the answer tag, and the forms
// that count as a stray answer token when they appear standalone outside it.
// Stray matching is case-sensitive, so prose such as "there is no blur" is
// not penalised by the default configuration.
struct AnswerVocabulary {
  std::vector<std::string> yes_forms = {"Yes", "yes", "YES"};
  std::vector<std::string> no_forms = {"No", "no", "NO"};
  std::vector<std::string> stray_yes = {"Yes", "YES"};
  std::vector<std::string> stray_no = {"No", "NO"};
};

struct TaggedResponse {
  std::string raw_text;
  std::optional<Answer> answer;
  // Trimmed content of the reason tag when the tag itself is well formed.
  std::optional<std::string> reason;
  bool format_valid = false;
  // Sorted, without duplicates.
  std::vector<Violation> violations;

  bool has(Violation v) const;
};

// Total: never throws on malformed input.
//
// Rule table, evaluated per tag name (answer, reason):
//   no open and no close marker           -> Missing<Tag>Tag
//   more than one open or close marker    -> DuplicateTag
//   unmatched, or close before open       -> Missing<Tag>Tag
//   pair nested inside the other's pair   -> Missing<Tag>Tag (inner one)
//   pairs interleaved                     -> both Missing<Tag>Tag
// then, for a well-formed answer pair, trimmed content outside the
// vocabulary -> AnswerNotYesNo; for a well-formed reason pair, blank content
// -> EmptyReason; in strict mode with a well-formed answer pair, a standalone
// stray token anywhere outside the answer pair -> AnswerTokenOutsideAnswerTag.
TaggedResponse parse_tagged(std::string_view raw, Strictness strictness,
                            const AnswerVocabulary& vocab = {});

std::string render_tagged(Answer answer, std::string_view reason);

struct TokenSpan {
  std::string token;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Spans for tokens that concatenate to the generated text.
std::vector<TokenSpan> token_spans(std::span<const std::string> tokens);

// Index of the first non-blank token lying entirely inside the content of
// the first answer tag. Throws NoAnswerTag when there is no answer tag or no
// such token, InvalidArgument when the spans do not tile `raw`.
std::size_t extract_answer_token_position(std::string_view raw,
                                          std::span<const TokenSpan> tokens);

}  // namespace fg

#endif  // FG_RESPONSE_PARSE_HPP_
