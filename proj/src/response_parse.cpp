// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/response_parse.hpp"

#include <algorithm>
#include <cctype>

#include "fg/error.hpp"
#include "fg/text.hpp"

namespace fg {
namespace {

constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";
constexpr std::string_view kReasonOpen = "<reason>";
constexpr std::string_view kReasonClose = "</reason>";

std::vector<std::size_t> find_all(std::string_view text, std::string_view needle) {
  std::vector<std::size_t> hits;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    hits.push_back(pos);
  }
  return hits;
}

enum class PairState { kAbsent, kDuplicate, kMalformed, kOk };

struct TagPair {
  PairState state = PairState::kAbsent;
  // [outer_begin, outer_end) covers the markers, [inner_begin, inner_end)
  // only the content.
  std::size_t outer_begin = 0;
  std::size_t inner_begin = 0;
  std::size_t inner_end = 0;
  std::size_t outer_end = 0;
};

TagPair scan_pair(std::string_view text, std::string_view open,
                  std::string_view close) {
  const auto opens = find_all(text, open);
  const auto closes = find_all(text, close);
  TagPair pair;
  if (opens.empty() && closes.empty()) {
    pair.state = PairState::kAbsent;
  } else if (opens.size() > 1 || closes.size() > 1) {
    pair.state = PairState::kDuplicate;
  } else if (opens.size() != 1 || closes.size() != 1 ||
             closes[0] < opens[0] + open.size()) {
    pair.state = PairState::kMalformed;
  } else {
    pair.state = PairState::kOk;
    pair.outer_begin = opens[0];
    pair.inner_begin = opens[0] + open.size();
    pair.inner_end = closes[0];
    pair.outer_end = closes[0] + close.size();
  }
  return pair;
}

bool contains(const TagPair& outer, const TagPair& inner) {
  return outer.inner_begin <= inner.outer_begin && inner.outer_end <= outer.inner_end;
}

bool overlaps(const TagPair& a, const TagPair& b) {
  return a.outer_begin < b.outer_end && b.outer_begin < a.outer_end;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Standalone occurrence of `form` fully inside [begin, end) of `text`.
bool has_standalone(std::string_view text, std::size_t begin, std::size_t end,
                    std::string_view form) {
  if (form.empty() || end <= begin) return false;
  for (std::size_t pos = text.find(form, begin);
       pos != std::string_view::npos && pos + form.size() <= end;
       pos = text.find(form, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const std::size_t after = pos + form.size();
    const bool right_ok = after >= text.size() || !is_word_char(text[after]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

bool has_stray_token(std::string_view text, const TagPair& answer,
                     const AnswerVocabulary& vocab) {
  auto scan = [&](std::size_t begin, std::size_t end) {
    for (const auto& f : vocab.stray_yes) {
      if (has_standalone(text, begin, end, f)) return true;
    }
    for (const auto& f : vocab.stray_no) {
      if (has_standalone(text, begin, end, f)) return true;
    }
    return false;
  };
  return scan(0, answer.outer_begin) || scan(answer.outer_end, text.size());
}

std::optional<Answer> match_answer(std::string_view content, const AnswerVocabulary& vocab) {
  const auto trimmed = trim(content);
  if (std::find(vocab.yes_forms.begin(), vocab.yes_forms.end(), trimmed) !=
      vocab.yes_forms.end()) {
    return Answer::kYes;
  }
  if (std::find(vocab.no_forms.begin(), vocab.no_forms.end(), trimmed) !=
      vocab.no_forms.end()) {
    return Answer::kNo;
  }
  return std::nullopt;
}

}  // namespace

std::string_view violation_name(Violation v) {
  switch (v) {
    case Violation::kMissingAnswerTag: return "MissingAnswerTag";
    case Violation::kMissingReasonTag: return "MissingReasonTag";
    case Violation::kDuplicateTag: return "DuplicateTag";
    case Violation::kAnswerNotYesNo: return "AnswerNotYesNo";
    case Violation::kEmptyReason: return "EmptyReason";
    case Violation::kAnswerTokenOutsideAnswerTag: return "AnswerTokenOutsideAnswerTag";
  }
  return "";
}

std::string_view strictness_name(Strictness s) {
  return s == Strictness::kStrict ? "strict" : "lenient";
}

std::optional<Strictness> parse_strictness(std::string_view name) {
  if (name == "strict") return Strictness::kStrict;
  if (name == "lenient") return Strictness::kLenient;
  return std::nullopt;
}

bool TaggedResponse::has(Violation v) const {
  return std::find(violations.begin(), violations.end(), v) != violations.end();
}

TaggedResponse parse_tagged(std::string_view raw, Strictness strictness,
                            const AnswerVocabulary& vocab) {
  TaggedResponse out;
  out.raw_text = std::string(raw);

  TagPair answer = scan_pair(raw, kAnswerOpen, kAnswerClose);
  TagPair reason = scan_pair(raw, kReasonOpen, kReasonClose);

  if (answer.state == PairState::kOk && reason.state == PairState::kOk &&
      overlaps(answer, reason)) {
    if (contains(reason, answer)) {
      answer.state = PairState::kMalformed;
    } else if (contains(answer, reason)) {
      reason.state = PairState::kMalformed;
    } else {
      answer.state = PairState::kMalformed;
      reason.state = PairState::kMalformed;
    }
  }

  std::vector<Violation> found;
  auto structural = [&found](PairState state, Violation missing) {
    if (state == PairState::kDuplicate) {
      found.push_back(Violation::kDuplicateTag);
    } else if (state != PairState::kOk) {
      found.push_back(missing);
    }
  };
  structural(answer.state, Violation::kMissingAnswerTag);
  structural(reason.state, Violation::kMissingReasonTag);

  if (answer.state == PairState::kOk) {
    out.answer = match_answer(
        raw.substr(answer.inner_begin, answer.inner_end - answer.inner_begin), vocab);
    if (!out.answer) found.push_back(Violation::kAnswerNotYesNo);
    if (strictness == Strictness::kStrict && has_stray_token(raw, answer, vocab)) {
      found.push_back(Violation::kAnswerTokenOutsideAnswerTag);
    }
  }
  if (reason.state == PairState::kOk) {
    out.reason = std::string(
        trim(raw.substr(reason.inner_begin, reason.inner_end - reason.inner_begin)));
    if (out.reason->empty()) found.push_back(Violation::kEmptyReason);
  }

  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  out.violations = std::move(found);
  out.format_valid = out.violations.empty() && out.answer.has_value() &&
                     out.reason.has_value() && !out.reason->empty();
  return out;
}

std::string render_tagged(Answer answer, std::string_view reason) {
  std::string out;
  out.append(kAnswerOpen).append(answer_name(answer)).append(kAnswerClose);
  out.append(kReasonOpen).append(reason).append(kReasonClose);
  return out;
}

std::vector<TokenSpan> token_spans(std::span<const std::string> tokens) {
  std::vector<TokenSpan> spans;
  spans.reserve(tokens.size());
  std::size_t offset = 0;
  for (const auto& t : tokens) {
    spans.push_back({t, offset, offset + t.size()});
    offset += t.size();
  }
  return spans;
}

std::size_t extract_answer_token_position(std::string_view raw,
                                          std::span<const TokenSpan> tokens) {
  std::size_t expected = 0;
  for (const auto& t : tokens) {
    if (t.begin != expected || t.end < t.begin || t.end > raw.size() ||
        raw.substr(t.begin, t.end - t.begin) != t.token) {
      throw Error(ErrorCode::kInvalidArgument, "token spans do not tile the response text");
    }
    expected = t.end;
  }
  if (expected != raw.size()) {
    throw Error(ErrorCode::kInvalidArgument, "token spans do not cover the response text");
  }

  const std::size_t open = raw.find(kAnswerOpen);
  if (open == std::string_view::npos) {
    throw Error(ErrorCode::kNoAnswerTag, "response has no <answer> tag");
  }
  const std::size_t content_begin = open + kAnswerOpen.size();
  const std::size_t content_end = raw.find(kAnswerClose, content_begin);
  if (content_end == std::string_view::npos) {
    throw Error(ErrorCode::kNoAnswerTag, "response has an unterminated <answer> tag");
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.begin >= content_begin && t.end <= content_end && !trim(t.token).empty()) {
      return i;
    }
  }
  throw Error(ErrorCode::kNoAnswerTag, "no token lies inside the <answer> tag");
}

}  // namespace fg
