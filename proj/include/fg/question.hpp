// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_QUESTION_HPP_
#define FG_QUESTION_HPP_

#include <string>
#include <vector>

#include "fg/types.hpp"

namespace fg {

struct UserPrompt {
  std::string prompt_id;
  std::string text;
};

struct Entity {
  std::string name;
  std::vector<std::string> attributes;
  std::vector<std::string> actions;
  std::string source_prompt;
  // Set when the name does not occur verbatim (case-insensitively) in the
  // source prompt text.
  bool inferred = false;
};

// One yes/no question about one entity under one dimension.
struct EntityQuestion {
  std::string question_id;
  std::string video_id;
  Dimension dimension = Dimension::kVisualQuality;
  std::string entity;
  std::string text;
  Polarity polarity = Polarity::kPositive;
  bool polarity_defaulted = false;
};

}  // namespace fg

#endif  // FG_QUESTION_HPP_
