// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_DATASET_HPP_
#define FG_DATASET_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fg/jsonl.hpp"
#include "fg/question.hpp"
#include "fg/scoring.hpp"

namespace fg {

struct VideoRecord {
  std::string video_id;
  std::string prompt_id;
  std::string generator_name;
  // Passed through to the backend untouched.
  std::string media_ref;
};

struct Dataset {
  std::vector<VideoRecord> videos;
  std::vector<EntityQuestion> questions;
  // Empty when the directory has no annotations.jsonl.
  std::vector<GroundTruth> truths;

  const VideoRecord& video(const std::string& video_id) const;
};

// Reads videos.jsonl, questions.jsonl and the optional annotations.jsonl.
// Question ids are unique across the whole dataset. Throws SchemaError,
// DuplicateId or DanglingReference, each naming the file and line.
Dataset ingest(const std::filesystem::path& dir);

Json video_to_json(const VideoRecord& v);
Json truth_to_json(const GroundTruth& t);

}  // namespace fg

#endif  // FG_DATASET_HPP_
