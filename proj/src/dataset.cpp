// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/dataset.hpp"

#include <set>

#include "fg/error.hpp"
#include "fg/jsonl.hpp"
#include "fg/qgen.hpp"
#include "fg/text.hpp"

namespace fg {

const VideoRecord& Dataset::video(const std::string& video_id) const {
  for (const auto& v : videos) {
    if (v.video_id == video_id) return v;
  }
  throw Error(ErrorCode::kDanglingReference, "unknown video " + video_id);
}

Dataset ingest(const std::filesystem::path& dir) {
  Dataset ds;
  std::set<std::string> video_ids;
  for (const auto& rec : read_jsonl(dir / "videos.jsonl")) {
    const std::string where = "videos.jsonl:" + std::to_string(rec.line);
    VideoRecord v;
    v.video_id = require_string(rec.value, "video_id", where);
    v.prompt_id = require_string(rec.value, "prompt_id", where);
    v.generator_name = require_string(rec.value, "generator_name", where);
    v.media_ref = require_string(rec.value, "media_ref", where);
    if (v.video_id.empty() || trim(v.media_ref).empty()) {
      throw Error(ErrorCode::kSchemaError, where + ": video_id and media_ref must be non-empty");
    }
    if (!video_ids.insert(v.video_id).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate video_id " + v.video_id);
    }
    ds.videos.push_back(std::move(v));
  }

  std::map<std::string, std::size_t> question_ids;
  for (const auto& rec : read_jsonl(dir / "questions.jsonl")) {
    const std::string where = "questions.jsonl:" + std::to_string(rec.line);
    EntityQuestion q = question_from_json(rec.value, where);
    if (!video_ids.contains(q.video_id)) {
      throw Error(ErrorCode::kDanglingReference,
                  where + ": question " + q.question_id + " references unknown video_id " +
                      q.video_id);
    }
    if (!question_ids.emplace(q.question_id, ds.questions.size()).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate question_id " + q.question_id);
    }
    ds.questions.push_back(std::move(q));
  }

  const auto annotations = dir / "annotations.jsonl";
  if (!std::filesystem::exists(annotations)) return ds;
  std::set<std::string> annotated;
  for (const auto& rec : read_jsonl(annotations)) {
    const std::string where = "annotations.jsonl:" + std::to_string(rec.line);
    GroundTruth t;
    t.question_id = require_string(rec.value, "question_id", where);
    const std::string answer = require_string(rec.value, "answer", where);
    const auto a = parse_answer(answer);
    if (!a) throw Error(ErrorCode::kSchemaError, where + ": answer must be Yes or No");
    t.answer = *a;
    if (const auto r = rec.value.find("reason"); r != rec.value.end() && r->is_string()) {
      t.reason = r->get<std::string>();
    }
    if (!question_ids.contains(t.question_id)) {
      throw Error(ErrorCode::kDanglingReference,
                  where + ": annotation references unknown question_id " + t.question_id);
    }
    if (!annotated.insert(t.question_id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  where + ": duplicate annotation for question_id " + t.question_id);
    }
    ds.truths.push_back(std::move(t));
  }
  return ds;
}

Json video_to_json(const VideoRecord& v) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["video_id"] = v.video_id;
  j["prompt_id"] = v.prompt_id;
  j["generator_name"] = v.generator_name;
  j["media_ref"] = v.media_ref;
  return j;
}

Json truth_to_json(const GroundTruth& t) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["question_id"] = t.question_id;
  j["answer"] = std::string(answer_name(t.answer));
  if (t.reason) j["reason"] = *t.reason;
  return j;
}

}  // namespace fg
