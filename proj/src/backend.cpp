// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/backend.hpp"

#include <cmath>

#include "fg/error.hpp"
#include "httplib.h"

namespace fg {
namespace {

double logprob_field(const Json& j, std::string_view where) {
  const double lp = require_number(j, "logprob", where);
  if (std::isnan(lp) || lp > 0.0) {
    throw Error(ErrorCode::kSchemaError, std::string(where) + ": logprob must be <= 0");
  }
  return lp;
}

}  // namespace

Json backend_response_to_json(const BackendResponse& r) {
  Json j;
  j["raw_text"] = r.raw_text;
  j["per_token"] = Json::array();
  for (const auto& t : r.per_token) {
    Json tj;
    tj["token"] = t.token;
    tj["logprob"] = t.logprob;
    tj["top_k"] = Json::array();
    for (const auto& a : t.top_k) {
      Json aj;
      aj["token"] = a.token;
      aj["logprob"] = a.logprob;
      tj["top_k"].push_back(std::move(aj));
    }
    j["per_token"].push_back(std::move(tj));
  }
  return j;
}

BackendResponse backend_response_from_json(const Json& j, std::string_view where) {
  BackendResponse r;
  r.raw_text = require_string(j, "raw_text", where);
  const auto it = j.find("per_token");
  if (it == j.end() || it->is_null()) return r;
  if (!it->is_array()) {
    throw Error(ErrorCode::kSchemaError, std::string(where) + ": per_token must be a list");
  }
  for (const auto& tj : *it) {
    TokenLogprob t;
    t.token = require_string(tj, "token", where);
    t.logprob = logprob_field(tj, where);
    if (const auto k = tj.find("top_k"); k != tj.end() && !k->is_null()) {
      if (!k->is_array()) {
        throw Error(ErrorCode::kSchemaError, std::string(where) + ": top_k must be a list");
      }
      for (const auto& aj : *k) {
        t.top_k.push_back({require_string(aj, "token", where), logprob_field(aj, where)});
      }
    }
    r.per_token.push_back(std::move(t));
  }
  return r;
}

MockBackend::MockBackend(const std::filesystem::path& fixture_dir)
    : id_("mock:" + fixture_dir.filename().string()) {
  const auto file = fixture_dir / "backend.jsonl";
  if (!std::filesystem::exists(file)) {
    throw Error(ErrorCode::kFixtureMissing, "no backend.jsonl in " + fixture_dir.string());
  }
  for (const auto& rec : read_jsonl(file)) {
    const std::string where = "backend.jsonl:" + std::to_string(rec.line);
    const std::string qid = require_string(rec.value, "question_id", where);
    Entry e;
    if (const auto err = rec.value.find("error"); err != rec.value.end()) {
      e.error = err->is_string() ? err->get<std::string>() : "injected failure";
    } else {
      e.response = backend_response_from_json(rec.value, where);
    }
    if (!entries_.emplace(qid, std::move(e)).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate question_id " + qid);
    }
  }
}

const MockBackend::Entry* MockBackend::find(const std::string& question_id) const {
  if (const auto it = entries_.find(question_id); it != entries_.end()) return &it->second;
  if (const auto it = entries_.find("*"); it != entries_.end()) return &it->second;
  return nullptr;
}

BackendResponse MockBackend::answer(const BackendRequest& request) {
  const Entry* e = find(request.question_id);
  if (e == nullptr) {
    throw Error(ErrorCode::kBackendError, "no fixture for question " + request.question_id);
  }
  if (!e->response) {
    throw Error(ErrorCode::kBackendError, request.question_id + ": " + e->error);
  }
  BackendResponse r = *e->response;
  if (!request.want_logprobs) {
    r.per_token.clear();
  } else {
    for (auto& t : r.per_token) {
      if (t.top_k.size() > static_cast<std::size_t>(std::max(request.top_k, 0))) {
        t.top_k.resize(static_cast<std::size_t>(std::max(request.top_k, 0)));
      }
    }
  }
  return r;
}

HttpBackendClient::HttpBackendClient(std::string base_url, std::string path,
                                     std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), path_(std::move(path)), timeout_(timeout) {}

BackendResponse HttpBackendClient::answer(const BackendRequest& request) {
  Json body;
  body["question_id"] = request.question_id;
  body["media_ref"] = request.media_ref;
  body["question_text"] = request.question_text;
  body["system_template_id"] = request.system_template_id;
  body["want_logprobs"] = request.want_logprobs;
  body["top_k"] = request.top_k;

  httplib::Client cli(base_url_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  auto res = cli.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kBackendError,
                "request to " + base_url_ + path_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kBackendError,
                base_url_ + path_ + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return backend_response_from_json(Json::parse(res->body), "backend response");
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kBackendError, std::string("malformed backend body: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kBackendError, e.detail());
  }
}

std::unique_ptr<BackendClient> make_backend(const std::string& spec) {
  if (spec.rfind("mock:", 0) == 0) return std::make_unique<MockBackend>(spec.substr(5));
  if (spec.rfind("http://", 0) == 0) return std::make_unique<HttpBackendClient>(spec);
  throw Error(ErrorCode::kInvalidArgument, "backend must be mock:<dir> or an http:// URL");
}

}  // namespace fg
