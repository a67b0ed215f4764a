// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_BACKEND_HPP_
#define FG_BACKEND_HPP_

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fg/jsonl.hpp"

namespace fg {

struct TokenAlternative {
  std::string token;
  double logprob = 0.0;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
  std::vector<TokenAlternative> top_k;
};

struct BackendRequest {
  std::string question_id;
  std::string media_ref;
  std::string question_text;
  std::string system_template_id;
  bool want_logprobs = true;
  int top_k = 20;
};

struct BackendResponse {
  std::string raw_text;
  // Empty when the backend cannot report logprobs.
  std::vector<TokenLogprob> per_token;
};

Json backend_response_to_json(const BackendResponse& r);
// Throws SchemaError naming `where`.
BackendResponse backend_response_from_json(const Json& j, std::string_view where);

// Answering model behind the evaluation. Implementations must be safe to
// call concurrently. Failures are reported as Error(BackendError).
class BackendClient {
 public:
  virtual ~BackendClient() = default;
  virtual BackendResponse answer(const BackendRequest& request) = 0;
  virtual std::string id() const = 0;
};

// Replays `<dir>/backend.jsonl`, one line per question:
//   {"schema_version":1,"question_id":"...","raw_text":"...","per_token":[...]}
// A line with "question_id":"*" is the fallback for unknown ids; without one,
// unknown ids fail. A line carrying "error" instead of a response fails every
// call for that id.
class MockBackend : public BackendClient {
 public:
  explicit MockBackend(const std::filesystem::path& fixture_dir);

  BackendResponse answer(const BackendRequest& request) override;
  std::string id() const override { return id_; }

 private:
  struct Entry {
    std::optional<BackendResponse> response;
    std::string error;
  };

  const Entry* find(const std::string& question_id) const;

  std::string id_;
  std::map<std::string, Entry> entries_;
};

// POSTs the request as JSON to `<base_url><path>` and expects a
// BackendResponse object back.
class HttpBackendClient : public BackendClient {
 public:
  HttpBackendClient(std::string base_url, std::string path = "/v1/answer",
                    std::chrono::milliseconds timeout = std::chrono::seconds(120));

  BackendResponse answer(const BackendRequest& request) override;
  std::string id() const override { return base_url_ + path_; }

 private:
  std::string base_url_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

// `mock:<dir>` or an http:// base URL.
std::unique_ptr<BackendClient> make_backend(const std::string& spec);

}  // namespace fg

#endif  // FG_BACKEND_HPP_
