// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_LLM_CLIENT_HPP_
#define FG_LLM_CLIENT_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fg {

struct LlmRequest {
  std::string template_id;
  std::string rendered_prompt;
  int max_tokens = 1024;
  double temperature = 0.0;
};

struct LlmResponse {
  std::string text;
};

// Implementations must be safe to call from several threads at once.
// Transport failures are reported as Error(ClientError).
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual LlmResponse complete(const LlmRequest& request) = 0;
  virtual std::string id() const = 0;
};

// Replays canned responses from `<dir>/llm.jsonl`, keyed by the fingerprint
// of the rendered prompt:
//   {"schema_version":1,"prompt_hash":"...","text":"...","fail_attempts":0}
// `fail_attempts` makes the first N calls for that key fail, for exercising
// retries. With a miss log configured, unknown prompts are appended there
// (hash, template id, rendered prompt) before the call fails.
class MockLlmClient : public LlmClient {
 public:
  explicit MockLlmClient(const std::filesystem::path& fixture_dir,
                         std::optional<std::filesystem::path> miss_log = std::nullopt);

  LlmResponse complete(const LlmRequest& request) override;
  std::string id() const override { return "mock:" + dir_.string(); }

 private:
  struct Entry {
    std::string text;
    int fail_attempts = 0;
  };

  std::filesystem::path dir_;
  std::optional<std::filesystem::path> miss_log_;
  std::map<std::string, Entry> entries_;
  std::mutex mu_;
  std::map<std::string, int> calls_;
};

// POSTs {template_id, rendered_prompt, max_tokens, temperature} as JSON and
// expects {"text": ...} back.
class HttpLlmClient : public LlmClient {
 public:
  HttpLlmClient(std::string base_url, std::string path = "/v1/complete",
                std::chrono::milliseconds timeout = std::chrono::seconds(60));

  LlmResponse complete(const LlmRequest& request) override;
  std::string id() const override { return base_url_ + path_; }

 private:
  std::string base_url_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  double multiplier = 2.0;

  // Delay before attempt `attempt` (2-based; attempt 1 has none).
  std::chrono::milliseconds backoff_before(int attempt) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Real sleep; mock runs pass a no-op so they stay deterministic.
Sleeper thread_sleeper();
Sleeper no_sleep();

struct LlmExchange {
  std::string request_template_id;
  std::string rendered_prompt;
  std::string raw_response;
  double latency_ms = 0.0;
  int attempt = 1;
};

// Client + retry policy + exchange log, shareable across workers.
class LlmCaller {
 public:
  LlmCaller(LlmClient& client, RetryPolicy retry, Sleeper sleeper);

  // Returns the response text; throws ClientError after the last attempt.
  std::string call(const LlmRequest& request);

  std::vector<LlmExchange> exchanges() const;
  const RetryPolicy& retry() const { return retry_; }

 private:
  LlmClient& client_;
  RetryPolicy retry_;
  Sleeper sleeper_;
  mutable std::mutex mu_;
  std::vector<LlmExchange> exchanges_;
};

}  // namespace fg

#endif  // FG_LLM_CLIENT_HPP_
