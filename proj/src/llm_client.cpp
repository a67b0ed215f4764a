// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/llm_client.hpp"

#include <cmath>
#include <fstream>
#include <thread>

#include "fg/error.hpp"
#include "fg/jsonl.hpp"
#include "fg/text.hpp"
#include "httplib.h"

namespace fg {

MockLlmClient::MockLlmClient(const std::filesystem::path& fixture_dir,
                             std::optional<std::filesystem::path> miss_log)
    : dir_(fixture_dir), miss_log_(std::move(miss_log)) {
  const auto file = fixture_dir / "llm.jsonl";
  if (!std::filesystem::exists(file)) {
    throw Error(ErrorCode::kFixtureMissing, "no llm.jsonl in " + fixture_dir.string());
  }
  for (const auto& rec : read_jsonl(file)) {
    const std::string where = "llm.jsonl:" + std::to_string(rec.line);
    Entry e;
    e.text = require_string(rec.value, "text", where);
    e.fail_attempts = rec.value.value("fail_attempts", 0);
    entries_[require_string(rec.value, "prompt_hash", where)] = std::move(e);
  }
}

LlmResponse MockLlmClient::complete(const LlmRequest& request) {
  const std::string key = fingerprint(request.rendered_prompt);
  const auto it = entries_.find(key);
  std::lock_guard lock(mu_);
  if (it == entries_.end()) {
    if (miss_log_) {
      std::ofstream out(*miss_log_, std::ios::app);
      Json j;
      j["schema_version"] = kSchemaVersion;
      j["prompt_hash"] = key;
      j["template_id"] = request.template_id;
      j["rendered_prompt"] = request.rendered_prompt;
      out << dump_line(j) << '\n';
    }
    throw Error(ErrorCode::kClientError, "no canned response for prompt " + key + " (" +
                                             request.template_id + ")");
  }
  const int call = ++calls_[key];
  if (call <= it->second.fail_attempts) {
    throw Error(ErrorCode::kClientError, "injected transient failure for prompt " + key);
  }
  return {it->second.text};
}

HttpLlmClient::HttpLlmClient(std::string base_url, std::string path,
                             std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), path_(std::move(path)), timeout_(timeout) {}

LlmResponse HttpLlmClient::complete(const LlmRequest& request) {
  Json body;
  body["template_id"] = request.template_id;
  body["rendered_prompt"] = request.rendered_prompt;
  body["max_tokens"] = request.max_tokens;
  body["temperature"] = request.temperature;

  httplib::Client cli(base_url_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  auto res = cli.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kClientError,
                "request to " + base_url_ + path_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kClientError,
                base_url_ + path_ + " returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto j = Json::parse(res->body);
    return {j.at("text").get<std::string>()};
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kClientError, std::string("malformed completion body: ") + e.what());
  }
}

std::chrono::milliseconds RetryPolicy::backoff_before(int attempt) const {
  if (attempt <= 1) return std::chrono::milliseconds(0);
  const double scale = std::pow(multiplier, attempt - 2);
  return std::chrono::milliseconds(
      static_cast<long long>(static_cast<double>(initial_backoff.count()) * scale));
}

Sleeper thread_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

Sleeper no_sleep() {
  return [](std::chrono::milliseconds) {};
}

LlmCaller::LlmCaller(LlmClient& client, RetryPolicy retry, Sleeper sleeper)
    : client_(client), retry_(retry), sleeper_(std::move(sleeper)) {
  if (retry_.max_attempts < 1) {
    throw Error(ErrorCode::kInvalidArgument, "retry policy needs at least one attempt");
  }
}

std::string LlmCaller::call(const LlmRequest& request) {
  for (int attempt = 1;; ++attempt) {
    sleeper_(retry_.backoff_before(attempt));
    const auto start = std::chrono::steady_clock::now();
    try {
      LlmResponse response = client_.complete(request);
      const std::chrono::duration<double, std::milli> took =
          std::chrono::steady_clock::now() - start;
      std::lock_guard lock(mu_);
      exchanges_.push_back({request.template_id, request.rendered_prompt, response.text,
                            took.count(), attempt});
      return std::move(response.text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kClientError || attempt >= retry_.max_attempts) {
        throw Error(e.code(), e.detail() + " (after " + std::to_string(attempt) + " attempt" +
                                  (attempt == 1 ? "" : "s") + ")");
      }
    }
  }
}

std::vector<LlmExchange> LlmCaller::exchanges() const {
  std::lock_guard lock(mu_);
  return exchanges_;
}

}  // namespace fg
