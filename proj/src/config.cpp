// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/config.hpp"

#include <set>
#include <string>
#include <type_traits>

#include "fg/error.hpp"

namespace fg {
namespace {

Json parse_file(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

void require_version(const Json& j, std::string_view what) {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, std::string(what) + ": expected an object");
  const auto v = j.find("schema_version");
  if (v == j.end() || !v->is_number_integer() || v->get<int>() != kSchemaVersion) {
    throw Error(ErrorCode::kSchemaError, std::string(what) + ": schema_version must be " +
                                             std::to_string(kSchemaVersion));
  }
}

void reject_unknown(const Json& j, const std::set<std::string>& known, std::string_view what) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw Error(ErrorCode::kSchemaError, std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

std::vector<std::string> strings(const Json& j, const char* key, std::string_view what) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_array()) {
    throw Error(ErrorCode::kSchemaError,
                std::string(what) + ": '" + key + "' must be a list of strings");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw Error(ErrorCode::kSchemaError,
                  std::string(what) + ": '" + key + "' must be a list of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

template <typename T>
void read_field(const Json& j, const char* key, T& out, std::string_view what) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) {
      throw Error(ErrorCode::kSchemaError, std::string(what) + ": '" + key + "' must be a number");
    }
  } else {
    if (!it->is_number_unsigned()) {
      throw Error(ErrorCode::kSchemaError,
                  std::string(what) + ": '" + key + "' must be a non-negative integer");
    }
  }
  out = it->get<T>();
}

}  // namespace

DimensionWeights weights_from_json(const Json& j) {
  require_version(j, "weights");
  reject_unknown(j, {"schema_version", "weights"}, "weights");
  const auto it = j.find("weights");
  if (it == j.end() || !it->is_object()) {
    throw Error(ErrorCode::kSchemaError, "weights: 'weights' must be an object");
  }
  DimensionWeights w;
  for (const Dimension d : kAllDimensions) w[d] = 0.0;
  for (const auto& [key, value] : it->items()) {
    const auto d = parse_dimension(key);
    if (!d) throw Error(ErrorCode::kSchemaError, "weights: unknown dimension '" + key + "'");
    if (!value.is_number()) {
      throw Error(ErrorCode::kSchemaError, "weights: '" + key + "' must be a number");
    }
    w[*d] = value.get<double>();
  }
  validate_weights(w);
  return w;
}

DimensionWeights load_weights(const std::filesystem::path& path) {
  return weights_from_json(parse_file(path));
}

Json weights_to_json(const DimensionWeights& weights) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  Json w = Json::object();
  for (const auto& [d, v] : weights) w[std::string(dimension_name(d))] = v;
  j["weights"] = std::move(w);
  return j;
}

TokenSets token_sets_from_json(const Json& j) {
  require_version(j, "token_sets");
  reject_unknown(j, {"schema_version", "yes", "no"}, "token_sets");
  TokenSets sets{strings(j, "yes", "token_sets"), strings(j, "no", "token_sets")};
  sets.validate();
  return sets;
}

TokenSets load_token_sets(const std::filesystem::path& path) {
  return token_sets_from_json(parse_file(path));
}

Json token_sets_to_json(const TokenSets& sets) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["yes"] = sets.yes_tokens;
  j["no"] = sets.no_tokens;
  return j;
}

GrpoFile grpo_file_from_json(const Json& j) {
  require_version(j, "grpo");
  reject_unknown(j,
                 {"schema_version", "group_size", "clip_epsilon", "kl_beta", "inner_iterations",
                  "learning_rate", "seed", "toy"},
                 "grpo");
  GrpoFile f;
  read_field(j, "group_size", f.grpo.group_size, "grpo");
  read_field(j, "clip_epsilon", f.grpo.clip_epsilon, "grpo");
  read_field(j, "kl_beta", f.grpo.kl_beta, "grpo");
  read_field(j, "inner_iterations", f.grpo.inner_iterations, "grpo");
  read_field(j, "learning_rate", f.grpo.learning_rate, "grpo");
  read_field(j, "seed", f.grpo.seed, "grpo");
  if (const auto t = j.find("toy"); t != j.end()) {
    if (!t->is_object()) throw Error(ErrorCode::kSchemaError, "grpo.toy: expected an object");
    reject_unknown(*t,
                   {"steps", "binary_features", "questions_per_step", "sft_steps",
                    "sft_batch", "sft_learning_rate"},
                   "grpo.toy");
    read_field(*t, "steps", f.toy.steps, "grpo.toy");
    read_field(*t, "binary_features", f.toy.binary_features, "grpo.toy");
    read_field(*t, "questions_per_step", f.toy.options.questions_per_step, "grpo.toy");
    read_field(*t, "sft_steps", f.toy.options.sft_steps, "grpo.toy");
    read_field(*t, "sft_batch", f.toy.options.sft_batch, "grpo.toy");
    read_field(*t, "sft_learning_rate", f.toy.options.sft_learning_rate, "grpo.toy");
  }
  try {
    f.grpo.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaError, "grpo: " + e.detail());
  }
  return f;
}

GrpoFile load_grpo_file(const std::filesystem::path& path) {
  return grpo_file_from_json(parse_file(path));
}

Json grpo_file_to_json(const GrpoFile& file) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["group_size"] = file.grpo.group_size;
  j["clip_epsilon"] = file.grpo.clip_epsilon;
  j["kl_beta"] = file.grpo.kl_beta;
  j["inner_iterations"] = file.grpo.inner_iterations;
  j["learning_rate"] = file.grpo.learning_rate;
  j["seed"] = file.grpo.seed;
  Json t;
  t["steps"] = file.toy.steps;
  t["binary_features"] = file.toy.binary_features;
  t["questions_per_step"] = file.toy.options.questions_per_step;
  t["sft_steps"] = file.toy.options.sft_steps;
  t["sft_batch"] = file.toy.options.sft_batch;
  t["sft_learning_rate"] = file.toy.options.sft_learning_rate;
  j["toy"] = std::move(t);
  return j;
}

}  // namespace fg
