// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_CONFIG_HPP_
#define FG_CONFIG_HPP_

#include <cstddef>
#include <filesystem>

#include "fg/grpo.hpp"
#include "fg/jsonl.hpp"
#include "fg/scoring.hpp"
#include "fg/toy_policy.hpp"

namespace fg {

// {"schema_version":1,"weights":{"visual_quality":0.2,...}}
// Dimensions left out get weight 0. Throws SchemaError or WeightSumInvalid.
DimensionWeights weights_from_json(const Json& j);
DimensionWeights load_weights(const std::filesystem::path& path);
Json weights_to_json(const DimensionWeights& weights);

// {"schema_version":1,"yes":[...],"no":[...]}
TokenSets token_sets_from_json(const Json& j);
TokenSets load_token_sets(const std::filesystem::path& path);
Json token_sets_to_json(const TokenSets& sets);

struct ToyRunConfig {
  std::size_t steps = 2000;
  std::size_t binary_features = 8;
  toy::TrainingOptions options;
};

struct GrpoFile {
  GrpoConfig grpo;
  ToyRunConfig toy;
};

// {"schema_version":1,"group_size":16,"clip_epsilon":0.2,"kl_beta":0.04,
//  "inner_iterations":1,"learning_rate":5e-7,"seed":0,"toy":{...}}
// Absent keys keep their defaults; unknown keys are rejected.
GrpoFile grpo_file_from_json(const Json& j);
GrpoFile load_grpo_file(const std::filesystem::path& path);
Json grpo_file_to_json(const GrpoFile& file);

}  // namespace fg

#endif  // FG_CONFIG_HPP_
