// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_GRPO_HPP_
#define FG_GRPO_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fg/response_parse.hpp"
#include "fg/scoring.hpp"

namespace fg {

struct Reward {
  double accuracy = 0.0;
  double format = 0.0;
  double total = 0.0;
};

struct GrpoConfig {
  std::size_t group_size = 16;
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  std::size_t inner_iterations = 1;
  double learning_rate = 5.0e-7;
  std::uint64_t seed = 0;

  // Throws InvalidArgument unless G >= 2, 0 < eps < 1, beta >= 0, mu >= 1
  // and the learning rate is positive.
  void validate() const;
};

// 1 iff the response has a valid format and its answer equals the truth.
double reward_accuracy(const TaggedResponse& response, const GroundTruth& truth);

// 1 iff the raw text passes the strict format check, whatever strictness
// the response was originally parsed with.
double reward_format(const TaggedResponse& response, const AnswerVocabulary& vocab = {});

Reward compute_reward(const TaggedResponse& response, const GroundTruth& truth);

// (r - mean) / std with the population std. Groups whose std is below 1e-8
// get all-zero advantages. Throws GroupSizeMismatch unless size == G.
std::vector<double> group_advantages(std::span<const double> rewards, std::size_t group_size);

// Per-token k3 estimator r - log r - 1 with r = pi_ref / pi_new.
double kl_estimate(double logprob_ref, double logprob_new);

struct Rollout {
  TaggedResponse response;
  std::vector<double> logprob_new;
  std::vector<double> logprob_old;
  std::vector<double> logprob_ref;
  Reward reward;
  double advantage = 0.0;
};

struct RolloutGroup {
  std::string question_id;
  std::vector<Rollout> outputs;
};

struct GrpoLoss {
  double loss = 0.0;
  // loss = policy_term + kl_term
  double policy_term = 0.0;
  double kl_term = 0.0;
  // Unweighted mean of the per-output token-averaged KL.
  double mean_kl = 0.0;
  std::size_t clipped_tokens = 0;
  // d loss / d logprob_new, aligned with each output's tokens.
  std::vector<std::vector<double>> grad_logprob_new;
};

// Clipped surrogate with KL penalty. Ratios and KL are taken per token and
// averaged over each output's tokens:
//
//   loss = -(1/G) sum_i (1/|o_i|) sum_t [ min(rho_it A_i, clip(rho_it) A_i)
//                                         - beta KL_it ]
//
// Throws GroupSizeMismatch, AlignmentError for ragged or empty token
// vectors, NonFiniteInput for non-finite logprobs or advantages.
GrpoLoss grpo_loss(const RolloutGroup& group, const GrpoConfig& cfg);

struct SftLoss {
  double loss = 0.0;
  std::size_t counted = 0;
  // d loss / d predicted_logprobs[t][target_tokens[t]]; zero where masked.
  std::vector<double> grad_target_logprob;
};

// Mean over unmasked positions of -log p(target). `predicted_logprobs[t]`
// is the log-distribution at position t. An empty mask counts every
// position; answer-only training masks out the reason positions.
SftLoss sft_cross_entropy(std::span<const int> target_tokens,
                          std::span<const std::vector<double>> predicted_logprobs,
                          std::span<const std::uint8_t> mask = {});

}  // namespace fg

#endif  // FG_GRPO_HPP_
