// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "fg/error.hpp"

namespace fg {
namespace {

constexpr double kDegenerateStd = 1e-8;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNonFiniteInput, std::string("non-finite ") + what);
  }
}

}  // namespace

void GrpoConfig::validate() const {
  if (group_size < 2) throw Error(ErrorCode::kInvalidArgument, "group_size must be >= 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "clip_epsilon must lie in (0, 1)");
  }
  if (!(kl_beta >= 0.0) || !std::isfinite(kl_beta)) {
    throw Error(ErrorCode::kInvalidArgument, "kl_beta must be >= 0");
  }
  if (inner_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "inner_iterations must be >= 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be positive");
  }
}

double reward_accuracy(const TaggedResponse& response, const GroundTruth& truth) {
  return response.format_valid && response.answer == truth.answer ? 1.0 : 0.0;
}

double reward_format(const TaggedResponse& response, const AnswerVocabulary& vocab) {
  return parse_tagged(response.raw_text, Strictness::kStrict, vocab).format_valid ? 1.0 : 0.0;
}

Reward compute_reward(const TaggedResponse& response, const GroundTruth& truth) {
  Reward r;
  r.accuracy = reward_accuracy(response, truth);
  r.format = reward_format(response);
  r.total = r.accuracy + r.format;
  return r;
}

std::vector<double> group_advantages(std::span<const double> rewards, std::size_t group_size) {
  if (rewards.size() != group_size) {
    throw Error(ErrorCode::kGroupSizeMismatch,
                "group has " + std::to_string(rewards.size()) + " rewards, expected " +
                    std::to_string(group_size));
  }
  for (double r : rewards) require_finite(r, "reward");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std = std::sqrt(var / n);

  std::vector<double> adv(rewards.size(), 0.0);
  if (std < kDegenerateStd) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / std;
  return adv;
}

double kl_estimate(double logprob_ref, double logprob_new) {
  require_finite(logprob_ref, "reference logprob");
  require_finite(logprob_new, "policy logprob");
  const double log_r = logprob_ref - logprob_new;
  // expm1 keeps precision near r = 1 where the estimate is ~log_r^2 / 2.
  return std::max(0.0, std::expm1(log_r) - log_r);
}

GrpoLoss grpo_loss(const RolloutGroup& group, const GrpoConfig& cfg) {
  if (group.outputs.size() != cfg.group_size) {
    throw Error(ErrorCode::kGroupSizeMismatch,
                "group " + group.question_id + " has " + std::to_string(group.outputs.size()) +
                    " outputs, expected " + std::to_string(cfg.group_size));
  }
  const double g = static_cast<double>(cfg.group_size);
  const double lo = 1.0 - cfg.clip_epsilon;
  const double hi = 1.0 + cfg.clip_epsilon;

  GrpoLoss out;
  out.grad_logprob_new.resize(group.outputs.size());
  double surrogate_sum = 0.0;
  double kl_sum = 0.0;
  for (std::size_t i = 0; i < group.outputs.size(); ++i) {
    const auto& o = group.outputs[i];
    const std::size_t n = o.logprob_new.size();
    if (n == 0 || o.logprob_old.size() != n || o.logprob_ref.size() != n) {
      throw Error(ErrorCode::kAlignmentError,
                  "output " + std::to_string(i) + " of group " + group.question_id +
                      " has empty or misaligned logprobs");
    }
    require_finite(o.advantage, "advantage");
    const double adv = o.advantage;
    const double inv_len = 1.0 / static_cast<double>(n);
    auto& grad = out.grad_logprob_new[i];
    grad.resize(n);

    double surrogate = 0.0;
    double kl = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      require_finite(o.logprob_new[t], "policy logprob");
      require_finite(o.logprob_old[t], "old-policy logprob");
      const double ratio = std::exp(o.logprob_new[t] - o.logprob_old[t]);
      const double clipped = std::clamp(ratio, lo, hi);
      const double unclipped_term = ratio * adv;
      const double clipped_term = clipped * adv;
      // The clipped branch only carries no gradient when it is strictly
      // smaller; inside the clip range the two branches coincide.
      double d_surrogate = unclipped_term;
      if (clipped_term < unclipped_term) {
        surrogate += clipped_term;
        d_surrogate = 0.0;
        ++out.clipped_tokens;
      } else {
        surrogate += unclipped_term;
      }
      const double k3 = kl_estimate(o.logprob_ref[t], o.logprob_new[t]);
      kl += k3;
      // d k3 / d logprob_new = 1 - pi_ref / pi_new
      const double d_kl = -std::expm1(o.logprob_ref[t] - o.logprob_new[t]);
      grad[t] = -(d_surrogate - cfg.kl_beta * d_kl) * inv_len / g;
    }
    surrogate_sum += surrogate * inv_len;
    kl_sum += kl * inv_len;
  }
  out.policy_term = -surrogate_sum / g;
  out.kl_term = cfg.kl_beta * kl_sum / g;
  out.mean_kl = kl_sum / g;
  out.loss = out.policy_term + out.kl_term;
  return out;
}

SftLoss sft_cross_entropy(std::span<const int> target_tokens,
                          std::span<const std::vector<double>> predicted_logprobs,
                          std::span<const std::uint8_t> mask) {
  if (target_tokens.size() != predicted_logprobs.size() ||
      (!mask.empty() && mask.size() != target_tokens.size())) {
    throw Error(ErrorCode::kAlignmentError, "targets, predictions and mask differ in length");
  }
  SftLoss out;
  out.grad_target_logprob.assign(target_tokens.size(), 0.0);
  double total = 0.0;
  for (std::size_t t = 0; t < target_tokens.size(); ++t) {
    if (!mask.empty() && mask[t] == 0) continue;
    const int target = target_tokens[t];
    if (target < 0 || static_cast<std::size_t>(target) >= predicted_logprobs[t].size()) {
      throw Error(ErrorCode::kAlignmentError,
                  "target token out of range at position " + std::to_string(t));
    }
    const double lp = predicted_logprobs[t][static_cast<std::size_t>(target)];
    if (std::isnan(lp) || lp > 0.0) {
      throw Error(ErrorCode::kNonFiniteInput, "invalid log-probability at position " +
                                                  std::to_string(t));
    }
    total -= lp;
    ++out.counted;
  }
  if (out.counted == 0) {
    throw Error(ErrorCode::kInvalidArgument, "no unmasked positions");
  }
  const double inv = 1.0 / static_cast<double>(out.counted);
  out.loss = total * inv;
  for (std::size_t t = 0; t < target_tokens.size(); ++t) {
    if (mask.empty() || mask[t] != 0) out.grad_target_logprob[t] = -inv;
  }
  return out;
}

}  // namespace fg
