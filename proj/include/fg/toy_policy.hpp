// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_TOY_POLICY_HPP_
#define FG_TOY_POLICY_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fg/grpo.hpp"
#include "fg/types.hpp"

namespace fg::toy {

// Miniature vocabulary: the four tag markers, the two answer words and a
// handful of reason words.
enum Token : int {
  kAnswerOpen,
  kAnswerClose,
  kReasonOpen,
  kReasonClose,
  kYes,
  kNo,
  kThe,
  kShape,
  kLooks,
  kNatural,
  kDistorted,
  kPeriod,
  kVocabSize,
};

std::string_view token_text(int token);

// Outputs have a fixed number of positions; each position has its own
// softmax head over the vocabulary, linear in the question features:
//   <answer> ANSWER </answer> <reason> WORD WORD </reason>
inline constexpr std::size_t kSlots = 7;

std::string render(std::span<const int> tokens);

// Desk-scale stand-in for the answering model.
class ToyPolicy {
 public:
  ToyPolicy(std::size_t features, double temperature = 1.0);

  // A "pretrained" starting point: mostly follows the tag layout, answers
  // without looking at the features, and sometimes writes a bare Yes/No in
  // the reason.
  static ToyPolicy base(std::size_t features, std::uint64_t seed);

  std::size_t features() const { return features_; }
  std::size_t parameter_count() const { return weights_.size(); }
  double temperature() const { return temperature_; }
  std::span<double> parameters() { return weights_; }
  std::span<const double> parameters() const { return weights_; }

  std::vector<double> log_probs(std::size_t slot, std::span<const double> phi) const;
  std::vector<int> sample(std::span<const double> phi, std::mt19937_64& rng) const;
  std::vector<double> token_logprobs(std::span<const double> phi,
                                     std::span<const int> tokens) const;

  // grad += sum_t dloss_dlogprob[t] * d log p(tokens[t]) / d weights
  void accumulate_grad(std::span<const double> phi, std::span<const int> tokens,
                       std::span<const double> dloss_dlogprob, std::span<double> grad) const;

 private:
  double& weight(std::size_t slot, std::size_t token, std::size_t feature) {
    return weights_[(slot * kVocabSize + token) * features_ + feature];
  }
  double weight(std::size_t slot, std::size_t token, std::size_t feature) const {
    return weights_[(slot * kVocabSize + token) * features_ + feature];
  }

  std::size_t features_;
  double temperature_;
  std::vector<double> weights_;
};

struct QaItem {
  std::string question_id;
  // Last entry is a constant 1 bias feature.
  std::vector<double> phi;
  Answer truth = Answer::kYes;
};

// Synthetic yes/no questions. The truth is the sign of a fixed +-1
// combination of three of the binary features, chosen from the seed.
class SyntheticQaEnv {
 public:
  SyntheticQaEnv(std::size_t binary_features, std::uint64_t seed);

  std::size_t feature_count() const { return binary_features_ + 1; }
  QaItem sample(std::mt19937_64& rng) const;
  Answer truth(std::span<const double> phi) const;

  // Annotated answer plus reason, one token per slot.
  static std::vector<int> labeled_output(Answer truth);

 private:
  std::size_t binary_features_;
  std::vector<std::size_t> relevant_;
  std::vector<double> signs_;
};

struct ToyGroup {
  std::vector<double> phi;
  std::vector<std::vector<int>> tokens;
  std::vector<std::vector<double>> logprob_old;
  std::vector<std::vector<double>> logprob_ref;
  std::vector<double> advantages;
};

struct Objective {
  double loss = 0.0;
  std::vector<double> grad;
  double mean_kl = 0.0;
};

// Mean GRPO loss over the groups and its gradient with respect to the
// policy weights.
Objective grpo_objective(const ToyPolicy& policy, std::span<const ToyGroup> groups,
                         const GrpoConfig& cfg);

struct SftExample {
  std::vector<double> phi;
  std::vector<int> targets;
  std::vector<std::uint8_t> mask;
};

// Mean token cross-entropy over the examples and its gradient.
Objective sft_objective(const ToyPolicy& policy, std::span<const SftExample> examples);

enum class TrainMode { kZero, kColdStart };

std::string_view train_mode_name(TrainMode m);

struct TrainingStep {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double acc_rate = 0.0;
  double fmt_rate = 0.0;
  double kl = 0.0;
  double loss = 0.0;
};

struct TrainingCurve {
  TrainMode mode = TrainMode::kZero;
  std::vector<TrainingStep> steps;
  // Final supervised loss of the cold-start phase (0 in zero mode).
  double sft_loss = 0.0;

  // Mean of a field over the last `window` steps.
  double trailing_acc(std::size_t window) const;
  double trailing_fmt(std::size_t window) const;
};

struct PolicyRates {
  double acc_rate = 0.0;
  double fmt_rate = 0.0;
};

// Sampled-output reward rates of `policy` on `questions` fresh questions.
PolicyRates evaluate_policy(const SyntheticQaEnv& env, const ToyPolicy& policy,
                            std::size_t questions, std::uint64_t seed);

struct TrainingOptions {
  std::size_t questions_per_step = 4;
  std::size_t sft_steps = 300;
  std::size_t sft_batch = 16;
  double sft_learning_rate = 0.05;
};

// Zero mode: the reference policy is the initial policy. Cold-start mode
// first fits the annotated outputs with cross-entropy and then freezes the
// result as the reference. Throws DivergenceDetected on a non-finite loss.
TrainingCurve train_toy_grpo(const SyntheticQaEnv& env, ToyPolicy& policy,
                             const GrpoConfig& cfg, std::size_t steps, TrainMode mode,
                             const TrainingOptions& options = {});

}  // namespace fg::toy

#endif  // FG_TOY_POLICY_HPP_
