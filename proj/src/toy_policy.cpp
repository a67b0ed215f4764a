// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/toy_policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "fg/error.hpp"

namespace fg::toy {
namespace {

constexpr std::array<int, kSlots> kLayout = {kAnswerOpen, -1, kAnswerClose, kReasonOpen,
                                             -1,          -1, kReasonClose};

// Independent stream per (step, question, rollout) so sampling order never
// changes the draws.
enum class Stream : std::uint32_t { kQuestion = 1, kRollout = 2, kSft = 3, kInit = 4, kEval = 5 };

std::mt19937_64 substream(std::uint64_t seed, Stream stream, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), static_cast<std::uint32_t>(stream),
                    lo(a),    hi(a),    lo(b), hi(b), lo(c), hi(c)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal(std::mt19937_64& rng) {
  // Box-Muller on our own uniforms keeps the draws identical across
  // standard library implementations.
  const double u1 = std::max(uniform01(rng), 0x1.0p-60);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

class Adam {
 public:
  Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEps);
    }
  }

 private:
  double lr_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

void check_tokens(std::span<const int> tokens) {
  if (tokens.size() != kSlots) {
    throw Error(ErrorCode::kAlignmentError, "toy outputs have exactly " +
                                                std::to_string(kSlots) + " tokens");
  }
  for (int t : tokens) {
    if (t < 0 || t >= kVocabSize) throw Error(ErrorCode::kAlignmentError, "token out of range");
  }
}

}  // namespace

std::string_view token_text(int token) {
  switch (token) {
    case kAnswerOpen: return "<answer>";
    case kAnswerClose: return "</answer>";
    case kReasonOpen: return "<reason>";
    case kReasonClose: return "</reason>";
    case kYes: return "Yes";
    case kNo: return "No";
    case kThe: return " the";
    case kShape: return " shape";
    case kLooks: return " looks";
    case kNatural: return " natural";
    case kDistorted: return " distorted";
    case kPeriod: return ".";
    default: return "";
  }
}

std::string render(std::span<const int> tokens) {
  std::string out;
  for (int t : tokens) out.append(token_text(t));
  return out;
}

ToyPolicy::ToyPolicy(std::size_t features, double temperature)
    : features_(features),
      temperature_(temperature),
      weights_(kSlots * kVocabSize * features, 0.0) {
  if (features == 0) throw Error(ErrorCode::kInvalidArgument, "policy needs features");
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be > 0");
}

ToyPolicy ToyPolicy::base(std::size_t features, std::uint64_t seed) {
  ToyPolicy p(features);
  auto rng = substream(seed, Stream::kInit, 0);
  for (double& w : p.weights_) w = 0.05 * normal(rng);
  const std::size_t bias = features - 1;
  for (std::size_t s = 0; s < kSlots; ++s) {
    if (kLayout[s] >= 0) {
      p.weight(s, static_cast<std::size_t>(kLayout[s]), bias) += 6.0;
    }
  }
  p.weight(1, kYes, bias) += 3.0;
  p.weight(1, kNo, bias) += 3.0;
  for (std::size_t s : {4u, 5u}) {
    for (int t = kThe; t <= kPeriod; ++t) p.weight(s, static_cast<std::size_t>(t), bias) += 2.5;
    p.weight(s, kYes, bias) += 0.5;
    p.weight(s, kNo, bias) += 0.5;
  }
  return p;
}

std::vector<double> ToyPolicy::log_probs(std::size_t slot, std::span<const double> phi) const {
  if (phi.size() != features_) {
    throw Error(ErrorCode::kAlignmentError, "feature vector has the wrong length");
  }
  std::vector<double> z(kVocabSize, 0.0);
  for (std::size_t v = 0; v < kVocabSize; ++v) {
    double acc = 0.0;
    for (std::size_t f = 0; f < features_; ++f) acc += weight(slot, v, f) * phi[f];
    z[v] = acc / temperature_;
  }
  const double peak = *std::max_element(z.begin(), z.end());
  double norm = 0.0;
  for (double x : z) norm += std::exp(x - peak);
  const double log_norm = peak + std::log(norm);
  for (double& x : z) x -= log_norm;
  return z;
}

std::vector<int> ToyPolicy::sample(std::span<const double> phi, std::mt19937_64& rng) const {
  std::vector<int> out(kSlots);
  for (std::size_t s = 0; s < kSlots; ++s) {
    const auto lp = log_probs(s, phi);
    const double u = uniform01(rng);
    double cum = 0.0;
    int pick = kVocabSize - 1;
    for (int v = 0; v < kVocabSize; ++v) {
      cum += std::exp(lp[static_cast<std::size_t>(v)]);
      if (u < cum) {
        pick = v;
        break;
      }
    }
    out[s] = pick;
  }
  return out;
}

std::vector<double> ToyPolicy::token_logprobs(std::span<const double> phi,
                                              std::span<const int> tokens) const {
  check_tokens(tokens);
  std::vector<double> out(kSlots);
  for (std::size_t s = 0; s < kSlots; ++s) {
    out[s] = log_probs(s, phi)[static_cast<std::size_t>(tokens[s])];
  }
  return out;
}

void ToyPolicy::accumulate_grad(std::span<const double> phi, std::span<const int> tokens,
                                std::span<const double> dloss_dlogprob,
                                std::span<double> grad) const {
  check_tokens(tokens);
  if (dloss_dlogprob.size() != kSlots || grad.size() != weights_.size()) {
    throw Error(ErrorCode::kAlignmentError, "gradient buffers have the wrong shape");
  }
  for (std::size_t s = 0; s < kSlots; ++s) {
    const double upstream = dloss_dlogprob[s];
    if (upstream == 0.0) continue;
    const auto lp = log_probs(s, phi);
    for (std::size_t v = 0; v < kVocabSize; ++v) {
      const double indicator = static_cast<int>(v) == tokens[s] ? 1.0 : 0.0;
      const double d_logit = upstream * (indicator - std::exp(lp[v])) / temperature_;
      double* row = &grad[(s * kVocabSize + v) * features_];
      for (std::size_t f = 0; f < features_; ++f) row[f] += d_logit * phi[f];
    }
  }
}

SyntheticQaEnv::SyntheticQaEnv(std::size_t binary_features, std::uint64_t seed)
    : binary_features_(binary_features) {
  if (binary_features < 3) {
    throw Error(ErrorCode::kInvalidArgument, "environment needs at least 3 features");
  }
  auto rng = substream(seed, Stream::kInit, 1);
  std::vector<std::size_t> idx(binary_features);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    std::swap(idx[i], idx[static_cast<std::size_t>(rng() % (i + 1))]);
  }
  relevant_.assign(idx.begin(), idx.begin() + 3);
  for (std::size_t i = 0; i < 3; ++i) signs_.push_back((rng() & 1U) != 0 ? 1.0 : -1.0);
}

Answer SyntheticQaEnv::truth(std::span<const double> phi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < relevant_.size(); ++i) s += signs_[i] * phi[relevant_[i]];
  return s > 0.0 ? Answer::kYes : Answer::kNo;
}

QaItem SyntheticQaEnv::sample(std::mt19937_64& rng) const {
  QaItem item;
  item.phi.resize(feature_count());
  std::uint64_t bits = 0;
  for (std::size_t f = 0; f < binary_features_; ++f) {
    const bool on = (rng() >> 63) != 0;
    item.phi[f] = on ? 1.0 : -1.0;
    bits |= static_cast<std::uint64_t>(on) << f;
  }
  item.phi.back() = 1.0;
  item.truth = truth(item.phi);
  item.question_id = "toy-" + std::to_string(bits);
  return item;
}

std::vector<int> SyntheticQaEnv::labeled_output(Answer truth) {
  const bool yes = truth == Answer::kYes;
  return {kAnswerOpen, yes ? kYes : kNo, kAnswerClose, kReasonOpen,
          kLooks,      yes ? kNatural : kDistorted,   kReasonClose};
}

Objective grpo_objective(const ToyPolicy& policy, std::span<const ToyGroup> groups,
                         const GrpoConfig& cfg) {
  Objective out;
  out.grad.assign(policy.parameter_count(), 0.0);
  if (groups.empty()) return out;
  const double inv = 1.0 / static_cast<double>(groups.size());
  std::vector<double> scaled;
  for (const auto& g : groups) {
    if (g.tokens.size() != g.logprob_old.size() || g.tokens.size() != g.logprob_ref.size() ||
        g.tokens.size() != g.advantages.size()) {
      throw Error(ErrorCode::kAlignmentError, "toy group fields differ in length");
    }
    RolloutGroup rollouts;
    rollouts.outputs.resize(g.tokens.size());
    for (std::size_t i = 0; i < g.tokens.size(); ++i) {
      auto& r = rollouts.outputs[i];
      r.logprob_new = policy.token_logprobs(g.phi, g.tokens[i]);
      r.logprob_old = g.logprob_old[i];
      r.logprob_ref = g.logprob_ref[i];
      r.advantage = g.advantages[i];
    }
    const GrpoLoss loss = grpo_loss(rollouts, cfg);
    out.loss += loss.loss * inv;
    out.mean_kl += loss.mean_kl * inv;
    for (std::size_t i = 0; i < g.tokens.size(); ++i) {
      scaled = loss.grad_logprob_new[i];
      for (double& x : scaled) x *= inv;
      policy.accumulate_grad(g.phi, g.tokens[i], scaled, out.grad);
    }
  }
  return out;
}

Objective sft_objective(const ToyPolicy& policy, std::span<const SftExample> examples) {
  Objective out;
  out.grad.assign(policy.parameter_count(), 0.0);
  if (examples.empty()) return out;
  const double inv = 1.0 / static_cast<double>(examples.size());
  std::vector<std::vector<double>> rows(kSlots);
  for (const auto& ex : examples) {
    check_tokens(ex.targets);
    for (std::size_t s = 0; s < kSlots; ++s) rows[s] = policy.log_probs(s, ex.phi);
    SftLoss loss = sft_cross_entropy(ex.targets, rows, ex.mask);
    out.loss += loss.loss * inv;
    for (double& x : loss.grad_target_logprob) x *= inv;
    policy.accumulate_grad(ex.phi, ex.targets, loss.grad_target_logprob, out.grad);
  }
  return out;
}

std::string_view train_mode_name(TrainMode m) {
  return m == TrainMode::kZero ? "zero" : "cold_start";
}

double TrainingCurve::trailing_acc(std::size_t window) const {
  if (steps.empty()) return 0.0;
  const std::size_t n = std::min(window, steps.size());
  double s = 0.0;
  for (std::size_t i = steps.size() - n; i < steps.size(); ++i) s += steps[i].acc_rate;
  return s / static_cast<double>(n);
}

double TrainingCurve::trailing_fmt(std::size_t window) const {
  if (steps.empty()) return 0.0;
  const std::size_t n = std::min(window, steps.size());
  double s = 0.0;
  for (std::size_t i = steps.size() - n; i < steps.size(); ++i) s += steps[i].fmt_rate;
  return s / static_cast<double>(n);
}

PolicyRates evaluate_policy(const SyntheticQaEnv& env, const ToyPolicy& policy,
                            std::size_t questions, std::uint64_t seed) {
  PolicyRates rates;
  if (questions == 0) return rates;
  for (std::size_t q = 0; q < questions; ++q) {
    auto rng = substream(seed, Stream::kEval, q);
    const QaItem item = env.sample(rng);
    const auto tokens = policy.sample(item.phi, rng);
    const auto response = parse_tagged(render(tokens), Strictness::kStrict);
    const Reward r = compute_reward(response, GroundTruth{item.question_id, item.truth, {}});
    rates.acc_rate += r.accuracy;
    rates.fmt_rate += r.format;
  }
  rates.acc_rate /= static_cast<double>(questions);
  rates.fmt_rate /= static_cast<double>(questions);
  return rates;
}

TrainingCurve train_toy_grpo(const SyntheticQaEnv& env, ToyPolicy& policy,
                             const GrpoConfig& cfg, std::size_t steps, TrainMode mode,
                             const TrainingOptions& options) {
  cfg.validate();
  if (policy.features() != env.feature_count()) {
    throw Error(ErrorCode::kInvalidArgument, "policy and environment feature counts differ");
  }
  TrainingCurve curve;
  curve.mode = mode;

  if (mode == TrainMode::kColdStart) {
    Adam sft_opt(policy.parameter_count(), options.sft_learning_rate);
    std::vector<SftExample> batch(options.sft_batch);
    for (std::size_t s = 0; s < options.sft_steps; ++s) {
      auto rng = substream(cfg.seed, Stream::kSft, s);
      for (auto& ex : batch) {
        const QaItem item = env.sample(rng);
        ex.phi = item.phi;
        ex.targets = SyntheticQaEnv::labeled_output(item.truth);
        ex.mask.clear();
      }
      const Objective obj = sft_objective(policy, batch);
      if (!std::isfinite(obj.loss)) {
        throw Error(ErrorCode::kDivergenceDetected, "non-finite SFT loss at step " +
                                                        std::to_string(s));
      }
      curve.sft_loss = obj.loss;
      sft_opt.step(policy.parameters(), obj.grad);
    }
  }

  const ToyPolicy reference = policy;
  Adam opt(policy.parameter_count(), cfg.learning_rate);
  std::vector<ToyGroup> groups(options.questions_per_step);
  std::vector<double> rewards(cfg.group_size);

  for (std::size_t step = 0; step < steps; ++step) {
    const ToyPolicy old = policy;
    TrainingStep record;
    record.step = step;
    double reward_sum = 0.0;
    double acc_sum = 0.0;
    double fmt_sum = 0.0;
    for (std::size_t q = 0; q < groups.size(); ++q) {
      auto qrng = substream(cfg.seed, Stream::kQuestion, step, q);
      const QaItem item = env.sample(qrng);
      const GroundTruth truth{item.question_id, item.truth, std::nullopt};
      ToyGroup& g = groups[q];
      g.phi = item.phi;
      g.tokens.resize(cfg.group_size);
      g.logprob_old.resize(cfg.group_size);
      g.logprob_ref.resize(cfg.group_size);
      for (std::size_t i = 0; i < cfg.group_size; ++i) {
        auto rrng = substream(cfg.seed, Stream::kRollout, step, q, i);
        g.tokens[i] = old.sample(g.phi, rrng);
        g.logprob_old[i] = old.token_logprobs(g.phi, g.tokens[i]);
        g.logprob_ref[i] = reference.token_logprobs(g.phi, g.tokens[i]);
        const auto response = parse_tagged(render(g.tokens[i]), Strictness::kStrict);
        const Reward r = compute_reward(response, truth);
        rewards[i] = r.total;
        reward_sum += r.total;
        acc_sum += r.accuracy;
        fmt_sum += r.format;
      }
      g.advantages = group_advantages(rewards, cfg.group_size);
    }
    const double rollouts = static_cast<double>(groups.size() * cfg.group_size);
    record.mean_reward = reward_sum / rollouts;
    record.acc_rate = acc_sum / rollouts;
    record.fmt_rate = fmt_sum / rollouts;

    for (std::size_t it = 0; it < cfg.inner_iterations; ++it) {
      const Objective obj = grpo_objective(policy, groups, cfg);
      if (!std::isfinite(obj.loss)) {
        throw Error(ErrorCode::kDivergenceDetected, "non-finite GRPO loss at step " +
                                                        std::to_string(step));
      }
      if (it == 0) {
        record.loss = obj.loss;
        record.kl = obj.mean_kl;
      }
      opt.step(policy.parameters(), obj.grad);
    }
    curve.steps.push_back(record);
  }
  return curve;
}

}  // namespace fg::toy
