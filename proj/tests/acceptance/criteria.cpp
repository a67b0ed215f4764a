// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "../oracles/oracles.hpp"
#include "fg/backend.hpp"
#include "fg/config.hpp"
#include "fg/dataset.hpp"
#include "fg/error.hpp"
#include "fg/eval.hpp"
#include "fg/grpo.hpp"
#include "fg/jsonl.hpp"
#include "fg/metrics.hpp"
#include "fg/report.hpp"
#include "fg/response_parse.hpp"
#include "fg/scoring.hpp"
#include "fg/toy_policy.hpp"

namespace fg::acceptance {
namespace {

// Tolerances, pinned.
constexpr double kSoftmaxOracleTol = 1e-12;
constexpr double kNormalizationTol = 1e-9;
constexpr double kShiftTol = 1e-9;
constexpr double kGradRelTol = 1e-5;
constexpr double kFiniteDiffStep = 1e-5;
constexpr double kKlClosedFormTol = 1e-12;
constexpr double kAdvMeanTol = 1e-9;
constexpr double kAdvStdTol = 1e-6;
constexpr double kMinColdStartAcc = 0.95;
constexpr double kMinFormatRate = 0.99;
constexpr double kMetricsOracleTol = 1e-12;
constexpr double kInvarianceTol = 1e-12;

constexpr double kSoftmaxBudgetSeconds = 5.0;
constexpr double kGradBudgetSeconds = 60.0;
constexpr double kToyBudgetSeconds = 300.0;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::mt19937_64 rng_for(std::uint64_t seed, int criterion) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(criterion)};
  return std::mt19937_64(seq);
}

const std::vector<std::string>& all_default_tokens() {
  static const std::vector<std::string> tokens = [] {
    const auto sets = TokenSets::defaults();
    std::vector<std::string> t = sets.yes_tokens;
    t.insert(t.end(), sets.no_tokens.begin(), sets.no_tokens.end());
    return t;
  }();
  return tokens;
}

// A random subset of the default tokens (at least one) plus a few
// non-members, with values in [-lo, lo].
AnswerLogits random_logits(std::mt19937_64& rng, double lo) {
  std::uniform_real_distribution<double> value(-lo, lo);
  std::bernoulli_distribution keep(0.6);
  AnswerLogits logits;
  auto tokens = all_default_tokens();
  std::shuffle(tokens.begin(), tokens.end(), rng);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == 0 || keep(rng)) logits.entries.push_back({tokens[i], value(rng), LogitKind::kRawLogit});
  }
  for (const char* other : {"Maybe", " the", "<answer>"}) {
    if (keep(rng)) logits.entries.push_back({other, value(rng), LogitKind::kRawLogit});
  }
  std::shuffle(logits.entries.begin(), logits.entries.end(), rng);
  return logits;
}

CriterionResult c1_softmax_oracle(const CriteriaOptions& o) {
  CriterionResult r{1, "restricted softmax matches 50-digit oracle to 1e-12 on 1,000 logit sets", false, {}, 0.0};
  auto rng = rng_for(o.seed, 1);
  const auto sets = TokenSets::defaults();
  double worst = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto logits = random_logits(rng, 30.0);
    const auto dist = restricted_softmax(logits, sets);
    std::vector<std::pair<std::string, double>> plain;
    for (const auto& e : logits.entries) plain.emplace_back(e.token, e.value);
    const double expected = oracle::softmax_p_yes(plain, sets.yes_tokens, sets.no_tokens);
    worst = std::max({worst, std::abs(dist.p_yes - expected),
                      std::abs(dist.p_no - (1.0 - expected))});
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.pass = worst <= kSoftmaxOracleTol && secs < kSoftmaxBudgetSeconds;
  r.detail = "max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + "s of 5s budget";
  return r;
}

CriterionResult c2_normalization_shift(const CriteriaOptions& o) {
  CriterionResult r{2, "p_yes + p_no = 1 and shift invariance on 10,000 inputs", false, {}, 0.0};
  auto rng = rng_for(o.seed, 2);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  const auto sets = TokenSets::defaults();
  double worst_norm = 0.0;
  double worst_shift = 0.0;
  for (int i = 0; i < 10000; ++i) {
    auto logits = random_logits(rng, 20.0);
    const auto a = restricted_softmax(logits, sets);
    const double c = shift(rng);
    for (auto& e : logits.entries) e.value += c;
    const auto b = restricted_softmax(logits, sets);
    worst_norm = std::max({worst_norm, std::abs(a.p_yes + a.p_no - 1.0),
                           std::abs(b.p_yes + b.p_no - 1.0)});
    worst_shift = std::max(worst_shift, std::abs(a.p_yes - b.p_yes));
  }
  r.pass = worst_norm <= kNormalizationTol && worst_shift <= kShiftTol;
  r.detail = "max |sum-1| " + fmt("%.3g", worst_norm) + ", max shift drift " +
             fmt("%.3g", worst_shift);
  return r;
}

CriterionResult c3_polarity_duality(const CriteriaOptions& o) {
  CriterionResult r{3, "entity_score(d,1) + entity_score(d,0) = 1 exactly", false, {}, 0.0};
  auto rng = rng_for(o.seed, 3);
  const auto sets = TokenSets::defaults();
  int violations = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto d = restricted_softmax(random_logits(rng, 40.0), sets);
    if (entity_score(d, Polarity::kPositive) + entity_score(d, Polarity::kNegative) != 1.0) {
      ++violations;
    }
  }
  r.pass = violations == 0;
  r.detail = std::to_string(violations) + " of " + std::to_string(n) + " distributions off";
  return r;
}

CriterionResult c4_mode_consistency(const CriteriaOptions& o) {
  CriterionResult r{4, "normalized dimension score x count = paper_literal sum, exact", false, {}, 0.0};
  auto rng = rng_for(o.seed, 4);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::uniform_int_distribution<int> length(1, 50);
  const int n = 10000;
  int division_misses = 0;
  int product_misses = 0;
  std::string example;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(static_cast<std::size_t>(length(rng)));
    for (double& x : v) x = score(rng);
    const double literal = dimension_score(v, ScoreMode::kPaperLiteral);
    const double normalized = dimension_score(v, ScoreMode::kNormalized);
    const double count = static_cast<double>(v.size());
    if (normalized != literal / count) ++division_misses;
    if (normalized * count != literal) {
      ++product_misses;
      if (example.empty()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "; e.g. n=%zu literal=%.17g normalized*n=%.17g", v.size(),
                      literal, normalized * count);
        example = buf;
      }
    }
  }
  r.pass = division_misses == 0 && product_misses == 0;
  r.detail = "normalized == literal/count failed " + std::to_string(division_misses) +
             ", normalized*count == literal failed " + std::to_string(product_misses) + " of " +
             std::to_string(n) + example;
  return r;
}

// Central-difference gradient of `f` at the policy's parameters.
std::vector<double> numeric_grad(toy::ToyPolicy& policy,
                                 const std::function<double(const toy::ToyPolicy&)>& f) {
  auto params = policy.parameters();
  std::vector<double> g(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + kFiniteDiffStep;
    const double up = f(policy);
    params[k] = saved - kFiniteDiffStep;
    const double down = f(policy);
    params[k] = saved;
    g[k] = (up - down) / (2.0 * kFiniteDiffStep);
  }
  return g;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

toy::ToyPolicy perturbed(const toy::ToyPolicy& p, std::mt19937_64& rng, double scale) {
  toy::ToyPolicy q = p;
  std::normal_distribution<double> noise(0.0, scale);
  for (double& w : q.parameters()) w += noise(rng);
  return q;
}

CriterionResult c5_gradient_check(const CriteriaOptions& o) {
  CriterionResult r{5, "grpo_loss and sft_cross_entropy gradients match finite differences", false, {}, 0.0};
  auto rng = rng_for(o.seed, 5);
  const toy::SyntheticQaEnv env(6, o.seed);
  GrpoConfig cfg;
  cfg.group_size = 4;
  double worst_grpo = 0.0;
  double worst_sft = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (int inst = 0; inst < 100; ++inst) {
    auto policy = perturbed(toy::ToyPolicy::base(env.feature_count(), o.seed + inst), rng, 0.3);
    const auto old_policy = perturbed(policy, rng, 0.05);
    const auto ref_policy = perturbed(policy, rng, 0.2);

    std::vector<toy::ToyGroup> groups(2);
    for (auto& g : groups) {
      const auto item = env.sample(rng);
      g.phi = item.phi;
      std::normal_distribution<double> adv(0.0, 1.0);
      for (std::size_t i = 0; i < cfg.group_size; ++i) {
        const auto tokens = old_policy.sample(g.phi, rng);
        g.logprob_old.push_back(old_policy.token_logprobs(g.phi, tokens));
        g.logprob_ref.push_back(ref_policy.token_logprobs(g.phi, tokens));
        g.tokens.push_back(tokens);
        g.advantages.push_back(adv(rng));
      }
    }
    const auto analytic = toy::grpo_objective(policy, groups, cfg).grad;
    const auto numeric = numeric_grad(policy, [&](const toy::ToyPolicy& p) {
      return toy::grpo_objective(p, groups, cfg).loss;
    });
    worst_grpo = std::max(worst_grpo, relative_error(analytic, numeric));

    std::vector<toy::SftExample> examples(3);
    std::bernoulli_distribution keep(0.7);
    for (auto& e : examples) {
      const auto item = env.sample(rng);
      e.phi = item.phi;
      e.targets = toy::SyntheticQaEnv::labeled_output(item.truth);
      for (std::size_t t = 0; t < e.targets.size(); ++t) e.mask.push_back(t == 1 || keep(rng));
    }
    const auto sft_analytic = toy::sft_objective(policy, examples).grad;
    const auto sft_numeric = numeric_grad(
        policy, [&](const toy::ToyPolicy& p) { return toy::sft_objective(p, examples).loss; });
    worst_sft = std::max(worst_sft, relative_error(sft_analytic, sft_numeric));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.pass = worst_grpo <= kGradRelTol && worst_sft <= kGradRelTol && secs < kGradBudgetSeconds;
  r.detail = "worst rel err grpo " + fmt("%.3g", worst_grpo) + ", sft " + fmt("%.3g", worst_sft) +
             ", " + fmt("%.1f", secs) + "s of 60s budget";
  return r;
}

CriterionResult c6_kl(const CriteriaOptions& o) {
  CriterionResult r{6, "k3 KL non-negative, zero iff equal, r=2 closed form", false, {}, 0.0};
  auto rng = rng_for(o.seed, 6);
  std::uniform_real_distribution<double> lp(-20.0, 0.0);
  std::uniform_real_distribution<double> tiny_exp(-7.0, -1.0);
  int negative = 0;
  int zero_mismatch = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = lp(rng);
    double b = lp(rng);
    if (i % 4 == 1) b = a;
    if (i % 4 == 2) b = std::min(0.0, a + std::pow(10.0, tiny_exp(rng)));
    const double kl = kl_estimate(a, b);
    if (kl < 0.0) ++negative;
    if ((kl == 0.0) != (a == b)) ++zero_mismatch;
  }
  const double r2 = kl_estimate(std::log(2.0), 0.0);
  const double closed = 2.0 - std::log(2.0) - 1.0;
  const double hp = oracle::kl_k3(std::log(2.0), 0.0);
  const double err = std::max(std::abs(r2 - closed), std::abs(r2 - hp));
  r.pass = negative == 0 && zero_mismatch == 0 && err <= kKlClosedFormTol;
  r.detail = std::to_string(negative) + " negative, " + std::to_string(zero_mismatch) +
             " zero/equality mismatches, r=2 err " + fmt("%.3g", err);
  return r;
}

CriterionResult c7_advantages(const CriteriaOptions& o) {
  CriterionResult r{7, "group advantages: mean 0, population std 1, degenerate groups zero", false, {}, 0.0};
  auto rng = rng_for(o.seed, 7);
  constexpr std::size_t G = 16;
  std::uniform_int_distribution<int> discrete(0, 2);
  std::uniform_real_distribution<double> real(-5.0, 5.0);
  double worst_mean = 0.0;
  double worst_std = 0.0;
  int groups = 0;
  while (groups < 10000) {
    std::vector<double> rewards(G);
    const bool use_discrete = groups % 2 == 0;
    for (double& x : rewards) x = use_discrete ? discrete(rng) : real(rng);
    if (std::all_of(rewards.begin(), rewards.end(), [&](double x) { return x == rewards[0]; })) {
      continue;
    }
    ++groups;
    const auto adv = group_advantages(rewards, G);
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= G;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_std = std::max(worst_std, std::abs(std::sqrt(var / G) - 1.0));
  }
  int nonzero_degenerate = 0;
  for (double v : {0.0, 1.0, 2.0, -3.5, 1e6}) {
    const auto adv = group_advantages(std::vector<double>(G, v), G);
    for (double a : adv) nonzero_degenerate += a != 0.0 ? 1 : 0;
  }
  r.pass = worst_mean <= kAdvMeanTol && worst_std <= kAdvStdTol && nonzero_degenerate == 0;
  r.detail = "worst |mean| " + fmt("%.3g", worst_mean) + ", worst |std-1| " +
             fmt("%.3g", worst_std) + ", nonzero degenerate advantages " +
             std::to_string(nonzero_degenerate);
  return r;
}

CriterionResult c8_toy_convergence(const CriteriaOptions& o) {
  CriterionResult r{8, "toy GRPO: cold_start acc >= 0.95 and fmt >= 0.99, zero fmt >= 0.99", false, {}, 0.0};
  const auto start = std::chrono::steady_clock::now();
  GrpoFile file = load_grpo_file(o.config_dir / "grpo.toy.json");
  file.grpo.seed = o.seed;
  const toy::SyntheticQaEnv env(file.toy.binary_features, o.seed);

  auto cold = toy::ToyPolicy::base(env.feature_count(), o.seed);
  toy::train_toy_grpo(env, cold, file.grpo, file.toy.steps, toy::TrainMode::kColdStart,
                      file.toy.options);
  const auto cold_rates = toy::evaluate_policy(env, cold, 10000, o.seed);

  auto zero = toy::ToyPolicy::base(env.feature_count(), o.seed);
  toy::train_toy_grpo(env, zero, file.grpo, file.toy.steps, toy::TrainMode::kZero,
                      file.toy.options);
  const auto zero_rates = toy::evaluate_policy(env, zero, 10000, o.seed);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.pass = file.toy.steps <= 2000 && cold_rates.acc_rate >= kMinColdStartAcc &&
           cold_rates.fmt_rate >= kMinFormatRate && zero_rates.fmt_rate >= kMinFormatRate &&
           secs < kToyBudgetSeconds;
  r.detail = std::to_string(file.toy.steps) + " steps; cold_start acc " +
             fmt("%.4f", cold_rates.acc_rate) + " fmt " + fmt("%.4f", cold_rates.fmt_rate) +
             "; zero acc " + fmt("%.4f", zero_rates.acc_rate) + " fmt " +
             fmt("%.4f", zero_rates.fmt_rate) + "; " + fmt("%.1f", secs) + "s of 300s budget";
  return r;
}

std::vector<std::string> names_of(const TaggedResponse& t) {
  std::vector<std::string> out;
  for (const auto v : t.violations) out.emplace_back(violation_name(v));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> sorted_strings(const Json& j) {
  std::vector<std::string> out = j.get<std::vector<std::string>>();
  std::sort(out.begin(), out.end());
  return out;
}

CriterionResult c9_parser(const CriteriaOptions& o) {
  CriterionResult r{9, "40-case parser corpus and strict => lenient on 10,000 fuzzed strings", false, {}, 0.0};
  const auto corpus = read_jsonl(o.data_dir / "parser_corpus.jsonl");
  int corpus_fail = 0;
  std::string first_fail;
  for (const auto& rec : corpus) {
    const std::string raw = rec.value.at("raw").get<std::string>();
    const auto strict = parse_tagged(raw, Strictness::kStrict);
    const auto lenient = parse_tagged(raw, Strictness::kLenient);
    const auto want_strict = sorted_strings(rec.value.at("strict"));
    const auto want_lenient = sorted_strings(rec.value.at("lenient"));
    const auto& answer = rec.value.at("answer");
    const bool answer_ok =
        answer.is_null() ? !strict.answer.has_value()
                         : strict.answer && answer_name(*strict.answer) == answer.get<std::string>();
    const bool ok = names_of(strict) == want_strict && names_of(lenient) == want_lenient &&
                    strict.format_valid == (want_strict.empty() && answer_ok && !answer.is_null()) &&
                    lenient.format_valid == (want_lenient.empty() && !answer.is_null()) &&
                    answer_ok;
    if (!ok) {
      ++corpus_fail;
      if (first_fail.empty()) first_fail = rec.value.at("id").get<std::string>();
    }
  }

  auto rng = rng_for(o.seed, 9);
  const std::vector<std::string> pieces = {
      "<answer>", "</answer>", "<reason>", "</reason>", "Yes", "No",   "yes", "no",
      "YES",      "NO",        " ",        "\n",        "the", "blur", "<",   ">",
      "/",        "answer",    "Maybe",    ".",         "-",   "_",    "\t",  "\xc3\xa4"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 14);
  int monotone_fail = 0;
  int strict_valid = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    // Every fourth string starts from a valid response to keep valid cases
    // common.
    if (i % 4 == 0) s = "<answer>Yes</answer><reason>fine</reason>";
    const int n = len(rng);
    for (int k = 0; k < n; ++k) {
      const std::string& p = pieces[pick(rng)];
      std::uniform_int_distribution<std::size_t> at(0, s.size());
      s.insert(at(rng), p);
    }
    const bool strict = parse_tagged(s, Strictness::kStrict).format_valid;
    const bool lenient = parse_tagged(s, Strictness::kLenient).format_valid;
    strict_valid += strict ? 1 : 0;
    if (strict && !lenient) ++monotone_fail;
  }
  r.pass = corpus.size() == 40 && corpus_fail == 0 && monotone_fail == 0;
  r.detail = std::to_string(corpus.size()) + " cases, " + std::to_string(corpus_fail) +
             " mismatched" + (first_fail.empty() ? "" : " (first: " + first_fail + ")") + "; " +
             std::to_string(monotone_fail) + " monotonicity violations (" +
             std::to_string(strict_valid) + " strict-valid fuzz strings)";
  return r;
}

std::vector<ScorePair> to_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<ScorePair> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back({std::to_string(i), x[i], y[i]});
  return out;
}

CriterionResult c10_metrics(const CriteriaOptions& o) {
  CriterionResult r{10, "srcc/plcc match direct-formula oracles; invariances; -0.5 fixture", false, {}, 0.0};
  auto rng = rng_for(o.seed, 10);
  std::uniform_int_distribution<int> size(2, 60);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> slope(0.1, 10.0);
  double worst_srcc = 0.0, worst_plcc = 0.0, worst_mono = 0.0, worst_affine = 0.0;
  int datasets = 0;
  while (datasets < 1000) {
    const auto n = static_cast<std::size_t>(size(rng));
    const bool ties = datasets % 3 == 0;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ties ? std::round(u(rng) / 4.0) : u(rng);
      y[i] = ties ? std::round(u(rng) / 4.0) : 0.5 * x[i] + u(rng);
    }
    const auto pairs = to_pairs(x, y);
    double s = 0.0, p = 0.0;
    try {
      s = srcc(pairs);
      p = plcc(pairs);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kDegenerateVariance) continue;
      throw;
    }
    ++datasets;
    worst_srcc = std::max(worst_srcc, std::abs(s - oracle::spearman(x, y)));
    worst_plcc = std::max(worst_plcc, std::abs(p - oracle::pearson(x, y)));

    std::vector<double> mx(n), ax(n), ay(n);
    const double a = slope(rng), b = u(rng), c = slope(rng), d = u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      mx[i] = std::atan(x[i] / 10.0) + x[i] * x[i] * x[i] / 1e4;
      ax[i] = a * x[i] + b;
      ay[i] = c * y[i] + d;
    }
    worst_mono = std::max(worst_mono, std::abs(srcc(to_pairs(mx, y)) - s));
    worst_affine = std::max({worst_affine, std::abs(plcc(to_pairs(ax, y)) - p),
                             std::abs(plcc(to_pairs(x, ay)) - p)});
  }
  const double fixture = srcc(to_pairs({1, 2, 3}, {3, 1, 2}));
  r.pass = worst_srcc <= kMetricsOracleTol && worst_plcc <= kMetricsOracleTol &&
           worst_mono <= kInvarianceTol && worst_affine <= kInvarianceTol && fixture == -0.5;
  r.detail = "oracle err srcc " + fmt("%.3g", worst_srcc) + " plcc " + fmt("%.3g", worst_plcc) +
             "; invariance drift monotone " + fmt("%.3g", worst_mono) + " affine " +
             fmt("%.3g", worst_affine) + "; fixture " + fmt("%.17g", fixture);
  return r;
}

CriterionResult c11_end_to_end(const CriteriaOptions& o) {
  CriterionResult r{11, "eval on mock corpus is byte-identical; conservation under failures", false, {}, 0.0};
  const auto corpus = o.data_dir / "mini_corpus";
  const auto dataset = ingest(corpus);
  MockBackend backend(corpus / "backend");
  EvalConfig cfg;
  const auto run_a = run_eval(dataset, backend, cfg);
  cfg.parallelism = 4;
  const auto run_b = run_eval(dataset, backend, cfg);
  const auto dir = o.work_dir / "c11";
  emit_report(run_a, ReportFormat::kJson, dir / "a.json");
  emit_report(run_b, ReportFormat::kJson, dir / "b.json");
  emit_report(run_a, ReportFormat::kMarkdownTable, dir / "a.md");
  emit_report(run_b, ReportFormat::kMarkdownTable, dir / "b.md");
  const bool identical = read_text(dir / "a.json") == read_text(dir / "b.json") &&
                         read_text(dir / "a.md") == read_text(dir / "b.md");

  // Inject failures into every third fixture line.
  const auto faulty = dir / "faulty";
  std::string text;
  std::size_t injected = 0;
  for (const auto& rec : read_jsonl(corpus / "backend" / "backend.jsonl")) {
    Json line = rec.value;
    if (rec.line % 3 == 0 && !line.contains("error")) {
      line = Json{{"schema_version", kSchemaVersion},
                  {"question_id", rec.value.at("question_id")},
                  {"error", "injected"}};
      ++injected;
    }
    text += dump_line(line) + "\n";
  }
  write_text(faulty / "backend.jsonl", text);
  MockBackend faulty_backend(faulty);
  const auto run_c = run_eval(dataset, faulty_backend, cfg);

  const bool conserved_clean =
      run_a.questions_in == run_a.results.size() + run_a.failures.size();
  const bool conserved_faulty =
      run_c.questions_in == run_c.results.size() + run_c.failures.size() &&
      run_c.failures.size() >= injected;
  r.pass = identical && conserved_clean && conserved_faulty;
  r.detail = std::string(identical ? "reports identical" : "reports differ") + "; clean " +
             std::to_string(run_a.questions_in) + " = " + std::to_string(run_a.results.size()) +
             " + " + std::to_string(run_a.failures.size()) + "; faulty " +
             std::to_string(run_c.questions_in) + " = " + std::to_string(run_c.results.size()) +
             " + " + std::to_string(run_c.failures.size()) + " (" + std::to_string(injected) +
             " injected)";
  return r;
}

CriterionResult c12_hard_soft(const CriteriaOptions& o) {
  CriterionResult r{12, "degenerate distributions: prob and hard ScoreTrees identical", false, {}, 0.0};
  auto rng = rng_for(o.seed, 12);
  const auto sets = TokenSets::defaults();
  std::uniform_int_distribution<int> count(1, 25);
  std::uniform_int_distribution<int> dim(0, 4);
  std::uniform_int_distribution<std::size_t> token(0, 4);
  std::uniform_int_distribution<int> style(0, 2);
  std::bernoulli_distribution coin(0.5);
  int mismatches = 0;
  const int videos = 500;
  for (int v = 0; v < videos; ++v) {
    std::vector<QuestionResponse> items;
    const int n = count(rng);
    for (int q = 0; q < n; ++q) {
      QuestionResponse item;
      item.question.question_id = "q" + std::to_string(q);
      item.question.video_id = "v";
      item.question.dimension = kAllDimensions[static_cast<std::size_t>(dim(rng))];
      item.question.polarity = coin(rng) ? Polarity::kPositive : Polarity::kNegative;
      const bool yes = coin(rng);
      const auto& winners = yes ? sets.yes_tokens : sets.no_tokens;
      const auto& losers = yes ? sets.no_tokens : sets.yes_tokens;
      AnswerLogits logits;
      logits.entries.push_back({winners[token(rng)], 0.0, LogitKind::kFullVocabLogprob});
      switch (style(rng)) {
        case 0:  // the only member present
          break;
        case 1:  // the other side underflows
          logits.entries.push_back({losers[token(rng)], -1000.0, LogitKind::kFullVocabLogprob});
          break;
        default:  // the other side is masked out entirely
          logits.entries.push_back({losers[token(rng)], -INFINITY, LogitKind::kFullVocabLogprob});
          break;
      }
      item.logits = logits;
      item.response = parse_tagged(render_tagged(yes ? Answer::kYes : Answer::kNo, "because"),
                                   Strictness::kStrict);
      items.push_back(std::move(item));
    }
    for (const ScoreMode mode : {ScoreMode::kNormalized, ScoreMode::kPaperLiteral}) {
      if (mode == ScoreMode::kPaperLiteral) {
        // Paper-literal needs every dimension present.
        bool all = true;
        for (const Dimension d : kAllDimensions) {
          all = all && std::any_of(items.begin(), items.end(),
                                   [&](const auto& it) { return it.question.dimension == d; });
        }
        if (!all) continue;
      }
      auto soft = score_video(items, sets, uniform_weights(), mode, true);
      const auto hard = score_video(items, sets, uniform_weights(), mode, false);
      soft.prob_mode = hard.prob_mode;
      if (!(soft == hard)) ++mismatches;
    }
  }
  r.pass = mismatches == 0;
  r.detail = std::to_string(mismatches) + " mismatching trees over " + std::to_string(videos) +
             " random videos";
  return r;
}

}  // namespace

std::vector<CriterionResult> run_criteria(const CriteriaOptions& options) {
  using Fn = CriterionResult (*)(const CriteriaOptions&);
  const Fn all[] = {c1_softmax_oracle, c2_normalization_shift, c3_polarity_duality,
                    c4_mode_consistency, c5_gradient_check,    c6_kl,
                    c7_advantages,      c8_toy_convergence,    c9_parser,
                    c10_metrics,        c11_end_to_end,        c12_hard_soft};
  std::vector<CriterionResult> out;
  int id = 1;
  for (const Fn fn : all) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn(options);
    } catch (const std::exception& e) {
      r.id = id;
      r.title = "criterion " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("threw: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
    ++id;
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  char head[32];
  std::snprintf(head, sizeof head, "[%s] %02d ", r.pass ? "PASS" : "FAIL", r.id);
  return head + r.title + " (" + fmt("%.2f", r.seconds) + "s): " + r.detail;
}

}  // namespace fg::acceptance
